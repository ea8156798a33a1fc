#pragma once
// Exception types shared by every module.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saltdialog {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedDescription : Error {
    using Error::Error;
};

struct OntologyError : Error {
    using Error::Error;
};

// A knowledge-base row failed validation. `id` is the 1-based data row.
struct RowRejected : Error {
    RowRejected(int id, std::string reason)
        : Error("row " + std::to_string(id) + " rejected: " + reason), id(id), reason(std::move(reason)) {}
    int id;
    std::string reason;
};

struct DuplicateRecord : RowRejected {
    DuplicateRecord(int id, const std::string& description)
        : RowRejected(id, "duplicate description '" + description + "'") {}
};

struct MissingFoodSlot : Error {
    MissingFoodSlot() : Error("lookup constraints must include the food slot") {}
};

struct UnitMismatch : Error {
    UnitMismatch(const std::string& from, const std::string& to)
        : Error("cannot convert '" + from + "' to '" + to + "'") {}
};

struct TemplateError : Error {
    explicit TemplateError(std::string placeholder_name)
        : Error("unbound template placeholder '{" + placeholder_name + "}'"), placeholder(std::move(placeholder_name)) {}
    TemplateError(std::string placeholder_name, const std::string& what)
        : Error(what), placeholder(std::move(placeholder_name)) {}
    std::string placeholder;
};

struct ConfigError : Error {
    using Error::Error;
};

// Turn index is -1 when the problem is at dialogue level.
struct CorpusFormatError : Error {
    CorpusFormatError(std::size_t dialogue, long turn, const std::string& what)
        : Error("dialogue " + std::to_string(dialogue) +
                (turn >= 0 ? ", turn " + std::to_string(turn) : std::string()) + ": " + what),
          dialogue_index(dialogue), turn_index(turn) {}
    std::size_t dialogue_index;
    long turn_index;
};

struct BeliefParseError : Error {
    using Error::Error;
};

struct PredictorUnavailable : Error {
    using Error::Error;
};

struct AlignmentError : Error {
    AlignmentError(std::size_t lhs, std::size_t rhs)
        : Error("misaligned inputs: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

struct MetricUndefined : Error {
    using Error::Error;
};

struct SessionNotFound : Error {
    explicit SessionNotFound(const std::string& id) : Error("unknown session " + id) {}
};

struct SessionCompleted : Error {
    explicit SessionCompleted(const std::string& id) : Error("session " + id + " is completed") {}
};

struct SessionExpired : Error {
    explicit SessionExpired(const std::string& id) : Error("session " + id + " has expired") {}
};

struct SessionLimitReached : Error {
    using Error::Error;
};

} // namespace saltdialog
