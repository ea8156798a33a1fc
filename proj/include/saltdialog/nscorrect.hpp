#pragma once
// Symbolic correction of a predicted belief's salt value.
//
// The non-salt slots select records from the knowledge base. A single match
// overrides the predicted salt: the stored value at the standard serving, or
// the linearly scaled value for any other weight. Multiple matches or none
// leave the prediction's salt untouched; the caller decides how to follow up.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saltdialog/belief.hpp"
#include "saltdialog/food_kb.hpp"

namespace saltdialog {

enum class CorrectionStatus { retrieved, computed, ambiguous, not_found };

std::string_view to_string(CorrectionStatus s);

struct CorrectionOutcome {
    BeliefState belief;
    CorrectionStatus status = CorrectionStatus::not_found;
    std::size_t candidates = 0;
    std::optional<int> record_id;
    // Effective serving the salt value refers to (after defaults).
    std::optional<double> weight;
    std::string metric;
    std::string reason;

    bool resolved() const {
        return status == CorrectionStatus::retrieved || status == CorrectionStatus::computed;
    }
};

// Absent foodweight/metric default to the record's standard serving; a weight
// without a metric is read in the record's serving metric.
CorrectionOutcome correct(const BeliefState& predicted, const KnowledgeBase& kb, const UnitTable& units);

struct Dialogue;

// Element-wise correct(); throws AlignmentError when the lengths differ.
std::vector<CorrectionOutcome> correct_corpus(std::span<const BeliefState> predictions,
                                              std::span<const Dialogue> gold_dialogues, const KnowledgeBase& kb,
                                              const UnitTable& units);

} // namespace saltdialog
