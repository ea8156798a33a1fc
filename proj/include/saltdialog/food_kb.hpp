#pragma once
// Food knowledge base: description parsing, ontology classification and salt
// lookups with unit conversion.
//
// A description such as "Pork, fresh, loin, top loin (chops), raw" is split
// on commas into normalized segments. The first segment is always the food;
// the rest are classified through the ontology, and anything the ontology
// does not know is folded into the `type` relation. Several segments landing
// on the same relation are joined with underscores in description order.
//
// The knowledge base and ontology are immutable once built and may be read
// from any number of threads.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "saltdialog/errors.hpp"
#include "saltdialog/units.hpp"

namespace saltdialog {

enum class Relation { food, cook, type, animal, part };

inline constexpr std::array<Relation, 5> kAllRelations{Relation::food, Relation::cook, Relation::type,
                                                       Relation::animal, Relation::part};

std::string_view to_string(Relation r);
std::optional<Relation> relation_from_string(std::string_view s);

using SlotMap = std::map<Relation, std::string>;

class Ontology {
public:
    Ontology() = default;
    // Throws OntologyError if a key is not normalized or is also blocklisted.
    Ontology(std::map<std::string, Relation> entries, std::set<std::string> blocklist);

    // {"entries": {term: relation}, "blocklist": [term]}
    static Ontology from_json(const nlohmann::json& j);
    static Ontology load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void save(const std::filesystem::path& path) const;

    std::optional<Relation> find(std::string_view term) const;
    bool blocked(std::string_view term) const;

    const std::map<std::string, Relation>& entries() const { return entries_; }
    const std::set<std::string>& blocklist() const { return blocklist_; }

private:
    std::map<std::string, Relation> entries_;
    std::set<std::string> blocklist_;
};

// Throws MalformedDescription when nothing survives normalization.
std::vector<std::string> parse_description(std::string_view raw);

SlotMap classify_segments(std::span<const std::string> segments, const Ontology& ontology);

struct NeighborRow {
    std::string seed;
    std::string neighbor;
    double similarity = 0.0;
};

// CSV with header seed_term,neighbor_term,similarity.
std::vector<NeighborRow> read_neighbor_file(const std::filesystem::path& path);

struct ExpansionReport {
    struct Addition {
        std::string term;
        Relation relation;
        std::string seed;
        double similarity;
    };
    std::vector<Addition> added;
    std::size_t below_threshold = 0;
    std::size_t blocked = 0;
    std::size_t already_present = 0;
    std::size_t unknown_seed = 0;

    nlohmann::json to_json() const;
};

struct ExpansionResult {
    Ontology ontology;
    ExpansionReport report;
};

inline constexpr double kDefaultExpansionThreshold = 0.6;

// Adds neighbor -> relation(seed) for rows at or above the threshold. Existing
// entries are never overwritten and blocklisted neighbors are never added.
ExpansionResult expand_ontology(const Ontology& ontology, std::span<const NeighborRow> rows,
                                double threshold = kDefaultExpansionThreshold);

struct FoodRecord {
    int id = 0;
    std::string raw_description;
    std::vector<std::string> segments;
    SlotMap slots;
    double salt_mg = 0.0;
    double serving_weight = 0.0;
    std::string serving_metric;
    // Gram equivalent of one standard serving; lets count-unit records
    // (packet, slice) be queried by mass.
    std::optional<double> serving_grams;

    bool operator==(const FoodRecord&) const = default;
};

class KnowledgeBase {
public:
    KnowledgeBase() = default;
    explicit KnowledgeBase(std::vector<FoodRecord> records);

    std::span<const FoodRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const FoodRecord* find(int id) const;

    // Records whose slots contain every constraint, ascending by id.
    // Throws MissingFoodSlot without a food constraint.
    std::vector<const FoodRecord*> lookup(const SlotMap& constraints) const;

    // Sorted distinct values a relation takes across the records.
    const std::vector<std::string>& vocabulary(Relation r) const;

    nlohmann::json to_json() const;
    static KnowledgeBase from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static KnowledgeBase load(const std::filesystem::path& path);

private:
    std::vector<FoodRecord> records_;
    std::map<Relation, std::vector<std::string>> vocab_;
};

struct RowRejection {
    int id = 0;
    std::string reason;
    bool duplicate = false;
    std::string description;
};

struct IngestResult {
    KnowledgeBase kb;
    std::vector<RowRejection> rejected;
};

// Reads CSV (header raw_description,salt_mg,serving_weight,serving_metric and
// an optional serving_grams) or JSON lines with the same keys; the format is
// chosen by extension (.jsonl / .ndjson select JSON lines). Ids follow the data
// row number starting at 1. Bad rows are collected, not thrown.
IngestResult ingest_records_report(const std::filesystem::path& path, const Ontology& ontology,
                                   const UnitTable& units = UnitTable::defaults());

// Same, but the first bad row is thrown as RowRejected or DuplicateRecord.
KnowledgeBase ingest_records(const std::filesystem::path& path, const Ontology& ontology,
                             const UnitTable& units = UnitTable::defaults());

// Standard serving: identical canonical unit and weight within 1e-9 relative.
bool is_standard_serving(const FoodRecord& record, double weight, std::string_view metric,
                         const UnitTable& units);

// Salt in mg for `weight` `metric` of the record. The standard serving returns
// salt_mg untouched; anything else is scaled linearly. Throws UnitMismatch.
double salt_for(const FoodRecord& record, double weight, std::string_view metric, const UnitTable& units);

// True if salt_for would not throw for this unit.
bool convertible(const FoodRecord& record, std::string_view metric, const UnitTable& units);

} // namespace saltdialog
