#include "saltdialog/food_kb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "csv.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

namespace {

constexpr std::array<std::string_view, 5> kRelationNames{"food", "cook", "type", "animal", "part"};

nlohmann::json read_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(std::string("cannot open ") + what + " " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(what) + " " + path.string() + ": " + e.what());
    }
}

bool has_extension(const std::filesystem::path& p, std::initializer_list<std::string_view> exts) {
    const std::string ext = to_lower(p.extension().string());
    return std::any_of(exts.begin(), exts.end(), [&](std::string_view e) { return ext == e; });
}

struct RawRow {
    std::string description;
    std::string salt;
    std::string weight;
    std::string metric;
    std::string grams;
};

std::optional<double> number_field(const nlohmann::json& j, const char* key, std::string& text) {
    if (!j.contains(key) || j[key].is_null())
        return std::nullopt;
    if (j[key].is_number()) {
        text = format_exact(j[key].get<double>());
        return j[key].get<double>();
    }
    if (j[key].is_string()) {
        text = j[key].get<std::string>();
        return parse_double(text);
    }
    text = j[key].dump();
    return std::nullopt;
}

} // namespace

std::string_view to_string(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> relation_from_string(std::string_view s) {
    const std::string n = normalize_term(s);
    for (std::size_t i = 0; i < kRelationNames.size(); ++i)
        if (kRelationNames[i] == n)
            return kAllRelations[i];
    return std::nullopt;
}

// ---- Ontology -------------------------------------------------------------

Ontology::Ontology(std::map<std::string, Relation> entries, std::set<std::string> blocklist)
    : entries_(std::move(entries)), blocklist_(std::move(blocklist)) {
    for (const auto& [term, rel] : entries_) {
        if (!is_normalized_term(term))
            throw OntologyError("ontology key '" + term + "' is not normalized");
        if (blocklist_.count(term))
            throw OntologyError("ontology key '" + term + "' is also blocklisted");
    }
    for (const auto& term : blocklist_)
        if (!is_normalized_term(term))
            throw OntologyError("blocklist term '" + term + "' is not normalized");
}

Ontology Ontology::from_json(const nlohmann::json& j) {
    std::map<std::string, Relation> entries;
    std::set<std::string> blocklist;
    try {
        if (j.contains("entries"))
            for (const auto& [term, rel] : j.at("entries").items()) {
                auto r = relation_from_string(rel.get<std::string>());
                if (!r)
                    throw OntologyError("unknown relation '" + rel.get<std::string>() + "' for '" + term + "'");
                entries.emplace(term, *r);
            }
        if (j.contains("blocklist"))
            for (const auto& term : j.at("blocklist"))
                blocklist.insert(term.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw OntologyError(std::string("ontology: ") + e.what());
    }
    return Ontology(std::move(entries), std::move(blocklist));
}

Ontology Ontology::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path, "ontology"));
}

nlohmann::json Ontology::to_json() const {
    nlohmann::json j;
    j["entries"] = nlohmann::json::object();
    for (const auto& [term, rel] : entries_)
        j["entries"][term] = std::string(to_string(rel));
    j["blocklist"] = nlohmann::json::array();
    for (const auto& term : blocklist_)
        j["blocklist"].push_back(term);
    return j;
}

void Ontology::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

std::optional<Relation> Ontology::find(std::string_view term) const {
    if (auto it = entries_.find(std::string(term)); it != entries_.end())
        return it->second;
    return std::nullopt;
}

bool Ontology::blocked(std::string_view term) const { return blocklist_.count(std::string(term)) > 0; }

// ---- parsing and classification --------------------------------------------

std::vector<std::string> parse_description(std::string_view raw) {
    std::vector<std::string> segments;
    for (const auto& piece : split(raw, ',')) {
        std::string term = normalize_term(piece);
        if (!term.empty())
            segments.push_back(std::move(term));
    }
    if (segments.empty())
        throw MalformedDescription("description '" + std::string(raw) + "' has no segments");
    return segments;
}

SlotMap classify_segments(std::span<const std::string> segments, const Ontology& ontology) {
    SlotMap slots;
    if (segments.empty())
        return slots;
    slots[Relation::food] = segments.front();
    for (const auto& seg : segments.subspan(1)) {
        Relation r = ontology.find(seg).value_or(Relation::type);
        if (r == Relation::food)
            r = Relation::type;
        auto& value = slots[r];
        if (!value.empty())
            value.push_back('_');
        value += seg;
    }
    return slots;
}

// ---- ontology expansion ----------------------------------------------------

std::vector<NeighborRow> read_neighbor_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open neighbor file " + path.string());
    std::vector<NeighborRow> rows;
    std::vector<std::string> fields;
    bool header = true;
    std::size_t line = 0;
    while (detail::read_csv_record(in, fields)) {
        ++line;
        if (detail::blank_record(fields))
            continue;
        if (header) {
            header = false;
            if (fields.size() >= 1 && normalize_term(fields[0]) == "seed_term")
                continue;
        }
        if (fields.size() != 3)
            throw ConfigError("neighbor file line " + std::to_string(line) + ": expected 3 columns");
        auto sim = parse_double(fields[2]);
        if (!sim)
            throw ConfigError("neighbor file line " + std::to_string(line) + ": bad similarity");
        rows.push_back({normalize_term(fields[0]), normalize_term(fields[1]), *sim});
    }
    return rows;
}

nlohmann::json ExpansionReport::to_json() const {
    nlohmann::json j;
    j["added"] = nlohmann::json::array();
    for (const auto& a : added)
        j["added"].push_back({{"term", a.term},
                              {"relation", std::string(to_string(a.relation))},
                              {"seed", a.seed},
                              {"similarity", a.similarity}});
    j["below_threshold"] = below_threshold;
    j["blocked"] = blocked;
    j["already_present"] = already_present;
    j["unknown_seed"] = unknown_seed;
    return j;
}

ExpansionResult expand_ontology(const Ontology& ontology, std::span<const NeighborRow> rows, double threshold) {
    auto entries = ontology.entries();
    ExpansionReport report;
    for (const auto& row : rows) {
        const std::string seed = normalize_term(row.seed);
        const std::string neighbor = normalize_term(row.neighbor);
        auto rel = ontology.find(seed);
        if (!rel) {
            ++report.unknown_seed;
            continue;
        }
        if (row.similarity < threshold) {
            ++report.below_threshold;
            continue;
        }
        if (neighbor.empty() || ontology.blocked(neighbor)) {
            ++report.blocked;
            continue;
        }
        if (entries.count(neighbor)) {
            ++report.already_present;
            continue;
        }
        entries.emplace(neighbor, *rel);
        report.added.push_back({neighbor, *rel, seed, row.similarity});
    }
    return {Ontology(std::move(entries), ontology.blocklist()), std::move(report)};
}

// ---- knowledge base --------------------------------------------------------

KnowledgeBase::KnowledgeBase(std::vector<FoodRecord> records) : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < records_.size(); ++i)
        if (records_[i].id == records_[i - 1].id)
            throw RowRejected(records_[i].id, "duplicate record id");
    for (const auto& r : records_) {
        if (!r.slots.count(Relation::food))
            throw RowRejected(r.id, "record has no food slot");
        if (!(r.salt_mg >= 0.0))
            throw RowRejected(r.id, "salt_mg must be non-negative");
        if (!(r.serving_weight > 0.0))
            throw RowRejected(r.id, "serving_weight must be positive");
    }
    for (Relation rel : kAllRelations) {
        std::set<std::string> values;
        for (const auto& r : records_)
            if (auto it = r.slots.find(rel); it != r.slots.end())
                values.insert(it->second);
        vocab_[rel].assign(values.begin(), values.end());
    }
}

const FoodRecord* KnowledgeBase::find(int id) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), id,
                               [](const FoodRecord& r, int v) { return r.id < v; });
    return it != records_.end() && it->id == id ? &*it : nullptr;
}

std::vector<const FoodRecord*> KnowledgeBase::lookup(const SlotMap& constraints) const {
    if (!constraints.count(Relation::food))
        throw MissingFoodSlot();
    SlotMap normalized;
    for (const auto& [rel, value] : constraints)
        normalized[rel] = normalize_term(value);
    std::vector<const FoodRecord*> out;
    for (const auto& r : records_) {
        bool match = std::all_of(normalized.begin(), normalized.end(), [&](const auto& c) {
            auto it = r.slots.find(c.first);
            return it != r.slots.end() && it->second == c.second;
        });
        if (match)
            out.push_back(&r);
    }
    return out;
}

const std::vector<std::string>& KnowledgeBase::vocabulary(Relation r) const {
    static const std::vector<std::string> empty;
    auto it = vocab_.find(r);
    return it == vocab_.end() ? empty : it->second;
}

nlohmann::json KnowledgeBase::to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records_) {
        nlohmann::json slots = nlohmann::json::object();
        for (const auto& [rel, v] : r.slots)
            slots[std::string(to_string(rel))] = v;
        nlohmann::json j{{"id", r.id},
                         {"raw_description", r.raw_description},
                         {"segments", r.segments},
                         {"slots", slots},
                         {"salt_mg", r.salt_mg},
                         {"serving_weight", r.serving_weight},
                         {"serving_metric", r.serving_metric}};
        if (r.serving_grams)
            j["serving_grams"] = *r.serving_grams;
        recs.push_back(std::move(j));
    }
    return {{"records", recs}};
}

KnowledgeBase KnowledgeBase::from_json(const nlohmann::json& j) {
    std::vector<FoodRecord> records;
    try {
        for (const auto& jr : j.at("records")) {
            FoodRecord r;
            r.id = jr.at("id").get<int>();
            r.raw_description = jr.at("raw_description").get<std::string>();
            r.segments = jr.at("segments").get<std::vector<std::string>>();
            for (const auto& [name, v] : jr.at("slots").items()) {
                auto rel = relation_from_string(name);
                if (!rel)
                    throw RowRejected(r.id, "unknown relation '" + name + "'");
                r.slots[*rel] = v.get<std::string>();
            }
            r.salt_mg = jr.at("salt_mg").get<double>();
            r.serving_weight = jr.at("serving_weight").get<double>();
            r.serving_metric = jr.at("serving_metric").get<std::string>();
            if (jr.contains("serving_grams") && !jr["serving_grams"].is_null())
                r.serving_grams = jr["serving_grams"].get<double>();
            records.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("knowledge base: ") + e.what());
    }
    return KnowledgeBase(std::move(records));
}

void KnowledgeBase::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path, "knowledge base"));
}

// ---- ingestion -------------------------------------------------------------

IngestResult ingest_records_report(const std::filesystem::path& path, const Ontology& ontology,
                                   const UnitTable& units) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open records file " + path.string());

    std::vector<RawRow> rows;
    std::vector<std::optional<std::string>> row_errors;
    if (has_extension(path, {".jsonl", ".ndjson"})) {
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty())
                continue;
            RawRow row;
            std::optional<std::string> err;
            try {
                auto j = nlohmann::json::parse(line);
                row.description = j.value("raw_description", "");
                number_field(j, "salt_mg", row.salt);
                number_field(j, "serving_weight", row.weight);
                number_field(j, "serving_grams", row.grams);
                row.metric = j.value("serving_metric", "");
            } catch (const nlohmann::json::exception& e) {
                err = std::string("invalid JSON: ") + e.what();
            }
            rows.push_back(std::move(row));
            row_errors.push_back(std::move(err));
        }
    } else {
        std::vector<std::string> fields;
        std::map<std::string, std::size_t> col;
        bool header = true;
        while (detail::read_csv_record(in, fields)) {
            if (detail::blank_record(fields))
                continue;
            if (header) {
                header = false;
                for (std::size_t i = 0; i < fields.size(); ++i)
                    col[normalize_term(fields[i])] = i;
                for (const char* need : {"raw_description", "salt_mg", "serving_weight", "serving_metric"})
                    if (!col.count(need))
                        throw ConfigError(path.string() + ": missing column " + need);
                continue;
            }
            auto get = [&](const char* name) {
                auto it = col.find(name);
                return it != col.end() && it->second < fields.size() ? fields[it->second] : std::string();
            };
            RawRow row{get("raw_description"), get("salt_mg"), get("serving_weight"), get("serving_metric"),
                       get("serving_grams")};
            std::optional<std::string> err;
            if (fields.size() != col.size())
                err = "expected " + std::to_string(col.size()) + " fields, got " + std::to_string(fields.size());
            rows.push_back(std::move(row));
            row_errors.push_back(std::move(err));
        }
    }

    IngestResult result;
    std::vector<FoodRecord> records;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        const RawRow& row = rows[i];
        auto reject = [&](std::string reason) { result.rejected.push_back({id, std::move(reason), false, row.description}); };
        if (row_errors[i]) {
            reject(*row_errors[i]);
            continue;
        }
        FoodRecord r;
        r.id = id;
        r.raw_description = trim(row.description);
        try {
            r.segments = parse_description(r.raw_description);
        } catch (const MalformedDescription&) {
            reject("raw_description is empty");
            continue;
        }
        auto salt = parse_double(row.salt);
        auto weight = parse_double(row.weight);
        if (!salt) {
            reject("salt_mg '" + row.salt + "' is not a number");
            continue;
        }
        if (*salt < 0.0) {
            reject("salt_mg must be non-negative");
            continue;
        }
        if (!weight) {
            reject("serving_weight '" + row.weight + "' is not a number");
            continue;
        }
        if (*weight <= 0.0) {
            reject("serving_weight must be positive");
            continue;
        }
        r.serving_metric = units.canonical(row.metric);
        if (r.serving_metric.empty()) {
            reject("serving_metric is empty");
            continue;
        }
        if (!trim(row.grams).empty()) {
            auto grams = parse_double(row.grams);
            if (!grams || *grams <= 0.0) {
                reject("serving_grams must be a positive number");
                continue;
            }
            r.serving_grams = *grams;
        }
        std::string key;
        for (const auto& s : r.segments)
            key += s + ',';
        if (!seen.insert(key).second) {
            result.rejected.push_back({id, "duplicate description", true, r.raw_description});
            continue;
        }
        r.salt_mg = *salt;
        r.serving_weight = *weight;
        r.slots = classify_segments(r.segments, ontology);
        records.push_back(std::move(r));
    }
    result.kb = KnowledgeBase(std::move(records));
    return result;
}

KnowledgeBase ingest_records(const std::filesystem::path& path, const Ontology& ontology, const UnitTable& units) {
    auto result = ingest_records_report(path, ontology, units);
    if (!result.rejected.empty()) {
        const RowRejection& first = result.rejected.front();
        if (first.duplicate)
            throw DuplicateRecord(first.id, first.description);
        throw RowRejected(first.id, first.reason);
    }
    return std::move(result.kb);
}

// ---- salt arithmetic -------------------------------------------------------

namespace {

// Amount of `weight` `metric` expressed in the record's serving metric.
std::optional<double> in_serving_metric(const FoodRecord& r, double weight, std::string_view metric,
                                        const UnitTable& units) {
    if (auto f = units.factor(metric, r.serving_metric))
        return weight * *f;
    // Count-unit record with a gram equivalent, queried by mass.
    if (r.serving_grams) {
        if (auto g = units.grams_per_unit(metric))
            return weight * *g / *r.serving_grams * r.serving_weight;
    }
    return std::nullopt;
}

} // namespace

bool is_standard_serving(const FoodRecord& record, double weight, std::string_view metric, const UnitTable& units) {
    if (units.canonical(metric) != units.canonical(record.serving_metric))
        return false;
    return std::abs(weight - record.serving_weight) <= 1e-9 * std::abs(record.serving_weight);
}

double salt_for(const FoodRecord& record, double weight, std::string_view metric, const UnitTable& units) {
    if (is_standard_serving(record, weight, metric, units))
        return record.salt_mg;
    auto amount = in_serving_metric(record, weight, metric, units);
    if (!amount)
        throw UnitMismatch(std::string(metric), record.serving_metric);
    return record.salt_mg * *amount / record.serving_weight;
}

bool convertible(const FoodRecord& record, std::string_view metric, const UnitTable& units) {
    return in_serving_metric(record, 1.0, metric, units).has_value();
}

} // namespace saltdialog
