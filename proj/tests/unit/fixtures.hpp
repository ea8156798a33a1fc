#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "saltdialog/food_kb.hpp"
#include "saltdialog/units.hpp"

namespace fixtures {

inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(SALTDIALOG_DATA_DIR) / name; }

inline const saltdialog::Ontology& ontology() {
    static const auto o = saltdialog::Ontology::load(data("ontology.json"));
    return o;
}

// The five sample pork records, ids 1..5.
inline const saltdialog::KnowledgeBase& pork_kb() {
    static const auto kb = saltdialog::ingest_records(data("pork_sample.csv"), ontology());
    return kb;
}

// The pork records plus rows that populate the animal and part relations.
inline const saltdialog::KnowledgeBase& sample_kb() {
    static const auto kb = saltdialog::ingest_records(data("sample_foods.csv"), ontology());
    return kb;
}

inline saltdialog::FoodRecord record(int id, saltdialog::SlotMap slots, double salt, double weight = 100.0,
                                     std::string metric = "grams") {
    saltdialog::FoodRecord r;
    r.id = id;
    r.slots = std::move(slots);
    for (const auto& [rel, v] : r.slots)
        r.segments.push_back(v);
    r.raw_description = "record " + std::to_string(id);
    r.salt_mg = salt;
    r.serving_weight = weight;
    r.serving_metric = std::move(metric);
    return r;
}

// A scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("saltdialog-test-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" +
                std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

} // namespace fixtures

namespace fixtures {

// Opening question, volunteered weight, type answer, cook answer; resolves to
// record 2 (55 mg per 100 grams).
inline const std::vector<std::string>& pork_chop_script() {
    static const std::vector<std::string> s{
        "How much salt in pork?",
        "100 grams",
        "It is fresh loin center loin chops bone-in separable lean and fat cooked.",
        "It is broiled.",
    };
    return s;
}

} // namespace fixtures
