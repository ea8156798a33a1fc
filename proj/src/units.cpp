#include "saltdialog/units.hpp"

#include <fstream>

#include "saltdialog/errors.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

UnitTable UnitTable::defaults() {
    UnitTable t;
    t.add_mass_unit("grams", 1.0);
    t.add_mass_unit("ounces", 28.3495);
    t.add_mass_unit("kilograms", 1000.0);
    t.add_mass_unit("pounds", 453.592);
    for (auto [alias, name] : {std::pair{"gram", "grams"}, {"g", "grams"}, {"gms", "grams"}, {"gm", "grams"},
                               {"ounce", "ounces"}, {"oz", "ounces"}, {"kilogram", "kilograms"},
                               {"kg", "kilograms"}, {"kgs", "kilograms"}, {"pound", "pounds"},
                               {"lb", "pounds"}, {"lbs", "pounds"}})
        t.add_alias(alias, name);
    return t;
}

UnitTable UnitTable::from_json(const nlohmann::json& j) {
    UnitTable t;
    try {
        for (const auto& [name, grams] : j.at("mass_units").items())
            t.add_mass_unit(name, grams.get<double>());
        if (j.contains("aliases"))
            for (const auto& [alias, name] : j.at("aliases").items())
                t.add_alias(alias, name.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("unit table: ") + e.what());
    }
    return t;
}

UnitTable UnitTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open unit table " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("unit table " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json UnitTable::to_json() const {
    nlohmann::json j;
    j["mass_units"] = nlohmann::json::object();
    for (const auto& [name, g] : grams_)
        j["mass_units"][name] = g;
    j["aliases"] = nlohmann::json::object();
    for (const auto& [alias, name] : aliases_)
        j["aliases"][alias] = name;
    return j;
}

void UnitTable::add_mass_unit(const std::string& name, double grams_per_unit) {
    if (!(grams_per_unit > 0.0))
        throw ConfigError("unit '" + name + "' needs a positive gram factor");
    grams_[normalize_term(name)] = grams_per_unit;
}

void UnitTable::add_alias(const std::string& alias, const std::string& canonical_name) {
    aliases_[normalize_term(alias)] = normalize_term(canonical_name);
}

std::string UnitTable::canonical(std::string_view unit) const {
    std::string n = normalize_term(unit);
    if (auto it = aliases_.find(n); it != aliases_.end())
        return it->second;
    return n;
}

bool UnitTable::is_mass_unit(std::string_view unit) const {
    return grams_.find(canonical(unit)) != grams_.end();
}

std::optional<double> UnitTable::grams_per_unit(std::string_view unit) const {
    if (auto it = grams_.find(canonical(unit)); it != grams_.end())
        return it->second;
    return std::nullopt;
}

std::optional<double> UnitTable::factor(std::string_view from, std::string_view to) const {
    const std::string a = canonical(from);
    const std::string b = canonical(to);
    if (a == b)
        return 1.0;
    auto ga = grams_.find(a);
    auto gb = grams_.find(b);
    if (ga == grams_.end() || gb == grams_.end())
        return std::nullopt;
    return ga->second / gb->second;
}

std::vector<std::string> UnitTable::mass_units() const {
    std::vector<std::string> out;
    for (const auto& [name, g] : grams_)
        out.push_back(name);
    return out;
}

bool UnitTable::knows(std::string_view unit) const {
    const std::string n = normalize_term(unit);
    return grams_.count(n) > 0 || aliases_.count(n) > 0;
}

} // namespace saltdialog
