#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace saltdialog {

// Mass units convert through their gram equivalents; any other unit name
// (packet, slice, ...) is a count unit that only converts to itself.
class UnitTable {
public:
    UnitTable() = default;

    // grams, ounces (28.3495 g), kilograms, pounds (453.592 g) plus the
    // usual singular and abbreviated aliases.
    static UnitTable defaults();

    // {"mass_units": {"grams": 1, ...}, "aliases": {"g": "grams", ...}}
    static UnitTable from_json(const nlohmann::json& j);
    static UnitTable load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    void add_mass_unit(const std::string& name, double grams_per_unit);
    void add_alias(const std::string& alias, const std::string& canonical_name);

    // Normalized, alias-resolved unit name. Unknown names come back normalized.
    std::string canonical(std::string_view unit) const;

    bool is_mass_unit(std::string_view unit) const;
    std::optional<double> grams_per_unit(std::string_view unit) const;

    // Multiplicative factor taking an amount in `from` to an amount in `to`.
    std::optional<double> factor(std::string_view from, std::string_view to) const;

    // Canonical names of all mass units, sorted.
    std::vector<std::string> mass_units() const;

    // True when `unit` names a mass unit or one of its aliases.
    bool knows(std::string_view unit) const;

private:
    std::map<std::string, double, std::less<>> grams_;
    std::map<std::string, std::string, std::less<>> aliases_;
};

} // namespace saltdialog
