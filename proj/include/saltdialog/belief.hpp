#pragma once
// Dialogue-state vocabulary shared by generation, tracking, correction and
// evaluation.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "saltdialog/food_kb.hpp"

namespace saltdialog {

enum class Slot { food, cook, type, animal, part, foodweight, metric };

inline constexpr std::array<Slot, 7> kAllSlots{Slot::food,   Slot::cook,       Slot::type,  Slot::animal,
                                               Slot::part,   Slot::foodweight, Slot::metric};

std::string_view to_string(Slot s);
std::optional<Slot> slot_from_string(std::string_view s);

std::optional<Relation> relation_of(Slot s);
Slot slot_of(Relation r);

struct BeliefState {
    // Values are normalized terms; foodweight holds a decimal number.
    std::map<Slot, std::string> slots;
    std::optional<double> salt_value;

    bool has(Slot s) const { return slots.count(s) > 0; }
    const std::string* get(Slot s) const;
    bool empty() const { return slots.empty() && !salt_value; }

    // Relation slots only, as a knowledge-base lookup constraint.
    SlotMap relation_slots() const;

    bool operator==(const BeliefState&) const = default;
};

// Equal slot maps and salt values equal after presentation rounding.
bool same_belief(const BeliefState& a, const BeliefState& b, bool include_salt = true);

} // namespace saltdialog
