#include "saltdialog/belief.hpp"

#include "saltdialog/text.hpp"

namespace saltdialog {

namespace {
constexpr std::array<std::string_view, 7> kSlotNames{"food", "cook",       "type",  "animal",
                                                     "part", "foodweight", "metric"};
}

std::string_view to_string(Slot s) { return kSlotNames[static_cast<std::size_t>(s)]; }

std::optional<Slot> slot_from_string(std::string_view s) {
    const std::string n = to_lower(trim(s));
    for (std::size_t i = 0; i < kSlotNames.size(); ++i)
        if (kSlotNames[i] == n)
            return kAllSlots[i];
    return std::nullopt;
}

std::optional<Relation> relation_of(Slot s) {
    switch (s) {
    case Slot::food: return Relation::food;
    case Slot::cook: return Relation::cook;
    case Slot::type: return Relation::type;
    case Slot::animal: return Relation::animal;
    case Slot::part: return Relation::part;
    default: return std::nullopt;
    }
}

Slot slot_of(Relation r) {
    switch (r) {
    case Relation::food: return Slot::food;
    case Relation::cook: return Slot::cook;
    case Relation::type: return Slot::type;
    case Relation::animal: return Slot::animal;
    case Relation::part: return Slot::part;
    }
    return Slot::food;
}

const std::string* BeliefState::get(Slot s) const {
    auto it = slots.find(s);
    return it == slots.end() ? nullptr : &it->second;
}

SlotMap BeliefState::relation_slots() const {
    SlotMap out;
    for (const auto& [slot, value] : slots)
        if (auto r = relation_of(slot))
            out[*r] = value;
    return out;
}

bool same_belief(const BeliefState& a, const BeliefState& b, bool include_salt) {
    if (a.slots != b.slots)
        return false;
    if (!include_salt)
        return true;
    if (a.salt_value.has_value() != b.salt_value.has_value())
        return false;
    return !a.salt_value || round_presentation(*a.salt_value) == round_presentation(*b.salt_value);
}

} // namespace saltdialog
