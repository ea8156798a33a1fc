#include <gtest/gtest.h>

#include <cmath>

#include "saltdialog/errors.hpp"
#include "saltdialog/rng.hpp"
#include "saltdialog/text.hpp"
#include "saltdialog/units.hpp"

using namespace saltdialog;

TEST(NormalizeTerm, LowercasesAndJoinsWithUnderscores) {
    EXPECT_EQ(normalize_term("Top Loin (chops)"), "top_loin_chops");
    EXPECT_EQ(normalize_term("  separable   lean and fat "), "separable_lean_and_fat");
    EXPECT_EQ(normalize_term("bone-in"), "bone-in");
    EXPECT_EQ(normalize_term("(chops)"), "chops");
    EXPECT_EQ(normalize_term("__a__b__"), "a_b");
    EXPECT_EQ(normalize_term("   "), "");
}

TEST(NormalizeTerm, IsIdempotent) {
    for (const char* s : {"Pork", "top loin (chops)", "a  b", "x_y", "Bone-In"}) {
        const std::string once = normalize_term(s);
        EXPECT_EQ(normalize_term(once), once);
        EXPECT_TRUE(is_normalized_term(once));
    }
    EXPECT_FALSE(is_normalized_term("Pork"));
    EXPECT_FALSE(is_normalized_term("_pork"));
    EXPECT_FALSE(is_normalized_term("top loin"));
}

TEST(NumberFormatting, ExactRoundTripsAndPresentationRounds) {
    EXPECT_EQ(format_exact(100.0), "100");
    EXPECT_EQ(format_exact(40.82328), "40.82328");
    EXPECT_EQ(parse_double(format_exact(0.1 + 0.2)).value(), 0.1 + 0.2);
    EXPECT_EQ(format_presentation(40.82328), "40.82");
    EXPECT_EQ(format_presentation(48.0), "48");
    EXPECT_EQ(format_presentation(12.5), "12.5");
    EXPECT_DOUBLE_EQ(round_presentation(6055.4532), 6055.45);
}

TEST(ParseDouble, IsStrict) {
    EXPECT_EQ(parse_double("12.5").value(), 12.5);
    EXPECT_EQ(parse_double(" 7 ").value(), 7.0);
    EXPECT_FALSE(parse_double("12g"));
    EXPECT_FALSE(parse_double(""));
    EXPECT_FALSE(parse_double("nan"));
    EXPECT_FALSE(parse_double("inf"));
}

TEST(UnitTable, DefaultsConvertThroughGrams) {
    const auto u = UnitTable::defaults();
    EXPECT_EQ(u.factor("grams", "grams").value(), 1.0);
    EXPECT_DOUBLE_EQ(u.factor("ounces", "grams").value(), 28.3495);
    EXPECT_DOUBLE_EQ(u.factor("pounds", "grams").value(), 453.592);
    EXPECT_DOUBLE_EQ(u.factor("kilograms", "grams").value(), 1000.0);
    EXPECT_EQ(u.canonical("oz"), "ounces");
    EXPECT_EQ(u.canonical("Gram"), "grams");
    EXPECT_TRUE(u.knows("lbs"));
    EXPECT_FALSE(u.knows("packet"));
}

TEST(UnitTable, CountUnitsOnlyConvertToThemselves) {
    const auto u = UnitTable::defaults();
    EXPECT_EQ(u.factor("packet", "packet").value(), 1.0);
    EXPECT_FALSE(u.factor("packet", "grams"));
    EXPECT_FALSE(u.factor("grams", "slice"));
}

TEST(UnitTable, FactorsAreReciprocal) {
    const auto u = UnitTable::defaults();
    for (const auto& a : u.mass_units())
        for (const auto& b : u.mass_units()) {
            const double f = *u.factor(a, b) * *u.factor(b, a);
            EXPECT_NEAR(f, 1.0, 1e-12) << a << " " << b;
        }
}

TEST(UnitTable, JsonRoundTripAndValidation) {
    const auto u = UnitTable::defaults();
    const auto back = UnitTable::from_json(u.to_json());
    EXPECT_EQ(back.mass_units(), u.mass_units());
    EXPECT_EQ(back.canonical("lb"), "pounds");
    EXPECT_THROW(UnitTable::from_json({{"mass_units", {{"grams", -1}}}}), ConfigError);
    EXPECT_THROW(UnitTable::from_json({{"aliases", {}}}), ConfigError);
}

TEST(Rng, DerivedStreamsAreDeterministicAndDistinct) {
    Rng a(derive_seed(7, 0)), b(derive_seed(7, 0)), c(derive_seed(7, 1));
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
    Rng r(1);
    std::array<int, 5> seen{};
    for (int i = 0; i < 1000; ++i) {
        auto v = r.below(5);
        ASSERT_LT(v, 5u);
        ++seen[v];
    }
    for (int s : seen)
        EXPECT_GT(s, 150);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}
