#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "saltdialog/errors.hpp"
#include "saltdialog/templates.hpp"

using namespace saltdialog;

TEST(Placeholders, InOrderAndLowercased) {
    EXPECT_EQ(placeholders("{foodWeight} {metric} of {food}"),
              (std::vector<std::string>{"foodweight", "metric", "food"}));
    EXPECT_TRUE(placeholders("no slots here").empty());
    EXPECT_THROW(placeholders("broken {food"), TemplateError);
}

TEST(RenderTemplate, SubstitutesAndCapitalizes) {
    EXPECT_EQ(render_template("How is the {food} cooked?", {{"food", "pork"}}), "How is the pork cooked?");
    EXPECT_EQ(render_template("{cook}.", {{"cook", "pan_fried"}}), "Pan fried.");
    EXPECT_EQ(render_template("{food} has {salt} mg", {{"food", "pork"}, {"salt", "48"}}), "Pork has 48 mg");
    EXPECT_EQ(render_template("I will eat {foodWeight} {metric}.", {{"foodweight", "3"}, {"metric", "ounces"}}),
              "I will eat 3 ounces.");
}

TEST(RenderTemplate, UnboundPlaceholderIsNamed) {
    try {
        render_template("{food} has {salt} mg", {{"food", "pork"}});
        FAIL() << "expected TemplateError";
    } catch (const TemplateError& e) {
        EXPECT_EQ(e.placeholder, "salt");
    }
}

TEST(CanonicalUtterance, DropsPunctuationKeepsDecimals) {
    EXPECT_EQ(canonical_utterance("  Actually, it is BOILED!  "), "actually it is boiled");
    EXPECT_EQ(canonical_utterance("About 40.5 grams."), "about 40.5 grams");
    EXPECT_EQ(canonical_utterance("Bone-in, top loin (chops)"), "bone-in top loin chops");
}

TEST(MatchTemplate, RecoversBindings) {
    auto m = match_template("It is {cook}.", "it is pan fried");
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].at("cook"), "pan_fried");

    auto w = match_template("{foodWeight} {metric}.", "200 Grams.");
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].at("foodweight"), "200");
    EXPECT_EQ(w[0].at("metric"), "grams");

    EXPECT_TRUE(match_template("It is {cook}.", "it was boiled").empty());
    EXPECT_TRUE(match_template("It is {cook}.", "it is").empty());
}

TEST(MatchTemplate, EnumeratesAmbiguousSplits) {
    auto m = match_template("{a} {b}", "x y z");
    EXPECT_EQ(m.size(), 2u);
}

TEST(MatchTemplate, RepeatedPlaceholderMustAgree) {
    EXPECT_EQ(match_template("{x} and {x}", "a and a").size(), 1u);
    EXPECT_TRUE(match_template("{x} and {x}", "a and b").empty());
}

// Rendering then matching any builtin template returns the bindings it used.
TEST(MatchTemplate, InvertsRenderForBuiltinPack) {
    const Bindings values{{"food", "pork"},  {"cook", "pan_fried"}, {"type", "top_loin"}, {"animal", "pig"},
                          {"part", "loin"},  {"foodweight", "150"}, {"metric", "grams"},  {"salt", "48.5"},
                          {"count", "3"},    {"nutrient", "salt"}};
    const auto pack = TemplatePack::builtin();
    for (const auto& [category, templates] : pack.categories()) {
        for (const auto& t : templates) {
            const std::string text = render_template(t, values);
            const auto matches = match_template(t, text);
            Bindings expected;
            for (const auto& name : placeholders(t))
                expected[name] = values.at(name);
            EXPECT_NE(std::find(matches.begin(), matches.end(), expected), matches.end())
                << category << ": " << t << " -> " << text;
        }
    }
}

TEST(TemplatePack, BuiltinHasEveryCategory) {
    const auto pack = TemplatePack::builtin();
    for (const char* c : {"initial", "inform", "not_found", "no_match", "unresolved", "unit_mismatch",
                          "not_understood"})
        EXPECT_TRUE(pack.has(c)) << c;
    for (const char* slot : {"cook", "type", "animal", "part"})
        for (const char* prefix : {"request.", "clarify.", "answer.", "change."})
            EXPECT_TRUE(pack.has(std::string(prefix) + slot)) << prefix << slot;
    EXPECT_TRUE(pack.has("request.foodweight"));
    EXPECT_TRUE(pack.has("answer.foodweight"));
    EXPECT_THROW(pack.get("nope"), TemplateError);
}

TEST(TemplatePack, JsonRoundTripAndShippedFile) {
    const auto pack = TemplatePack::builtin();
    EXPECT_EQ(TemplatePack::from_json(pack.to_json()).categories(), pack.categories());
    EXPECT_EQ(TemplatePack::load(fixtures::data("templates.json")).categories(), pack.categories());
    EXPECT_THROW(TemplatePack::from_json({{"inform", 3}}), ConfigError);
}
