#pragma once
// Surface templates with {placeholder} slots, used in both directions:
// rendering system and user utterances, and matching user text back into
// placeholder bindings for the reference tracker.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace saltdialog {

// Placeholder name (lowercase) -> normalized value.
using Bindings = std::map<std::string, std::string>;

// Placeholder names in order of appearance, lowercased.
std::vector<std::string> placeholders(std::string_view tmpl);

// Substitutes every placeholder with its de-normalized binding and
// capitalizes a sentence-initial substitution. Throws TemplateError naming
// the first unbound placeholder. Placeholder lookup is case-insensitive.
std::string render_template(std::string_view tmpl, const Bindings& bindings);

// Lowercased text with punctuation dropped (a '.' between digits is kept)
// and whitespace collapsed; the form both sides are compared in.
std::string canonical_utterance(std::string_view text);

// A template pre-split into literal runs and placeholders.
class CompiledTemplate {
public:
    explicit CompiledTemplate(std::string_view tmpl);

    // Every way the canonical text can be split into the template's literals
    // and non-empty, word-aligned placeholder values (values normalized).
    std::vector<Bindings> match(std::string_view text, std::size_t max_results = 64) const;

    const std::string& source() const { return source_; }
    const std::vector<std::string>& names() const { return names_; }

private:
    struct Part {
        bool placeholder;
        std::string text;
    };
    void match_from(const std::string& text, std::size_t part, std::size_t pos, Bindings& current,
                    std::vector<Bindings>& out, std::size_t max_results) const;

    std::string source_;
    std::vector<Part> parts_;
    std::vector<std::string> names_;
};

inline std::vector<Bindings> match_template(std::string_view tmpl, std::string_view text) {
    return CompiledTemplate(tmpl).match(text);
}

// Category -> list of templates. Categories in use:
//   initial, request.<slot>, clarify.<slot>, answer.<slot>, change.<slot>,
//   inform, not_found, no_match, unresolved, unit_mismatch, not_understood
// where <slot> is cook, type, animal, part or foodweight.
class TemplatePack {
public:
    TemplatePack() = default;
    explicit TemplatePack(std::map<std::string, std::vector<std::string>> categories);

    static TemplatePack builtin();
    static TemplatePack from_json(const nlohmann::json& j);
    static TemplatePack load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    bool has(std::string_view category) const;
    // Throws TemplateError if the category is missing or empty.
    const std::vector<std::string>& get(std::string_view category) const;

    const std::map<std::string, std::vector<std::string>, std::less<>>& categories() const { return categories_; }

private:
    std::map<std::string, std::vector<std::string>, std::less<>> categories_;
};

} // namespace saltdialog
