#include "saltdialog/templates.hpp"

#include <cctype>
#include <fstream>

#include "saltdialog/errors.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Calls on_literal/on_placeholder for each run of the template.
template <typename Lit, typename Ph>
void scan_template(std::string_view tmpl, Lit on_literal, Ph on_placeholder) {
    std::size_t i = 0;
    std::string literal;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close == std::string_view::npos)
                throw TemplateError("", "unterminated placeholder in template '" + std::string(tmpl) + "'");
            if (!literal.empty()) {
                on_literal(literal);
                literal.clear();
            }
            on_placeholder(to_lower(trim(tmpl.substr(i + 1, close - i - 1))));
            i = close + 1;
        } else {
            literal.push_back(tmpl[i++]);
        }
    }
    if (!literal.empty())
        on_literal(literal);
}

} // namespace

std::vector<std::string> placeholders(std::string_view tmpl) {
    std::vector<std::string> out;
    scan_template(tmpl, [](const std::string&) {}, [&](std::string name) { out.push_back(std::move(name)); });
    return out;
}

std::string render_template(std::string_view tmpl, const Bindings& bindings) {
    std::string out;
    bool first_is_placeholder = false;
    bool first = true;
    scan_template(
        tmpl,
        [&](const std::string& lit) {
            first = false;
            out += lit;
        },
        [&](const std::string& name) {
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw TemplateError(name);
            if (first)
                first_is_placeholder = true;
            first = false;
            out += denormalize_term(it->second);
        });
    if (first_is_placeholder && !out.empty())
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string canonical_utterance(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool space = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'' || c == '_' ||
                    c == '{' || c == '}' || (c & 0x80);
        if (c == '.' && i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) && is_digit(text[i + 1]))
            keep = true;
        if (!keep) {
            space = true;
            continue;
        }
        if (space && !out.empty())
            out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// ---- CompiledTemplate ------------------------------------------------------

CompiledTemplate::CompiledTemplate(std::string_view tmpl) : source_(tmpl) {
    // Canonicalize with placeholders kept intact, then split.
    std::string canon = canonical_utterance(tmpl);
    scan_template(
        canon,
        [&](const std::string& lit) { parts_.push_back({false, lit}); },
        [&](std::string name) {
            names_.push_back(name);
            parts_.push_back({true, std::move(name)});
        });
}

void CompiledTemplate::match_from(const std::string& text, std::size_t part, std::size_t pos, Bindings& current,
                                  std::vector<Bindings>& out, std::size_t max_results) const {
    if (out.size() >= max_results)
        return;
    if (part == parts_.size()) {
        if (pos == text.size())
            out.push_back(current);
        return;
    }
    const Part& p = parts_[part];
    if (!p.placeholder) {
        if (text.compare(pos, p.text.size(), p.text) == 0)
            match_from(text, part + 1, pos + p.text.size(), current, out, max_results);
        return;
    }
    if (pos >= text.size() || text[pos] == ' ')
        return;
    for (std::size_t end = pos + 1; end <= text.size(); ++end) {
        if (end < text.size() && text[end] != ' ')
            continue;
        std::string value = normalize_term(std::string_view(text).substr(pos, end - pos));
        auto existing = current.find(p.text);
        if (existing != current.end() && existing->second != value)
            continue;
        bool inserted = existing == current.end();
        if (inserted)
            current.emplace(p.text, value);
        match_from(text, part + 1, end, current, out, max_results);
        if (inserted)
            current.erase(p.text);
    }
}

std::vector<Bindings> CompiledTemplate::match(std::string_view text, std::size_t max_results) const {
    std::vector<Bindings> out;
    Bindings current;
    match_from(canonical_utterance(text), 0, 0, current, out, max_results);
    return out;
}

// ---- TemplatePack ----------------------------------------------------------

TemplatePack::TemplatePack(std::map<std::string, std::vector<std::string>> categories) {
    for (auto& [k, v] : categories)
        categories_.emplace(k, std::move(v));
}

TemplatePack TemplatePack::builtin() {
    return TemplatePack({
        {"initial",
         {"What is the {nutrient} content in {food}?", "How much {nutrient} in {food}?",
          "What is the {nutrient} content in {cook} {food}?", "How much {nutrient} in {foodWeight} {metric} of {food}?",
          "Can my partner with heart issues eat {food}?", "Is {food} okay for heart patients?"}},
        {"request.cook", {"How is the {food} cooked?", "How was the {food} made?"}},
        {"request.type", {"What type of {food} is it?", "Which kind of {food} is it?"}},
        {"request.animal", {"What animal is the {food} from?"}},
        {"request.part", {"What part of the {food} is it?"}},
        {"request.foodweight", {"How much {food} will you eat?", "How big is your {food} meal?"}},
        {"clarify.cook", {"I found {count} kinds of {food}. How is it cooked?"}},
        {"clarify.type", {"I found {count} kinds of {food}. What type is it?"}},
        {"clarify.animal", {"I found {count} kinds of {food}. What animal is it from?"}},
        {"clarify.part", {"I found {count} kinds of {food}. What part is it?"}},
        {"answer.cook", {"It is {cook}.", "It was {cook}.", "{cook}."}},
        {"answer.type", {"It is {type}.", "The type is {type}."}},
        {"answer.animal", {"It is from {animal}."}},
        {"answer.part", {"It is the {part}."}},
        {"answer.foodweight", {"{foodWeight} {metric}.", "I will eat {foodWeight} {metric}.", "About {foodWeight} {metric}."}},
        {"change.cook", {"Actually, it is {cook}.", "Sorry, I meant {cook}."}},
        {"change.type", {"Actually, the type is {type}."}},
        {"change.animal", {"Actually, it is from {animal}."}},
        {"change.part", {"Actually, it is the {part}."}},
        {"change.foodweight", {"Actually, make it {foodWeight} {metric}."}},
        {"inform", {"{food} has {salt} mg of salt per {foodWeight} {metric}."}},
        {"not_found", {"Sorry, I do not know that food."}},
        {"no_match", {"Sorry, I could not find that kind of {food}."}},
        {"unresolved", {"I found {count} kinds of {food}. I can not tell them apart."}},
        {"unit_mismatch", {"Sorry, I can not measure {food} in {metric}."}},
        {"not_understood", {"Sorry, which food do you mean?"}},
    });
}

TemplatePack TemplatePack::from_json(const nlohmann::json& j) {
    std::map<std::string, std::vector<std::string>> cats;
    try {
        for (const auto& [k, v] : j.items())
            cats[k] = v.get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("template pack: ") + e.what());
    }
    return TemplatePack(std::move(cats));
}

TemplatePack TemplatePack::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open template pack " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("template pack " + path.string() + ": " + e.what());
    }
}

nlohmann::json TemplatePack::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : categories_)
        j[k] = v;
    return j;
}

bool TemplatePack::has(std::string_view category) const {
    auto it = categories_.find(category);
    return it != categories_.end() && !it->second.empty();
}

const std::vector<std::string>& TemplatePack::get(std::string_view category) const {
    auto it = categories_.find(category);
    if (it == categories_.end() || it->second.empty())
        throw TemplateError(std::string(category), "template pack has no category '" + std::string(category) + "'");
    return it->second;
}

} // namespace saltdialog
