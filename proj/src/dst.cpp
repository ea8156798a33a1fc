#include "saltdialog/dst.hpp"

#include <algorithm>
#include <tuple>

#include "saltdialog/errors.hpp"
#include "saltdialog/nscorrect.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

DialogueContext context_of(const Dialogue& d, std::size_t end) {
    DialogueContext ctx;
    end = std::min(end, d.turns.size());
    ctx.reserve(end);
    for (std::size_t i = 0; i < end; ++i)
        ctx.push_back({d.turns[i].speaker, d.turns[i].utterance});
    return ctx;
}

// ---- belief text -------------------------------------------------------------

std::string serialize_belief(const BeliefState& b) {
    std::string out = "[";
    bool first = true;
    auto add = [&](std::string_view key, const std::string& value) {
        if (!first)
            out += "; ";
        first = false;
        out += key;
        out += '=';
        out += value;
    };
    for (Slot s : kAllSlots)
        if (const std::string* v = b.get(s))
            add(to_string(s), *v);
    if (b.salt_value)
        add("value", format_exact(*b.salt_value));
    out += ']';
    return out;
}

ParsedBelief parse_belief_report(std::string_view text) {
    const std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw BeliefParseError("belief must be enclosed in brackets: '" + t + "'");
    ParsedBelief out;
    for (const std::string& raw_item : split(std::string_view(t).substr(1, t.size() - 2), ';')) {
        const std::string item = trim(raw_item);
        if (item.empty())
            continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw BeliefParseError("expected slot=value, got '" + item + "'");
        const std::string key = to_lower(trim(std::string_view(item).substr(0, eq)));
        const std::string value = trim(std::string_view(item).substr(eq + 1));
        if (key.empty() || value.empty())
            throw BeliefParseError("empty slot name or value in '" + item + "'");
        if (key == "value") {
            auto v = parse_double(value);
            if (!v || *v < 0.0)
                throw BeliefParseError("salt value '" + value + "' is not a non-negative number");
            out.belief.salt_value = *v;
        } else if (auto s = slot_from_string(key)) {
            std::string norm = normalize_term(value);
            if (norm.empty())
                throw BeliefParseError("empty value for slot '" + key + "'");
            out.belief.slots[*s] = std::move(norm);
        } else {
            out.warnings.push_back("ignored unknown slot '" + key + "'");
        }
    }
    return out;
}

BeliefState parse_belief(std::string_view text) { return parse_belief_report(text).belief; }

// ---- reference tracker ---------------------------------------------------------

struct ReferenceTracker::Candidate {
    BeliefState belief;
    bool requested_hit = false;
    int unknown = 0;
    int fuzzy = 0;
    std::size_t order = 0;

    // Larger is better.
    auto rank() const {
        return std::make_tuple(requested_hit, -unknown, -fuzzy, belief.slots.size(), -static_cast<long>(order));
    }
};

namespace {

std::vector<std::string> tokens_of(std::string_view normalized) {
    std::vector<std::string> out;
    for (auto& t : split(normalized, '_'))
        if (!t.empty())
            out.push_back(t);
    return out;
}

bool contains_all(const std::vector<std::string>& hay, const std::vector<std::string>& needles) {
    return std::all_of(needles.begin(), needles.end(),
                       [&](const std::string& n) { return std::find(hay.begin(), hay.end(), n) != hay.end(); });
}

bool user_category(const std::string& cat) {
    return cat == "initial" || cat.rfind("answer.", 0) == 0 || cat.rfind("change.", 0) == 0;
}

} // namespace

ReferenceTracker::ReferenceTracker(const KnowledgeBase& kb, const TemplatePack& pack, const UnitTable& units)
    : kb_(kb), units_(units) {
    std::size_t order = 0;
    for (const auto& [cat, templates] : pack.categories()) {
        if (user_category(cat)) {
            for (const auto& t : templates)
                user_templates_.push_back({CompiledTemplate(t), order++});
            continue;
        }
        for (const char* prefix : {"request.", "clarify."}) {
            if (cat.rfind(prefix, 0) != 0)
                continue;
            auto slot = slot_from_string(std::string_view(cat).substr(std::string_view(prefix).size()));
            if (!slot)
                continue;
            for (const auto& t : templates)
                request_templates_.emplace_back(*slot, CompiledTemplate(t));
        }
    }
}

std::optional<std::string> ReferenceTracker::valid_metric(const std::string& value) const {
    if (units_.knows(value))
        return units_.canonical(value);
    for (const auto& r : kb_.records())
        if (units_.canonical(r.serving_metric) == units_.canonical(value))
            return units_.canonical(value);
    return std::nullopt;
}

std::optional<ReferenceTracker::Candidate> ReferenceTracker::bind(const Bindings& b, std::size_t order,
                                                                  std::optional<Slot> requested) const {
    Candidate c;
    c.order = order;
    for (const auto& [name, value] : b) {
        if (name == "nutrient") {
            if (value != "salt" && value != "sodium")
                return std::nullopt;
            continue;
        }
        auto slot = slot_from_string(name);
        if (!slot)
            return std::nullopt;
        if (*slot == Slot::foodweight) {
            auto w = parse_double(value);
            if (!w || *w <= 0.0)
                return std::nullopt;
            c.belief.slots[*slot] = format_exact(*w);
        } else if (*slot == Slot::metric) {
            auto m = valid_metric(value);
            if (!m)
                return std::nullopt;
            c.belief.slots[*slot] = *m;
        } else if (*slot == Slot::food) {
            const auto& vocab = kb_.vocabulary(Relation::food);
            if (std::binary_search(vocab.begin(), vocab.end(), value)) {
                c.belief.slots[*slot] = value;
                continue;
            }
            // "pork chops" still names pork when exactly one known food fits.
            const auto words = tokens_of(value);
            const std::string* hit = nullptr;
            int hits = 0;
            for (const auto& known : vocab)
                if (contains_all(words, tokens_of(known)))
                    hit = &known, ++hits;
            if (hits == 1) {
                c.belief.slots[*slot] = *hit;
                ++c.fuzzy;
            } else {
                c.belief.slots[*slot] = value;
                ++c.unknown;
            }
        } else {
            const auto& vocab = kb_.vocabulary(*relation_of(*slot));
            if (!std::binary_search(vocab.begin(), vocab.end(), value))
                return std::nullopt;
            c.belief.slots[*slot] = value;
        }
    }
    c.requested_hit = requested && c.belief.has(*requested);
    return c;
}

BeliefState ReferenceTracker::scan_mentions(std::string_view text) const {
    std::vector<std::string> words;
    for (auto& w : split(canonical_utterance(text), ' '))
        if (!w.empty())
            words.push_back(normalize_term(w));

    struct Mention {
        std::size_t start, len;
        Slot slot;
        const std::string* value;
    };
    std::vector<Mention> mentions;
    for (Relation rel : kAllRelations) {
        for (const auto& v : kb_.vocabulary(rel)) {
            const auto needle = tokens_of(v);
            if (needle.empty() || needle.size() > words.size())
                continue;
            for (std::size_t i = 0; i + needle.size() <= words.size(); ++i)
                if (std::equal(needle.begin(), needle.end(), words.begin() + static_cast<long>(i)))
                    mentions.push_back({i, needle.size(), slot_of(rel), &v});
        }
    }
    std::sort(mentions.begin(), mentions.end(), [](const Mention& a, const Mention& b) {
        return a.len != b.len ? a.len > b.len : a.start < b.start;
    });
    std::vector<bool> taken(words.size(), false);
    std::vector<Mention> kept;
    for (const auto& m : mentions) {
        if (std::any_of(taken.begin() + static_cast<long>(m.start), taken.begin() + static_cast<long>(m.start + m.len),
                        [](bool t) { return t; }))
            continue;
        std::fill(taken.begin() + static_cast<long>(m.start), taken.begin() + static_cast<long>(m.start + m.len), true);
        kept.push_back(m);
    }
    std::sort(kept.begin(), kept.end(), [](const Mention& a, const Mention& b) { return a.start < b.start; });

    BeliefState out;
    for (const auto& m : kept)
        out.slots[m.slot] = *m.value;
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        auto w = parse_double(words[i]);
        auto unit = valid_metric(words[i + 1]);
        if (w && *w > 0.0 && unit) {
            out.slots[Slot::foodweight] = format_exact(*w);
            out.slots[Slot::metric] = *unit;
        }
    }
    return out;
}

BeliefState ReferenceTracker::read_utterance(std::string_view text, std::optional<Slot> requested) const {
    std::optional<Candidate> best;
    for (const auto& e : user_templates_) {
        for (const auto& b : e.tmpl.match(text)) {
            auto c = bind(b, e.order, requested);
            if (c && (!best || c->rank() > best->rank()))
                best = std::move(c);
        }
    }
    if (best && best->unknown == 0 && best->fuzzy == 0)
        return best->belief;

    // Free text: keep what the template bound and add any vocabulary mentions.
    BeliefState out = scan_mentions(text);
    if (best)
        for (const auto& [slot, value] : best->belief.slots)
            if (!(slot == Slot::food && out.has(Slot::food)))
                out.slots[slot] = value;
    return out;
}

std::optional<Slot> ReferenceTracker::requested_slot(std::string_view system_text) const {
    for (const auto& [slot, tmpl] : request_templates_)
        if (!tmpl.match(system_text, 1).empty())
            return slot;
    return std::nullopt;
}

BeliefState ReferenceTracker::track(const DialogueContext& context) const {
    BeliefState belief;
    std::optional<Slot> requested;
    for (const auto& turn : context) {
        if (turn.speaker == Speaker::system) {
            requested = requested_slot(turn.text);
            continue;
        }
        for (auto& [slot, value] : read_utterance(turn.text, requested).slots)
            belief.slots[slot] = std::move(value);
        requested.reset();
    }
    return belief;
}

BeliefState reference_track(const DialogueContext& context, const KnowledgeBase& kb, const TemplatePack& pack,
                            const UnitTable& units) {
    return ReferenceTracker(kb, pack, units).track(context);
}

// ---- corruption ------------------------------------------------------------------

void CorruptionConfig::validate() const {
    auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!ok(salt_corrupt_prob) || !ok(slot_corrupt_prob))
        throw ConfigError("corruption probabilities must lie in [0, 1]");
}

BeliefState corrupting_predict(const BeliefState& gold, const CorruptionConfig& cfg, const KnowledgeBase& kb,
                               Rng& rng) {
    BeliefState out = gold;
    if (gold.salt_value && rng.bernoulli(cfg.salt_corrupt_prob)) {
        const double g = *gold.salt_value;
        double v;
        do {
            v = static_cast<double>(rng.between(1, 200));
        } while (std::abs(v - g) <= 0.005 * std::abs(g));
        out.salt_value = v;
    }
    for (Relation rel : kAllRelations) {
        const Slot s = slot_of(rel);
        const std::string* current = gold.get(s);
        if (!current || !rng.bernoulli(cfg.slot_corrupt_prob))
            continue;
        std::vector<const std::string*> alternatives;
        for (const auto& v : kb.vocabulary(rel))
            if (v != *current)
                alternatives.push_back(&v);
        if (!alternatives.empty())
            out.slots[s] = *rng.pick(alternatives);
    }
    return out;
}

std::uint64_t context_hash(const DialogueContext& context) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& t : context) {
        mix(t.speaker == Speaker::user ? 'u' : 's');
        for (char c : t.text)
            mix(static_cast<unsigned char>(c));
        mix(0);
    }
    return h;
}

CorruptingPredictor::CorruptingPredictor(ReferenceTracker tracker, const KnowledgeBase& kb, const UnitTable& units,
                                         CorruptionConfig cfg)
    : tracker_(std::move(tracker)), kb_(kb), units_(units), cfg_(cfg) {
    cfg_.validate();
}

BeliefState CorruptingPredictor::predict(const DialogueContext& context) const {
    BeliefState gold = tracker_.track(context);
    if (gold.has(Slot::food)) {
        auto outcome = correct(gold, kb_, units_);
        if (outcome.resolved())
            gold.salt_value = outcome.belief.salt_value;
    }
    Rng rng(derive_seed(cfg_.seed, context_hash(context)));
    return corrupting_predict(gold, cfg_, kb_, rng);
}

// ---- wire format -------------------------------------------------------------------

nlohmann::json request_to_json(const PredictorRequest& r) {
    nlohmann::json ctx = nlohmann::json::array();
    for (const auto& t : r.context)
        ctx.push_back({std::string(to_string(t.speaker)), t.text});
    return {{"prompt", r.prompt}, {"context", ctx}};
}

PredictorRequest request_from_json(const nlohmann::json& j) {
    PredictorRequest r;
    try {
        r.prompt = j.at("prompt").get<std::string>();
        for (const auto& item : j.at("context")) {
            if (!item.is_array() || item.size() != 2)
                throw BeliefParseError("context items must be [speaker, text] pairs");
            auto sp = speaker_from_string(item[0].get<std::string>());
            if (!sp)
                throw BeliefParseError("unknown speaker in context");
            r.context.push_back({*sp, item[1].get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw BeliefParseError(std::string("malformed predictor request: ") + e.what());
    }
    return r;
}

BeliefState RemotePredictor::predict(const DialogueContext& context) const {
    PredictorRequest req;
    req.context = context;
    return parse_belief(remote_predict(cfg_, req).belief);
}

} // namespace saltdialog
