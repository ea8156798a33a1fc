#include "saltdialog/convgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "saltdialog/errors.hpp"
#include "saltdialog/nscorrect.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

namespace {

constexpr std::string_view kRawCook = "raw";

std::string category(std::string_view prefix, Slot s) {
    return std::string(prefix) + "." + std::string(to_string(s));
}

std::string dialogue_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "dlg-%06zu", index + 1);
    return buf;
}

bool bindable(const std::string& tmpl, const Bindings& b) {
    auto names = placeholders(tmpl);
    return std::all_of(names.begin(), names.end(), [&](const std::string& n) { return b.count(n) > 0; });
}

} // namespace

std::string_view to_string(Speaker s) { return s == Speaker::user ? "user" : "system"; }

std::string_view to_string(TurnType t) {
    switch (t) {
    case TurnType::initial: return "initial";
    case TurnType::matching: return "matching";
    case TurnType::random: return "random";
    case TurnType::changing: return "changing";
    }
    return "matching";
}

std::optional<Speaker> speaker_from_string(std::string_view s) {
    if (s == "user")
        return Speaker::user;
    if (s == "system")
        return Speaker::system;
    return std::nullopt;
}

std::optional<TurnType> turn_type_from_string(std::string_view s) {
    for (TurnType t : {TurnType::initial, TurnType::matching, TurnType::random, TurnType::changing})
        if (to_string(t) == s)
            return t;
    return std::nullopt;
}

void GenConfig::validate() const {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(random_turn_rate) || !rate_ok(changing_turn_rate) || !rate_ok(standard_weight_prob))
        throw ConfigError("rates must lie in [0, 1]");
    if (random_turn_rate + changing_turn_rate > 1.0)
        throw ConfigError("random and changing rates sum above 1");
    if (n_dialogues < 1)
        throw ConfigError("n_dialogues must be at least 1");
    if (max_questions < 1)
        throw ConfigError("max_questions must be at least 1");
    if (min_weight < 1 || max_weight <= min_weight)
        throw ConfigError("weight range must satisfy 1 <= min < max");
}

nlohmann::json CorpusStats::to_json() const {
    return {{"dialogues", dialogues},
            {"total_turns", total_turns},
            {"avg_turns", avg_turns},
            {"slot_count", slot_count},
            {"user_reply_turns", user_reply_turns},
            {"random_turns", random_turns},
            {"random_eligible", random_eligible},
            {"changing_turns", changing_turns},
            {"changing_eligible", changing_eligible}};
}

std::vector<Slot> applicable_slots(const FoodRecord& record) {
    std::vector<Slot> out;
    for (Relation rel : {Relation::cook, Relation::type, Relation::animal, Relation::part}) {
        auto it = record.slots.find(rel);
        if (it == record.slots.end())
            continue;
        if (rel == Relation::cook && it->second == kRawCook)
            continue;
        out.push_back(slot_of(rel));
    }
    out.push_back(Slot::foodweight);
    return out;
}

SystemAction next_system_action(const FoodRecord& goal_record, const Goal& goal, const BeliefState& filled,
                                std::span<const Slot> asked, int max_questions, Rng& rng) {
    std::vector<Slot> pending;
    for (Slot s : applicable_slots(goal_record))
        if (!filled.has(s))
            pending.push_back(s);
    if (pending.empty() || asked.size() >= static_cast<std::size_t>(max_questions))
        return SystemAction::inform(format_presentation(goal.salt_mg));
    return SystemAction::request(rng.pick(pending));
}

// ---- DialogueGenerator ----------------------------------------------------

DialogueGenerator::DialogueGenerator(const KnowledgeBase& kb, const UnitTable& units, const TemplatePack& pack,
                                     GenConfig config)
    : kb_(kb), units_(units), pack_(pack), config_(std::move(config)) {
    config_.validate();
}

Bindings DialogueGenerator::bindings_for(const GoalState& goal) const {
    Bindings b{{"nutrient", "salt"}};
    for (const auto& [rel, value] : goal.record->slots)
        b[std::string(to_string(slot_of(rel)))] = value;
    b["foodweight"] = format_exact(goal.weight);
    b["metric"] = goal.metric;
    return b;
}

std::string DialogueGenerator::render_random(std::string_view cat, const Bindings& bindings, Rng& rng) const {
    const auto& options = pack_.get(cat);
    return render_template(options[rng.below(options.size())], bindings);
}

BeliefState DialogueGenerator::annotate(BeliefState b) const {
    b.salt_value.reset();
    auto outcome = correct(b, kb_, units_);
    if (outcome.resolved())
        b.salt_value = outcome.belief.salt_value;
    return b;
}

bool DialogueGenerator::random_possible(Slot requested, const GoalState& goal, const BeliefState& filled) const {
    for (Slot s : applicable_slots(*goal.record))
        if (s != requested && !filled.has(s))
            return true;
    return false;
}

std::vector<DialogueGenerator::Change> DialogueGenerator::possible_changes(const GoalState& goal,
                                                                           const BeliefState& filled) const {
    std::vector<Change> out;
    if (filled.has(Slot::foodweight))
        out.push_back({Slot::foodweight, nullptr});
    const SlotMap said = filled.relation_slots();
    const std::string* metric = filled.get(Slot::metric);
    auto same_food = kb_.lookup({{Relation::food, goal.record->slots.at(Relation::food)}});
    for (const auto& [rel, value] : said) {
        if (rel == Relation::food)
            continue;
        for (const FoodRecord* alt : same_food) {
            if (alt == goal.record)
                continue;
            auto it = alt->slots.find(rel);
            if (it == alt->slots.end() || it->second == value)
                continue;
            bool consistent = std::all_of(said.begin(), said.end(), [&](const auto& other) {
                if (other.first == rel)
                    return true;
                auto jt = alt->slots.find(other.first);
                return jt != alt->slots.end() && jt->second == other.second;
            });
            if (consistent && metric && !convertible(*alt, *metric, units_))
                consistent = false;
            if (consistent)
                out.push_back({slot_of(rel), alt});
        }
    }
    return out;
}

bool DialogueGenerator::change_possible(const GoalState& goal, const BeliefState& filled) const {
    return !possible_changes(goal, filled).empty();
}

UserReply DialogueGenerator::sample_user_reply(Slot requested, GoalState& goal, TurnType turn_type,
                                               const BeliefState& filled, Rng& rng) const {
    UserReply reply;
    Slot answered = requested;

    if (turn_type == TurnType::changing) {
        auto changes = possible_changes(goal, filled);
        if (!changes.empty()) {
            const Change& c = changes[rng.below(changes.size())];
            Bindings b = bindings_for(goal);
            if (c.slot == Slot::foodweight) {
                const double current = parse_double(*filled.get(Slot::foodweight)).value_or(0.0);
                double w;
                do {
                    w = static_cast<double>(rng.between(config_.min_weight, config_.max_weight));
                } while (w == current);
                goal.weight = w;
                goal.metric = *filled.get(Slot::metric);
                goal.wants_standard = false;
                b["foodweight"] = format_exact(w);
                b["metric"] = goal.metric;
                reply.delta.slots[Slot::foodweight] = b["foodweight"];
                reply.delta.slots[Slot::metric] = goal.metric;
            } else {
                goal.record = c.record;
                if (!filled.has(Slot::foodweight)) {
                    if (goal.wants_standard || !convertible(*c.record, goal.metric, units_)) {
                        goal.weight = c.record->serving_weight;
                        goal.metric = c.record->serving_metric;
                        goal.wants_standard = true;
                    }
                }
                const std::string& value = c.record->slots.at(*relation_of(c.slot));
                b[std::string(to_string(c.slot))] = value;
                reply.delta.slots[c.slot] = value;
            }
            reply.utterance = render_random(category("change", c.slot), b, rng);
            reply.turn_type = TurnType::changing;
            return reply;
        }
    } else if (turn_type == TurnType::random) {
        std::vector<Slot> others;
        for (Slot s : applicable_slots(*goal.record))
            if (s != requested && !filled.has(s))
                others.push_back(s);
        if (!others.empty()) {
            answered = rng.pick(others);
            reply.turn_type = TurnType::random;
        }
    }

    const Bindings b = bindings_for(goal);
    if (answered == Slot::foodweight) {
        reply.delta.slots[Slot::foodweight] = b.at("foodweight");
        reply.delta.slots[Slot::metric] = b.at("metric");
    } else {
        auto it = b.find(std::string(to_string(answered)));
        if (it == b.end())
            throw TemplateError(std::string(to_string(answered)), "goal record has no value for the requested slot");
        reply.delta.slots[answered] = it->second;
    }
    reply.utterance = render_random(category("answer", answered), b, rng);
    return reply;
}

Dialogue DialogueGenerator::generate_dialogue(Rng& rng, std::string id, CorpusStats* stats) const {
    if (kb_.empty())
        throw ConfigError("cannot generate dialogues from an empty knowledge base");

    GoalState goal;
    goal.record = &kb_.records()[rng.below(kb_.size())];
    goal.wants_standard = rng.uniform() < config_.standard_weight_prob;
    goal.weight = goal.record->serving_weight;
    goal.metric = goal.record->serving_metric;
    if (!goal.wants_standard) {
        std::vector<std::string> metrics{goal.record->serving_metric};
        for (const char* m : {"grams", "ounces"})
            if (units_.canonical(m) != metrics.front() && convertible(*goal.record, m, units_))
                metrics.push_back(units_.canonical(m));
        goal.metric = rng.pick(metrics);
        goal.weight = static_cast<double>(rng.between(config_.min_weight, config_.max_weight));
    }

    Dialogue d;
    d.id = std::move(id);
    BeliefState belief;

    // Opening question; placeholders it carries pre-fill their slots.
    {
        const Bindings b = bindings_for(goal);
        std::vector<const std::string*> usable;
        for (const auto& t : pack_.get("initial"))
            if (bindable(t, b))
                usable.push_back(&t);
        if (usable.empty())
            throw TemplateError("", "no opening template can be bound for record " +
                                        std::to_string(goal.record->id));
        const std::string& tmpl = *usable[rng.below(usable.size())];
        for (const auto& name : placeholders(tmpl))
            if (auto s = slot_from_string(name))
                belief.slots[*s] = b.at(name);
        d.turns.push_back({Speaker::user, render_template(tmpl, b), annotate(belief), TurnType::initial, std::nullopt});
    }

    std::vector<Slot> asked;
    while (true) {
        Goal current{goal.record->id, goal.weight, goal.metric, 0.0};
        SystemAction action =
            next_system_action(*goal.record, current, belief, asked, config_.max_questions, rng);
        if (action.kind == SystemAction::Kind::inform)
            break;
        const Slot requested = *action.slot;
        asked.push_back(requested);
        d.turns.push_back({Speaker::system, render_random(category("request", requested), bindings_for(goal), rng),
                           d.turns.back().belief, std::nullopt, action});

        const bool random_ok = random_possible(requested, goal, belief);
        const bool change_ok = change_possible(goal, belief);
        const double u = rng.uniform();
        TurnType wanted = TurnType::matching;
        if (u < config_.random_turn_rate)
            wanted = TurnType::random;
        else if (u < config_.random_turn_rate + config_.changing_turn_rate)
            wanted = TurnType::changing;

        UserReply reply = sample_user_reply(requested, goal, wanted, belief, rng);
        if (stats) {
            ++stats->user_reply_turns;
            stats->random_eligible += random_ok;
            stats->changing_eligible += change_ok;
            stats->random_turns += reply.turn_type == TurnType::random;
            stats->changing_turns += reply.turn_type == TurnType::changing;
        }
        for (const auto& [slot, value] : reply.delta.slots)
            belief.slots[slot] = value;
        d.turns.push_back({Speaker::user, reply.utterance, annotate(belief), reply.turn_type, std::nullopt});
    }

    // Unsaid weight falls back to the standard serving.
    if (!belief.has(Slot::foodweight)) {
        goal.weight = goal.record->serving_weight;
        goal.metric = goal.record->serving_metric;
    }
    const double salt = salt_for(*goal.record, goal.weight, goal.metric, units_);
    d.goal = {goal.record->id, goal.weight, goal.metric, salt};

    BeliefState closing = belief;
    closing.slots.try_emplace(Slot::foodweight, format_exact(goal.weight));
    closing.slots.try_emplace(Slot::metric, goal.metric);
    for (const auto& [slot, value] : config_.default_slot_values) {
        auto rel = relation_of(slot);
        if (!rel || closing.has(slot))
            continue;
        auto it = goal.record->slots.find(*rel);
        if (it == goal.record->slots.end() || it->second == value)
            closing.slots[slot] = value;
    }
    closing.salt_value = salt;

    Bindings b = bindings_for(goal);
    b["salt"] = format_presentation(salt);
    b["foodweight"] = format_presentation(goal.weight);
    d.turns.push_back({Speaker::system, render_random("inform", b, rng), closing, std::nullopt,
                       SystemAction::inform(format_presentation(salt))});
    return d;
}

namespace {

std::size_t distinct_slots(const Corpus& corpus) {
    std::set<Slot> seen;
    for (const auto& d : corpus.dialogues)
        for (const auto& t : d.turns)
            for (const auto& [slot, value] : t.belief.slots)
                seen.insert(slot);
    return seen.size();
}

} // namespace

GeneratedCorpus DialogueGenerator::generate_corpus() const {
    GeneratedCorpus out;
    out.corpus.dialogues.reserve(config_.n_dialogues);
    for (std::size_t i = 0; i < config_.n_dialogues; ++i) {
        Rng rng(derive_seed(config_.seed, i));
        out.corpus.dialogues.push_back(generate_dialogue(rng, dialogue_id(i), &out.stats));
    }
    out.stats.dialogues = out.corpus.dialogues.size();
    for (const auto& d : out.corpus.dialogues)
        out.stats.total_turns += d.turns.size();
    out.stats.avg_turns = out.stats.dialogues
                              ? static_cast<double>(out.stats.total_turns) / static_cast<double>(out.stats.dialogues)
                              : 0.0;
    out.stats.slot_count = distinct_slots(out.corpus);
    return out;
}

Dialogue generate_dialogue(const KnowledgeBase& kb, const GenConfig& config, Rng& rng, const UnitTable& units,
                           const TemplatePack& pack) {
    return DialogueGenerator(kb, units, pack, config).generate_dialogue(rng, dialogue_id(0));
}

GeneratedCorpus generate_corpus(const KnowledgeBase& kb, const GenConfig& config, const UnitTable& units,
                                const TemplatePack& pack) {
    return DialogueGenerator(kb, units, pack, config).generate_corpus();
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats s;
    s.dialogues = corpus.dialogues.size();
    for (const auto& d : corpus.dialogues) {
        s.total_turns += d.turns.size();
        for (const auto& t : d.turns) {
            if (t.speaker != Speaker::user || t.turn_type == TurnType::initial)
                continue;
            ++s.user_reply_turns;
            s.random_turns += t.turn_type == TurnType::random;
            s.changing_turns += t.turn_type == TurnType::changing;
        }
    }
    s.avg_turns = s.dialogues ? static_cast<double>(s.total_turns) / static_cast<double>(s.dialogues) : 0.0;
    s.slot_count = distinct_slots(corpus);
    return s;
}

// ---- JSON ------------------------------------------------------------------

nlohmann::json belief_to_json(const BeliefState& b) {
    nlohmann::json slots = nlohmann::json::object();
    for (const auto& [slot, value] : b.slots)
        slots[std::string(to_string(slot))] = value;
    nlohmann::json j{{"slots", slots}};
    if (b.salt_value)
        j["salt_value"] = *b.salt_value;
    return j;
}

BeliefState belief_from_json(const nlohmann::json& j) {
    BeliefState b;
    for (const auto& [name, value] : j.at("slots").items()) {
        auto s = slot_from_string(name);
        if (!s)
            throw BeliefParseError("unknown slot '" + name + "'");
        b.slots[*s] = value.get<std::string>();
    }
    if (j.contains("salt_value") && !j["salt_value"].is_null()) {
        b.salt_value = j["salt_value"].get<double>();
        if (*b.salt_value < 0.0)
            throw BeliefParseError("negative salt_value");
    }
    return b;
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
    nlohmann::json dialogues = nlohmann::json::array();
    for (const auto& d : corpus.dialogues) {
        nlohmann::json turns = nlohmann::json::array();
        for (const auto& t : d.turns) {
            nlohmann::json jt{{"speaker", std::string(to_string(t.speaker))},
                              {"utterance", t.utterance},
                              {"belief", belief_to_json(t.belief)}};
            if (t.turn_type)
                jt["turn_type"] = std::string(to_string(*t.turn_type));
            if (t.action) {
                nlohmann::json ja{
                    {"kind", t.action->kind == SystemAction::Kind::inform ? "inform" : "request"}};
                if (t.action->slot)
                    ja["slot"] = std::string(to_string(*t.action->slot));
                if (t.action->payload)
                    ja["payload"] = *t.action->payload;
                jt["action"] = ja;
            }
            turns.push_back(std::move(jt));
        }
        dialogues.push_back({{"id", d.id},
                             {"goal",
                              {{"record_id", d.goal.record_id},
                               {"weight", d.goal.weight},
                               {"metric", d.goal.metric},
                               {"salt_mg", d.goal.salt_mg}}},
                             {"turns", turns}});
    }
    return {{"dialogues", dialogues}};
}

Corpus corpus_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dialogues") || !j["dialogues"].is_array())
        throw CorpusFormatError(0, -1, "top level must be an object with a 'dialogues' array");
    Corpus corpus;
    std::size_t di = 0;
    for (const auto& jd : j["dialogues"]) {
        long ti = -1;
        try {
            Dialogue d;
            d.id = jd.at("id").get<std::string>();
            const auto& g = jd.at("goal");
            d.goal = {g.at("record_id").get<int>(), g.at("weight").get<double>(), g.at("metric").get<std::string>(),
                      g.at("salt_mg").get<double>()};
            for (const auto& jt : jd.at("turns")) {
                ++ti;
                Turn t;
                auto sp = speaker_from_string(jt.at("speaker").get<std::string>());
                if (!sp)
                    throw CorpusFormatError(di, ti, "unknown speaker");
                t.speaker = *sp;
                t.utterance = jt.at("utterance").get<std::string>();
                if (!jt.contains("belief"))
                    throw CorpusFormatError(di, ti, "missing belief");
                t.belief = belief_from_json(jt["belief"]);
                if (jt.contains("turn_type")) {
                    auto tt = turn_type_from_string(jt["turn_type"].get<std::string>());
                    if (!tt)
                        throw CorpusFormatError(di, ti, "unknown turn_type");
                    t.turn_type = tt;
                }
                if (jt.contains("action")) {
                    const auto& ja = jt["action"];
                    SystemAction a;
                    const std::string kind = ja.at("kind").get<std::string>();
                    if (kind == "inform") {
                        a.kind = SystemAction::Kind::inform;
                        if (!ja.contains("payload"))
                            throw CorpusFormatError(di, ti, "inform action without payload");
                        a.payload = ja["payload"].get<std::string>();
                    } else if (kind == "request") {
                        a.kind = SystemAction::Kind::request;
                        auto s = ja.contains("slot") ? slot_from_string(ja["slot"].get<std::string>()) : std::nullopt;
                        if (!s)
                            throw CorpusFormatError(di, ti, "request action without a valid slot");
                        a.slot = s;
                    } else {
                        throw CorpusFormatError(di, ti, "unknown action kind '" + kind + "'");
                    }
                    t.action = a;
                }
                d.turns.push_back(std::move(t));
            }
            corpus.dialogues.push_back(std::move(d));
        } catch (const CorpusFormatError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw CorpusFormatError(di, ti, e.what());
        } catch (const BeliefParseError& e) {
            throw CorpusFormatError(di, ti, e.what());
        }
        ++di;
    }
    return corpus;
}

void export_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << corpus_to_json(corpus).dump(1) << '\n';
}

Corpus import_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open corpus " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CorpusFormatError(0, -1, std::string("not valid JSON: ") + e.what());
    }
    return corpus_from_json(j);
}

} // namespace saltdialog
