#include "saltdialog/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "saltdialog/convgen.hpp"
#include "saltdialog/errors.hpp"
#include "saltdialog/nscorrect.hpp"
#include "saltdialog/rng.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

void PolicyConfig::validate() const {
    if (max_questions < 1)
        throw ConfigError("max_questions must be at least 1");
    if (max_turns < 1)
        throw ConfigError("max_turns must be at least 1");
    if (!(ttl_seconds > 0.0))
        throw ConfigError("ttl_seconds must be positive");
    if (max_sessions < 1)
        throw ConfigError("max_sessions must be at least 1");
    if (predictor == PredictorKind::remote && remote.endpoint.empty())
        throw ConfigError("the remote predictor needs an endpoint");
    corruption.validate();
}

std::string_view to_string(SessionStatus s) { return s == SessionStatus::active ? "active" : "completed"; }

nlohmann::json SessionReply::to_json() const {
    return {{"reply", text}, {"belief", serialize_belief(belief)}, {"status", std::string(to_string(status))}};
}

nlohmann::json SessionSnapshot::to_json() const {
    nlohmann::json asked_json = nlohmann::json::array();
    for (Slot s : asked)
        asked_json.push_back(std::string(to_string(s)));
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : transcript)
        turns.push_back({{"speaker", std::string(to_string(t.speaker))}, {"text", t.text}});
    return {{"belief", serialize_belief(belief)},
            {"asked", asked_json},
            {"status", std::string(to_string(status))},
            {"transcript", turns}};
}

Clock steady_clock_seconds() {
    return [] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
}

// ---- policy ------------------------------------------------------------------

std::optional<Slot> best_split_slot(std::span<const FoodRecord* const> candidates, const BeliefState& belief) {
    std::optional<Slot> best;
    std::size_t best_count = 1;
    for (Relation rel : {Relation::cook, Relation::type, Relation::animal, Relation::part}) {
        const Slot s = slot_of(rel);
        if (belief.has(s))
            continue;
        std::set<std::string> values;
        for (const FoodRecord* r : candidates) {
            auto it = r->slots.find(rel);
            values.insert(it == r->slots.end() ? std::string() : it->second);
        }
        if (values.size() > best_count) {
            best_count = values.size();
            best = s;
        }
    }
    return best;
}

PolicyDecision decide(const BeliefState& belief, std::size_t questions_asked, const KnowledgeBase& kb,
                      const UnitTable& units, int max_questions) {
    PolicyDecision d;
    d.outcome.belief = belief;
    if (!belief.has(Slot::food))
        return d;
    d.outcome = correct(belief, kb, units);
    const bool budget_left = questions_asked < static_cast<std::size_t>(max_questions);

    switch (d.outcome.status) {
    case CorrectionStatus::retrieved:
    case CorrectionStatus::computed: {
        const FoodRecord& record = *kb.find(*d.outcome.record_id);
        for (Slot s : applicable_slots(record)) {
            if (!belief.has(s) && budget_left) {
                d.kind = PolicyDecision::Kind::request;
                d.slot = s;
                return d;
            }
        }
        d.kind = PolicyDecision::Kind::inform;
        return d;
    }
    case CorrectionStatus::ambiguous: {
        auto candidates = kb.lookup(belief.relation_slots());
        d.slot = best_split_slot(candidates, belief);
        d.kind = d.slot && budget_left ? PolicyDecision::Kind::clarify : PolicyDecision::Kind::unresolved;
        return d;
    }
    case CorrectionStatus::not_found: break;
    }
    if (d.outcome.candidates == 1) {
        d.kind = PolicyDecision::Kind::unit_mismatch;
        return d;
    }
    const auto& foods = kb.vocabulary(Relation::food);
    d.kind = std::binary_search(foods.begin(), foods.end(), *belief.get(Slot::food))
                 ? PolicyDecision::Kind::no_match
                 : PolicyDecision::Kind::not_found;
    return d;
}

// ---- sessions ------------------------------------------------------------------

struct DialogManager::Session {
    std::string id;
    std::mutex mutex;
    DialogueContext context;
    BeliefState belief;
    std::vector<Slot> asked;
    SessionStatus status = SessionStatus::active;
    double created_at = 0.0;
    double last_active = 0.0;
    int user_turns = 0;
};

DialogManager::DialogManager(const KnowledgeBase& kb, const UnitTable& units, const TemplatePack& pack,
                             PolicyConfig config, Clock clock)
    : kb_(kb), units_(units), pack_(pack), config_(std::move(config)), clock_(std::move(clock)) {
    config_.validate();
    ReferenceTracker tracker(kb_, pack_, units_);
    switch (config_.predictor) {
    case PredictorKind::reference: predictor_ = std::make_unique<ReferencePredictor>(tracker); break;
    case PredictorKind::corrupting:
        predictor_ = std::make_unique<CorruptingPredictor>(tracker, kb_, units_, config_.corruption);
        break;
    case PredictorKind::remote: predictor_ = std::make_unique<RemotePredictor>(config_.remote); break;
    }
    std::random_device rd;
    id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

DialogManager::~DialogManager() = default;

std::string DialogManager::create_session() {
    const double now = clock_();
    std::lock_guard lock(store_mutex_);
    if (sessions_.size() >= config_.max_sessions) {
        std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_active > config_.ttl_seconds; });
        if (sessions_.size() >= config_.max_sessions)
            throw SessionLimitReached("session limit of " + std::to_string(config_.max_sessions) + " reached");
    }
    auto s = std::make_shared<Session>();
    char buf[40];
    const std::uint64_t n = ++id_counter_;
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(splitmix64(id_salt_ ^ n)),
                  static_cast<unsigned long long>(splitmix64(id_salt_ + n)));
    s->id = buf;
    s->created_at = s->last_active = now;
    sessions_.emplace(s->id, s);
    return s->id;
}

std::shared_ptr<DialogManager::Session> DialogManager::acquire(const std::string& id) {
    std::lock_guard lock(store_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw SessionNotFound(id);
    if (clock_() - it->second->last_active > config_.ttl_seconds) {
        sessions_.erase(it);
        throw SessionExpired(id);
    }
    return it->second;
}

std::string DialogManager::render(std::string_view category, const Bindings& b) const {
    return render_template(pack_.get(category).front(), b);
}

SessionReply DialogManager::handle_message(const std::string& id, const std::string& text) {
    auto session = acquire(id);
    std::lock_guard lock(session->mutex);
    if (session->status == SessionStatus::completed)
        throw SessionCompleted(id);
    session->last_active = clock_();

    session->context.push_back({Speaker::user, text});
    BeliefState predicted;
    try {
        predicted = predictor_->predict(session->context);
    } catch (const PredictorUnavailable&) {
        session->context.pop_back();
        throw;
    } catch (const BeliefParseError&) {
        predicted = {};
    }
    ++session->user_turns;
    log_turn(id, Speaker::user, text, predicted);

    PolicyDecision d = decide(predicted, session->asked.size(), kb_, units_, config_.max_questions);
    if (!d.completes() && session->user_turns >= config_.max_turns)
        d.kind = PolicyDecision::Kind::unresolved;

    Bindings b;
    for (const auto& [slot, value] : d.outcome.belief.slots)
        b[std::string(to_string(slot))] = value;
    b["count"] = std::to_string(d.outcome.candidates);

    SessionReply reply;
    using Kind = PolicyDecision::Kind;
    switch (d.kind) {
    case Kind::inform: {
        const std::string salt = format_presentation(*d.outcome.belief.salt_value);
        b["salt"] = salt;
        b["foodweight"] = format_presentation(*d.outcome.weight);
        b["metric"] = d.outcome.metric;
        reply.text = render("inform", b);
        reply.action = SystemAction::inform(salt);
        break;
    }
    case Kind::request:
    case Kind::clarify:
        reply.text = render((d.kind == Kind::request ? "request." : "clarify.") + std::string(to_string(*d.slot)), b);
        reply.action = SystemAction::request(*d.slot);
        session->asked.push_back(*d.slot);
        break;
    case Kind::not_found: reply.text = render("not_found", b); break;
    case Kind::no_match: reply.text = render("no_match", b); break;
    case Kind::unit_mismatch: reply.text = render("unit_mismatch", b); break;
    case Kind::unresolved:
        reply.text = b.count("food") ? render("unresolved", b) : render("not_found", b);
        break;
    case Kind::not_understood: reply.text = render("not_understood", b); break;
    }
    if (d.kind != Kind::inform && d.kind != Kind::request && d.kind != Kind::clarify)
        reply.action = SystemAction{SystemAction::Kind::inform, std::nullopt, std::nullopt};

    session->belief = d.outcome.belief;
    session->status = d.completes() ? SessionStatus::completed : SessionStatus::active;
    session->context.push_back({Speaker::system, reply.text});
    log_turn(id, Speaker::system, reply.text, session->belief);

    reply.belief = session->belief;
    reply.status = session->status;
    return reply;
}

SessionSnapshot DialogManager::get_state(const std::string& id) {
    auto session = acquire(id);
    std::lock_guard lock(session->mutex);
    return {session->belief, session->asked, session->status, session->context};
}

std::size_t DialogManager::session_count() const {
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
}

std::size_t DialogManager::purge_expired() {
    const double now = clock_();
    std::lock_guard lock(store_mutex_);
    return std::erase_if(sessions_,
                         [&](const auto& kv) { return now - kv.second->last_active > config_.ttl_seconds; });
}

void DialogManager::set_transcript_log(const std::filesystem::path& path) {
    std::lock_guard lock(log_mutex_);
    std::ofstream probe(path, std::ios::app);
    if (!probe)
        throw ConfigError("cannot write transcript log " + path.string());
    log_path_ = path;
}

void DialogManager::log_turn(const std::string& id, Speaker speaker, const std::string& text,
                             const BeliefState& belief) {
    std::lock_guard lock(log_mutex_);
    if (!log_path_)
        return;
    std::ofstream out(*log_path_, std::ios::app);
    out << nlohmann::json{{"session", id},
                          {"speaker", std::string(to_string(speaker))},
                          {"text", text},
                          {"belief", serialize_belief(belief)},
                          {"time", clock_()}}
               .dump()
        << '\n';
}

} // namespace saltdialog
