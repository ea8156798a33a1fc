#pragma once
// Live dialog sessions: belief tracking on every user message, symbolic
// correction, and a policy that asks clarification questions until the
// knowledge base yields a single record, then informs its salt value.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "saltdialog/belief.hpp"
#include "saltdialog/dst.hpp"
#include "saltdialog/evalx.hpp"
#include "saltdialog/food_kb.hpp"
#include "saltdialog/nscorrect.hpp"
#include "saltdialog/templates.hpp"
#include "saltdialog/units.hpp"

namespace saltdialog {

struct PolicyConfig {
    int max_questions = 4;
    // User messages per session; the session ends unresolved after this.
    int max_turns = 12;
    double ttl_seconds = 1800.0;
    std::size_t max_sessions = 10000;
    PredictorKind predictor = PredictorKind::reference;
    CorruptionConfig corruption;
    RemoteConfig remote;

    // Throws ConfigError.
    void validate() const;
};

enum class SessionStatus { active, completed };
std::string_view to_string(SessionStatus s);

struct SessionReply {
    std::string text;
    BeliefState belief;
    SessionStatus status = SessionStatus::active;
    SystemAction action;

    nlohmann::json to_json() const; // {"reply", "belief", "status"}
};

struct SessionSnapshot {
    BeliefState belief;
    std::vector<Slot> asked;
    SessionStatus status = SessionStatus::active;
    DialogueContext transcript;

    nlohmann::json to_json() const;
};

// Seconds on an arbitrary monotonic scale.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

// Decides the next system move for a belief. Pure; exposed for tests.
struct PolicyDecision {
    enum class Kind { inform, request, clarify, not_found, no_match, unit_mismatch, unresolved, not_understood };
    Kind kind = Kind::not_understood;
    std::optional<Slot> slot;
    CorrectionOutcome outcome;
    bool completes() const { return kind != Kind::request && kind != Kind::clarify && kind != Kind::not_understood; }
};

// Among relation slots the belief leaves open, the one taking the most
// distinct values over the candidates (a missing value counts as one);
// ties go to the earlier slot. nullopt when no slot splits them.
std::optional<Slot> best_split_slot(std::span<const FoodRecord* const> candidates, const BeliefState& belief);

PolicyDecision decide(const BeliefState& belief, std::size_t questions_asked, const KnowledgeBase& kb,
                      const UnitTable& units, int max_questions);

class DialogManager {
public:
    DialogManager(const KnowledgeBase& kb, const UnitTable& units, const TemplatePack& pack, PolicyConfig config,
                  Clock clock = steady_clock_seconds());
    ~DialogManager();

    // Throws SessionLimitReached when the store is full of live sessions.
    std::string create_session();

    // Throws SessionNotFound, SessionCompleted, SessionExpired, and
    // PredictorUnavailable from a remote predictor.
    SessionReply handle_message(const std::string& id, const std::string& text);

    // Throws SessionNotFound or SessionExpired.
    SessionSnapshot get_state(const std::string& id);

    std::size_t session_count() const;
    std::size_t purge_expired();

    // Appends one JSON line per turn.
    void set_transcript_log(const std::filesystem::path& path);

    const PolicyConfig& config() const { return config_; }

private:
    struct Session;
    std::shared_ptr<Session> acquire(const std::string& id);
    std::string render(std::string_view category, const Bindings& b) const;
    void log_turn(const std::string& id, Speaker speaker, const std::string& text, const BeliefState& belief);

    const KnowledgeBase& kb_;
    UnitTable units_;
    TemplatePack pack_;
    PolicyConfig config_;
    Clock clock_;
    std::unique_ptr<BeliefPredictor> predictor_;

    mutable std::mutex store_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t id_counter_ = 0;
    std::uint64_t id_salt_;

    std::mutex log_mutex_;
    std::optional<std::filesystem::path> log_path_;
};

struct HttpConfig {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks a free port
    std::string cors_origin = "*";
};

// JSON API over a DialogManager:
//   POST /session, POST /session/{id}/message, GET /session/{id}/state,
//   GET /health.
class HttpService {
public:
    HttpService(DialogManager& manager, HttpConfig config);
    ~HttpService();

    // Binds the socket; returns the bound port. Throws ConfigError.
    int bind();
    // Serves until stop(); call after bind().
    void serve();
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace saltdialog
