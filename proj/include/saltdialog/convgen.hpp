#pragma once
// Template-driven generation of annotated clarification dialogues.
//
// A dialogue opens with a user question, then alternates system requests and
// user answers until every applicable slot of the goal record is filled or
// the question budget runs out, and ends with a system inform carrying the
// goal's salt value. User answers are usually matching; with the configured
// per-turn probabilities they answer a different open slot (random) or revise
// an earlier answer (changing), which may move the goal to another record.
//
// Rates apply per user reply turn, conditional on the turn type being
// possible at that point: a random answer needs a second open slot, a change
// needs something already said that can be revised.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "saltdialog/belief.hpp"
#include "saltdialog/food_kb.hpp"
#include "saltdialog/rng.hpp"
#include "saltdialog/templates.hpp"

namespace saltdialog {

enum class Speaker { user, system };
enum class TurnType { initial, matching, random, changing };

std::string_view to_string(Speaker s);
std::string_view to_string(TurnType t);
std::optional<Speaker> speaker_from_string(std::string_view s);
std::optional<TurnType> turn_type_from_string(std::string_view s);

struct SystemAction {
    enum class Kind { inform, request };
    Kind kind = Kind::inform;
    std::optional<Slot> slot;
    std::optional<std::string> payload;

    static SystemAction request(Slot s) { return {Kind::request, s, std::nullopt}; }
    static SystemAction inform(std::string payload) { return {Kind::inform, std::nullopt, std::move(payload)}; }

    bool operator==(const SystemAction&) const = default;
};

struct Turn {
    Speaker speaker = Speaker::user;
    std::string utterance;
    // Cumulative; system turns repeat the state they respond to.
    BeliefState belief;
    std::optional<TurnType> turn_type;  // user turns
    std::optional<SystemAction> action; // system turns

    bool operator==(const Turn&) const = default;
};

struct Goal {
    int record_id = 0;
    double weight = 0.0;
    std::string metric;
    double salt_mg = 0.0;

    bool operator==(const Goal&) const = default;
};

struct Dialogue {
    std::string id;
    Goal goal;
    std::vector<Turn> turns;

    bool operator==(const Dialogue&) const = default;
};

struct Corpus {
    std::vector<Dialogue> dialogues;
    bool operator==(const Corpus&) const = default;
};

struct GenConfig {
    std::uint64_t seed = 0;
    std::size_t n_dialogues = 1;
    double random_turn_rate = 0.0045;
    double changing_turn_rate = 0.0045;
    int max_questions = 4;
    // Slots left unfilled at termination are annotated with these on the
    // closing system turn. foodweight and metric always fall back to the goal
    // record's standard serving.
    std::map<Slot, std::string> default_slot_values{{Slot::cook, "raw"}};
    double standard_weight_prob = 0.5;
    int min_weight = 10;
    int max_weight = 500;

    // Throws ConfigError.
    void validate() const;
};

struct CorpusStats {
    std::size_t dialogues = 0;
    std::size_t total_turns = 0;
    double avg_turns = 0.0;
    // Distinct slot types annotated anywhere in the corpus.
    std::size_t slot_count = 0;
    std::size_t user_reply_turns = 0;
    std::size_t random_turns = 0;
    std::size_t random_eligible = 0;
    std::size_t changing_turns = 0;
    std::size_t changing_eligible = 0;

    nlohmann::json to_json() const;
};

struct GeneratedCorpus {
    Corpus corpus;
    CorpusStats stats;
};

// Slots the system may ask about for this record: each relation slot the
// record has (except food, and except cook when the food is eaten raw) plus
// foodweight. metric is answered together with foodweight.
std::vector<Slot> applicable_slots(const FoodRecord& record);

// Inform with the goal's salt once every applicable slot is filled or
// `asked` has reached max_questions; otherwise a uniformly chosen request
// among the applicable, unfilled slots.
SystemAction next_system_action(const FoodRecord& goal_record, const Goal& goal, const BeliefState& filled,
                                std::span<const Slot> asked, int max_questions, Rng& rng);

// Mutable goal while a dialogue is being generated.
struct GoalState {
    const FoodRecord* record = nullptr;
    double weight = 0.0;
    std::string metric;
    bool wants_standard = true;
};

struct UserReply {
    std::string utterance;
    BeliefState delta; // only the uttered slots
    TurnType turn_type = TurnType::matching;
};

class DialogueGenerator {
public:
    DialogueGenerator(const KnowledgeBase& kb, const UnitTable& units, const TemplatePack& pack, GenConfig config);

    // Falls back to matching when the requested type is impossible; the
    // realized type is reported in the reply. May update `goal` on a change.
    UserReply sample_user_reply(Slot requested, GoalState& goal, TurnType turn_type, const BeliefState& filled,
                                Rng& rng) const;

    bool random_possible(Slot requested, const GoalState& goal, const BeliefState& filled) const;
    bool change_possible(const GoalState& goal, const BeliefState& filled) const;

    Dialogue generate_dialogue(Rng& rng, std::string id, CorpusStats* stats = nullptr) const;

    // Dialogue i draws from its own stream derived from (seed, i).
    GeneratedCorpus generate_corpus() const;

    const GenConfig& config() const { return config_; }

private:
    struct Change {
        Slot slot;
        const FoodRecord* record; // null for a weight change
    };
    std::vector<Change> possible_changes(const GoalState& goal, const BeliefState& filled) const;
    BeliefState annotate(BeliefState b) const;
    std::string render_random(std::string_view category, const Bindings& bindings, Rng& rng) const;
    Bindings bindings_for(const GoalState& goal) const;

    const KnowledgeBase& kb_;
    const UnitTable& units_;
    const TemplatePack& pack_;
    GenConfig config_;
};

Dialogue generate_dialogue(const KnowledgeBase& kb, const GenConfig& config, Rng& rng,
                           const UnitTable& units = UnitTable::defaults(),
                           const TemplatePack& pack = TemplatePack::builtin());

GeneratedCorpus generate_corpus(const KnowledgeBase& kb, const GenConfig& config,
                                const UnitTable& units = UnitTable::defaults(),
                                const TemplatePack& pack = TemplatePack::builtin());

CorpusStats corpus_stats(const Corpus& corpus);

nlohmann::json belief_to_json(const BeliefState& b);
BeliefState belief_from_json(const nlohmann::json& j);

nlohmann::json corpus_to_json(const Corpus& corpus);
// Throws CorpusFormatError with the offending dialogue and turn index.
Corpus corpus_from_json(const nlohmann::json& j);

void export_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus import_corpus(const std::filesystem::path& path);

} // namespace saltdialog
