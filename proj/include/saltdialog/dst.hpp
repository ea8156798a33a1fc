#pragma once
// Belief-state tracking: the text form of a belief, a template-anchored
// reference tracker, a corrupting predictor that mimics a neural tracker's
// numeric guesses, and the client side of the external predictor protocol.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saltdialog/belief.hpp"
#include "saltdialog/convgen.hpp"
#include "saltdialog/food_kb.hpp"
#include "saltdialog/rng.hpp"
#include "saltdialog/templates.hpp"
#include "saltdialog/units.hpp"

namespace saltdialog {

struct ContextTurn {
    Speaker speaker = Speaker::user;
    std::string text;

    bool operator==(const ContextTurn&) const = default;
};

// Preceding utterances in order, starting with the user.
using DialogueContext = std::vector<ContextTurn>;

// Turns [0, end) of a dialogue.
DialogueContext context_of(const Dialogue& d, std::size_t end);

// "[food=pork_chops; cook=broiled; value=81]": slots in enum order, then the
// salt value if present. An empty belief is "[]".
std::string serialize_belief(const BeliefState& b);

struct ParsedBelief {
    BeliefState belief;
    std::vector<std::string> warnings; // one per ignored unknown slot
};

// Whitespace tolerant; throws BeliefParseError on malformed text.
ParsedBelief parse_belief_report(std::string_view text);
BeliefState parse_belief(std::string_view text);

class ReferenceTracker {
public:
    ReferenceTracker(const KnowledgeBase& kb, const TemplatePack& pack,
                     const UnitTable& units = UnitTable::defaults());

    // Slots mentioned in the user turns, later mentions replacing earlier
    // ones. salt_value is never set.
    BeliefState track(const DialogueContext& context) const;

    // Slots a single user utterance mentions, given the slot the system just
    // asked for (if any).
    BeliefState read_utterance(std::string_view text, std::optional<Slot> requested) const;

    // Slot a system utterance asks about, recognized by its request or
    // clarification template.
    std::optional<Slot> requested_slot(std::string_view system_text) const;

private:
    struct Entry {
        CompiledTemplate tmpl;
        std::size_t order;
    };
    struct Candidate;
    std::optional<Candidate> bind(const Bindings& b, std::size_t order, std::optional<Slot> requested) const;
    BeliefState scan_mentions(std::string_view text) const;
    std::optional<std::string> valid_metric(const std::string& value) const;

    const KnowledgeBase& kb_;
    UnitTable units_;
    std::vector<Entry> user_templates_;
    std::vector<std::pair<Slot, CompiledTemplate>> request_templates_;
};

BeliefState reference_track(const DialogueContext& context, const KnowledgeBase& kb, const TemplatePack& pack,
                            const UnitTable& units = UnitTable::defaults());

struct CorruptionConfig {
    double salt_corrupt_prob = 1.0;
    double slot_corrupt_prob = 0.1;
    std::uint64_t seed = 0;

    // Throws ConfigError.
    void validate() const;
};

// Copies gold, then replaces the salt with a random integer in [1, 200] that
// differs from gold (only when gold carries a salt), and each relation slot
// with a different value from the knowledge-base vocabulary of that relation
// (only where such an alternative exists).
BeliefState corrupting_predict(const BeliefState& gold, const CorruptionConfig& cfg, const KnowledgeBase& kb,
                               Rng& rng);

inline constexpr std::string_view kDstPrompt = "translate dialogue to belief state:";

struct PredictorRequest {
    std::string prompt{kDstPrompt};
    DialogueContext context;
};

struct PredictorResponse {
    std::string belief;
};

nlohmann::json request_to_json(const PredictorRequest& r);
PredictorRequest request_from_json(const nlohmann::json& j);

struct RemoteConfig {
    // Base URL; requests go to <endpoint>/predict.
    std::string endpoint;
    double timeout_seconds = 10.0;
    int retries = 1;
};

// Throws PredictorUnavailable on connection failure, timeout or non-200
// status after the retries; BeliefParseError on a malformed body.
PredictorResponse remote_predict(const RemoteConfig& cfg, const PredictorRequest& request);

class BeliefPredictor {
public:
    virtual ~BeliefPredictor() = default;
    // Belief after the last turn of the context. Must be safe to call
    // concurrently.
    virtual BeliefState predict(const DialogueContext& context) const = 0;
};

class ReferencePredictor : public BeliefPredictor {
public:
    explicit ReferencePredictor(ReferenceTracker tracker) : tracker_(std::move(tracker)) {}
    BeliefState predict(const DialogueContext& context) const override { return tracker_.track(context); }

private:
    ReferenceTracker tracker_;
};

// Tracks with the reference tracker, annotates the salt the knowledge base
// gives for those slots, then corrupts. The random stream is derived from
// the seed and the context text, so equal contexts get equal predictions.
class CorruptingPredictor : public BeliefPredictor {
public:
    CorruptingPredictor(ReferenceTracker tracker, const KnowledgeBase& kb, const UnitTable& units,
                        CorruptionConfig cfg);
    BeliefState predict(const DialogueContext& context) const override;

private:
    ReferenceTracker tracker_;
    const KnowledgeBase& kb_;
    UnitTable units_;
    CorruptionConfig cfg_;
};

class RemotePredictor : public BeliefPredictor {
public:
    explicit RemotePredictor(RemoteConfig cfg) : cfg_(std::move(cfg)) {}
    BeliefState predict(const DialogueContext& context) const override;

private:
    RemoteConfig cfg_;
};

// Stable 64-bit FNV-1a over speakers and texts.
std::uint64_t context_hash(const DialogueContext& context);

} // namespace saltdialog
