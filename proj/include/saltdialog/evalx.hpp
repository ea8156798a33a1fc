#pragma once
// Dialogue metrics (inform, success, joint accuracy, corpus BLEU,
// readability) and the evaluation driver that runs a predictor over a corpus
// with and without symbolic correction.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "saltdialog/belief.hpp"
#include "saltdialog/convgen.hpp"
#include "saltdialog/dst.hpp"
#include "saltdialog/food_kb.hpp"
#include "saltdialog/templates.hpp"
#include "saltdialog/units.hpp"

namespace saltdialog {

// Percent of turns whose predicted belief equals gold. Salt values compare
// after presentation rounding; include_salt=false compares slots only.
// Throws AlignmentError on unequal lengths, MetricUndefined when empty.
double joint_accuracy(std::span<const BeliefState> predicted, std::span<const BeliefState> gold,
                      bool include_salt = true);

inline constexpr double kSaltTolerance = 0.005;

struct DialogueOutcome {
    std::optional<int> resolved_record;
    std::optional<double> delivered_salt;
    int gold_record = 0;
    double gold_salt = 0.0;
};

struct InformSuccess {
    double inform = 0.0;
    double success = 0.0;
};

// inform: resolved record equals gold. success: informed and the delivered
// salt is within 0.5% of gold. Empty input gives zeros.
InformSuccess inform_success(std::span<const DialogueOutcome> outcomes);

// Lowercased; words are runs of letters and digits, every other
// non-space character is a token of its own.
std::vector<std::string> bleu_tokenize(std::string_view text);

// Corpus BLEU-4 with one reference per candidate. A precision with no
// matches becomes 1e-9; an order for which neither side has any n-gram
// counts as 1. Throws AlignmentError / MetricUndefined.
double corpus_bleu(std::span<const std::string> candidates, std::span<const std::string> references);

struct Readability {
    double smog = 0.0;
    double fkgl = 0.0;
    double fkre = 0.0;
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t syllables = 0;
    std::size_t polysyllables = 0;
    // SMOG is calibrated on samples of at least 30 sentences.
    bool smog_valid = false;

    nlohmann::json to_json() const;
};

// Vowel groups (y counts as a vowel), minus a silent final "e" (kept in a
// consonant + "le" ending) or a silent "ed" (kept after t or d); at least 1.
// Tokens without letters count as one syllable.
int count_syllables(std::string_view word);

// Sentences end at '.', '!' or '?' (a '.' between digits does not end one);
// trailing text without a terminator is a sentence too. Throws
// MetricUndefined when the text has no words.
Readability readability(std::string_view text);

// Every system-side template (request, clarify, inform and the apologies)
// rendered for every record of the knowledge base, one utterance each.
std::vector<std::string> system_template_corpus(const KnowledgeBase& kb, const TemplatePack& pack,
                                                const UnitTable& units = UnitTable::defaults());

struct MetricsReport {
    double inform = 0.0;
    double success = 0.0;
    double bleu = 0.0;
    double joint_accuracy = 0.0;
    double slot_accuracy = 0.0;
    Readability readability;
    std::size_t dialogues = 0;
    std::size_t turns = 0;

    nlohmann::json to_json() const;
};

enum class PredictorKind { reference, corrupting, remote };

std::string_view to_string(PredictorKind k);
std::optional<PredictorKind> predictor_kind_from_string(std::string_view s);

struct EvalOptions {
    PredictorKind predictor = PredictorKind::reference;
    CorruptionConfig corruption;
    RemoteConfig remote;
};

struct EvaluationResult {
    MetricsReport pre;  // raw predictions
    MetricsReport post; // after symbolic correction
    // Dialogues whose final-turn prediction carries the gold slots and those
    // slots pick out exactly the goal record.
    double clean_unique_fraction = 0.0;
    PredictorKind predictor = PredictorKind::reference;

    nlohmann::json to_json() const;
    // Aligned table with Inform, Success, BLEU and Joint Accuracy columns;
    // the post-correction row only when asked for.
    std::string table(bool with_correction = true) const;
};

// Predicts every user turn. The corrupting predictor corrupts the gold
// belief of each turn with a stream derived from (seed, dialogue, turn).
// Throws MetricUndefined for an empty corpus.
EvaluationResult evaluate_corpus(const Corpus& corpus, const KnowledgeBase& kb, const EvalOptions& options,
                                 const UnitTable& units = UnitTable::defaults(),
                                 const TemplatePack& pack = TemplatePack::builtin());

} // namespace saltdialog
