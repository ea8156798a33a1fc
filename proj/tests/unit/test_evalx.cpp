#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "saltdialog/errors.hpp"
#include "saltdialog/evalx.hpp"

using namespace saltdialog;
using fixtures::pork_kb;

namespace {

BeliefState belief(std::map<Slot, std::string> slots, std::optional<double> salt = std::nullopt) {
    BeliefState b;
    b.slots = std::move(slots);
    b.salt_value = salt;
    return b;
}

// Straightforward corpus BLEU-4: clipped n-gram counts from explicit maps,
// uniform weights, brevity penalty, same smoothing conventions.
double oracle_bleu(const std::vector<std::string>& cands, const std::vector<std::string>& refs) {
    double match[5] = {}, total[5] = {}, ref_total[5] = {};
    double c = 0, r = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto ct = bleu_tokenize(cands[i]);
        const auto rt = bleu_tokenize(refs[i]);
        c += ct.size();
        r += rt.size();
        for (std::size_t n = 1; n <= 4; ++n) {
            std::map<std::vector<std::string>, int> cc, rc;
            for (std::size_t k = 0; k + n <= ct.size(); ++k)
                ++cc[{ct.begin() + k, ct.begin() + k + n}];
            for (std::size_t k = 0; k + n <= rt.size(); ++k)
                ++rc[{rt.begin() + k, rt.begin() + k + n}];
            for (const auto& [g, cnt] : cc) {
                total[n] += cnt;
                match[n] += std::min(cnt, rc.count(g) ? rc[g] : 0);
            }
            for (const auto& [g, cnt] : rc)
                ref_total[n] += cnt;
        }
    }
    if (c == 0)
        return 0.0;
    double log_p = 0;
    for (int n = 1; n <= 4; ++n) {
        double p;
        if (total[n] == 0 && ref_total[n] == 0)
            p = 1.0;
        else if (match[n] == 0)
            p = 1e-9;
        else
            p = match[n] / total[n];
        log_p += std::log(p) / 4.0;
    }
    const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
    return bp * std::exp(log_p);
}

} // namespace

// ---- joint accuracy -------------------------------------------------------------------

TEST(JointAccuracy, Examples) {
    const std::vector<BeliefState> gold{belief({{Slot::food, "pork"}}, 48), belief({{Slot::food, "beef"}}),
                                        belief({{Slot::food, "pork"}, {Slot::cook, "raw"}}), belief({})};
    EXPECT_EQ(joint_accuracy(gold, gold), 100.0);
    auto pred = gold;
    pred[2].slots[Slot::cook] = "broiled";
    EXPECT_EQ(joint_accuracy(pred, gold), 75.0);
}

TEST(JointAccuracy, SaltComparesAfterRoundingAndCanBeExcluded) {
    const std::vector<BeliefState> gold{belief({{Slot::food, "pork"}}, 40.82328)};
    const std::vector<BeliefState> close{belief({{Slot::food, "pork"}}, 40.821)};
    const std::vector<BeliefState> far{belief({{Slot::food, "pork"}}, 12)};
    EXPECT_EQ(joint_accuracy(close, gold), 100.0);
    EXPECT_EQ(joint_accuracy(far, gold), 0.0);
    EXPECT_EQ(joint_accuracy(far, gold, false), 100.0);
}

TEST(JointAccuracy, Errors) {
    const std::vector<BeliefState> one{belief({})};
    EXPECT_THROW(joint_accuracy({}, {}), MetricUndefined);
    EXPECT_THROW(joint_accuracy(one, {}), AlignmentError);
}

TEST(JointAccuracy, InvariantUnderJointPermutation) {
    Rng rng(6);
    std::vector<BeliefState> gold, pred;
    for (int i = 0; i < 60; ++i) {
        gold.push_back(belief({{Slot::food, "f" + std::to_string(i % 7)}}, double(i)));
        auto p = gold.back();
        if (rng.bernoulli(0.4))
            p.salt_value = double(i + 1);
        pred.push_back(p);
    }
    const double base = joint_accuracy(pred, gold);
    for (int trial = 0; trial < 10; ++trial) {
        for (std::size_t i = gold.size() - 1; i > 0; --i) {
            const std::size_t j = rng.below(i + 1);
            std::swap(gold[i], gold[j]);
            std::swap(pred[i], pred[j]);
        }
        EXPECT_EQ(joint_accuracy(pred, gold), base);
    }
}

// ---- inform / success ----------------------------------------------------------------

TEST(InformSuccess, Examples) {
    const DialogueOutcome right{1, 48.0, 1, 48.0};
    const DialogueOutcome wrong_salt{1, 12.0, 1, 48.0};
    const DialogueOutcome wrong_record{2, 48.0, 1, 48.0};
    const std::vector<DialogueOutcome> a{right, right};
    EXPECT_EQ(inform_success(a).inform, 100.0);
    EXPECT_EQ(inform_success(a).success, 100.0);
    const std::vector<DialogueOutcome> b{wrong_salt, wrong_salt};
    EXPECT_EQ(inform_success(b).inform, 100.0);
    EXPECT_EQ(inform_success(b).success, 0.0);
    const std::vector<DialogueOutcome> c{right, wrong_record};
    EXPECT_EQ(inform_success(c).inform, 50.0);
    EXPECT_EQ(inform_success(c).success, 50.0);
    EXPECT_EQ(inform_success({}).inform, 0.0);
}

TEST(InformSuccess, SaltToleranceIsHalfAPercent) {
    const std::vector<DialogueOutcome> in{{1, 100.4, 1, 100.0}}, out{{1, 100.6, 1, 100.0}};
    EXPECT_EQ(inform_success(in).success, 100.0);
    EXPECT_EQ(inform_success(out).success, 0.0);
    const std::vector<DialogueOutcome> unresolved{{std::nullopt, std::nullopt, 1, 100.0}};
    EXPECT_EQ(inform_success(unresolved).inform, 0.0);
}

// ---- BLEU ------------------------------------------------------------------------------

TEST(BleuTokenize, WordsAndPunctuation) {
    EXPECT_EQ(bleu_tokenize("Pork has 48 mg, per 100g!"),
              (std::vector<std::string>{"pork", "has", "48", "mg", ",", "per", "100g", "!"}));
    EXPECT_TRUE(bleu_tokenize("   ").empty());
}

TEST(CorpusBleu, IdentityIsOne) {
    const std::vector<std::string> c{"how is the pork cooked ?", "it is broiled .", "pork has 48 mg of salt"};
    EXPECT_DOUBLE_EQ(corpus_bleu(c, c), 1.0);
    const std::vector<std::string> short_c{"ok", "yes no"};
    EXPECT_DOUBLE_EQ(corpus_bleu(short_c, short_c), 1.0);
}

TEST(CorpusBleu, DisjointVocabularyIsNearZero) {
    const std::vector<std::string> c{"alpha beta gamma delta", "epsilon zeta eta theta"};
    const std::vector<std::string> r{"one two three four", "five six seven eight"};
    EXPECT_LE(corpus_bleu(c, r), 1e-6);
}

TEST(CorpusBleu, FrozenValues) {
    const std::vector<std::string> c1{"the cat sat"}, r1{"the cat sat down"};
    EXPECT_NEAR(corpus_bleu(c1, r1), 0.004029351667284423, 1e-12);

    const std::vector<std::string> c{"pork has 48 mg of salt", "how is the pork cooked ?", "it is broiled ."};
    const std::vector<std::string> r{"pork has 48 mg of salt per 100 grams", "how was the pork made ?",
                                     "it is broiled ."};
    // c=16, r=19, precisions 14/16, 9/13, 6/10, 4/7.
    const double hand = std::exp(1.0 - 19.0 / 16.0) *
                        std::pow(14.0 / 16.0 * 9.0 / 13.0 * 6.0 / 10.0 * 4.0 / 7.0, 0.25);
    EXPECT_NEAR(hand, 0.5596607982901531, 1e-12);
    EXPECT_NEAR(corpus_bleu(c, r), hand, 1e-6);
}

TEST(CorpusBleu, MatchesBruteForceOracle) {
    const std::vector<std::string> vocab{"pork", "salt", "is", "the", "mg", "grams", "broiled", "raw", ".", "?"};
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> c, r;
        const std::size_t n = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) {
            std::string a, b;
            for (std::size_t k = rng.below(9); k > 0; --k)
                a += vocab[rng.below(vocab.size())] + " ";
            for (std::size_t k = rng.below(9); k > 0; --k)
                b += vocab[rng.below(vocab.size())] + " ";
            c.push_back(a);
            r.push_back(b);
        }
        EXPECT_NEAR(corpus_bleu(c, r), oracle_bleu(c, r), 1e-12) << trial;
    }
}

TEST(CorpusBleu, Errors) {
    const std::vector<std::string> one{"a"};
    EXPECT_THROW(corpus_bleu({}, {}), MetricUndefined);
    EXPECT_THROW(corpus_bleu(one, {}), AlignmentError);
}

// ---- readability ------------------------------------------------------------------------

TEST(CountSyllables, Examples) {
    EXPECT_EQ(count_syllables("salt"), 1);
    EXPECT_EQ(count_syllables("the"), 1);
    EXPECT_EQ(count_syllables("cake"), 1);
    EXPECT_EQ(count_syllables("table"), 2);
    EXPECT_EQ(count_syllables("wanted"), 2);
    EXPECT_EQ(count_syllables("jumped"), 1);
    EXPECT_EQ(count_syllables("rhythm"), 1);
    EXPECT_EQ(count_syllables("beautiful"), 3);
    EXPECT_EQ(count_syllables("48"), 1);
}

TEST(Readability, HandComputedExample) {
    const auto r = readability("It is salt.");
    EXPECT_EQ(r.words, 3u);
    EXPECT_EQ(r.sentences, 1u);
    EXPECT_EQ(r.syllables, 3u);
    EXPECT_EQ(r.polysyllables, 0u);
    EXPECT_NEAR(r.fkre, 206.835 - 1.015 * 3.0 - 84.6 * 1.0, 1e-9);
    EXPECT_NEAR(r.fkre, 119.19, 1e-9);
    EXPECT_NEAR(r.fkgl, 0.39 * 3.0 + 11.8 * 1.0 - 15.59, 1e-9);
    EXPECT_NEAR(r.fkgl, -2.62, 1e-9);
    EXPECT_NEAR(r.smog, 3.1291, 1e-12);
    EXPECT_FALSE(r.smog_valid);
}

TEST(Readability, DecimalPointDoesNotEndASentence) {
    EXPECT_EQ(readability("Pork has 40.82 mg of salt. It is raw.").sentences, 2u);
    EXPECT_EQ(readability("no terminator here").sentences, 1u);
    EXPECT_THROW(readability("  ... "), MetricUndefined);
}

TEST(Readability, LongerWordsLowerReadingEase) {
    const auto plain = readability("The cat sat on the mat. It was warm.");
    const auto dense = readability("Considerable institutional complexity characterizes contemporary "
                                   "administrative organizations. Regulatory documentation proliferates.");
    EXPECT_GT(plain.fkre, dense.fkre);
    EXPECT_LT(plain.fkgl, dense.fkgl);
    EXPECT_GT(dense.polysyllables, 5u);
}

TEST(Readability, SystemTemplatesReadEasierThanExpositoryProse) {
    std::string templates;
    for (const auto& s : system_template_corpus(pork_kb(), TemplatePack::builtin()))
        templates += s + " ";
    const auto t = readability(templates);
    EXPECT_LE(t.fkgl, 5.0);
    EXPECT_GE(t.fkre, 80.0);
    EXPECT_TRUE(t.smog_valid);

    const std::string prose =
        "Dietary sodium intake remains considerably above recommended thresholds in most industrialized "
        "populations, and processed or restaurant foods contribute the majority of that consumption. "
        "Accurately estimating the sodium content of an individual meal therefore requires detailed "
        "information about preparation methods, portion sizes, and ingredient composition. "
        "Nutritional databases catalogue thousands of food descriptions, yet identifying the appropriate "
        "entry for a particular dish frequently demands several clarifying observations.";
    const auto p = readability(prose);
    EXPECT_GT(p.fkgl, t.fkgl + 8.0);
    EXPECT_LT(p.fkre, t.fkre - 60.0);
}

TEST(Readability, FixtureTemplateCorpusIsFrozen) {
    std::string text;
    for (const auto& s : system_template_corpus(pork_kb(), TemplatePack::builtin()))
        text += s + " ";
    const auto r = readability(text);
    EXPECT_NEAR(r.fkgl, -0.5841226149515162, 1e-9);
    EXPECT_NEAR(r.fkre, 110.01453862996561, 1e-9);
}

// ---- evaluation driver ----------------------------------------------------------------

namespace {

GeneratedCorpus corpus(std::uint64_t seed, std::size_t n) {
    GenConfig c;
    c.seed = seed;
    c.n_dialogues = n;
    return generate_corpus(pork_kb(), c);
}

EvalOptions corrupting(std::uint64_t seed) {
    EvalOptions o;
    o.predictor = PredictorKind::corrupting;
    o.corruption = {1.0, 0.1, seed};
    return o;
}

} // namespace

TEST(EvaluateCorpus, ReferencePredictorIsPerfectOnSlots) {
    const auto g = corpus(7, 300);
    const auto r = evaluate_corpus(g.corpus, pork_kb(), EvalOptions{});
    EXPECT_EQ(r.pre.slot_accuracy, 100.0);
    EXPECT_EQ(r.post.slot_accuracy, 100.0);
    EXPECT_EQ(r.post.success, 100.0);
    EXPECT_EQ(r.post.inform, 100.0);
    EXPECT_EQ(r.clean_unique_fraction, 1.0);
}

TEST(EvaluateCorpus, FrozenCorruptingRun) {
    const auto g = corpus(7, 1000);
    EXPECT_NEAR(g.stats.avg_turns, 6.692, 1e-9);
    const auto r = evaluate_corpus(g.corpus, pork_kb(), corrupting(7));
    EXPECT_NEAR(r.pre.inform, 85.0, 1e-9);
    EXPECT_EQ(r.pre.success, 0.0);
    EXPECT_NEAR(r.post.success, 85.0, 1e-9);
    EXPECT_NEAR(r.clean_unique_fraction, 0.85, 1e-12);
    EXPECT_NEAR(r.pre.joint_accuracy, 48.445905558876269, 1e-9);
    EXPECT_NEAR(r.post.joint_accuracy, 91.422594142259413, 1e-9);
    EXPECT_EQ(r.pre.dialogues, 1000u);
}

TEST(EvaluateCorpus, CorrectionNeverHurtsAcrossSeeds) {
    const auto g = corpus(5, 150);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = evaluate_corpus(g.corpus, pork_kb(), corrupting(seed));
        EXPECT_GE(r.post.joint_accuracy, r.pre.joint_accuracy) << seed;
        EXPECT_GE(r.post.success, r.pre.success) << seed;
        EXPECT_LE(r.pre.success, r.pre.inform) << seed;
        EXPECT_LE(r.post.success, r.post.inform) << seed;
    }
}

TEST(EvaluateCorpus, JsonAndTable) {
    const auto r = evaluate_corpus(corpus(2, 20).corpus, pork_kb(), EvalOptions{});
    const auto j = r.to_json();
    EXPECT_EQ(j["predictor"], "reference");
    EXPECT_TRUE(j.contains("pre_correction"));
    EXPECT_TRUE(j.contains("post_correction"));
    EXPECT_NE(r.table().find("Joint Accuracy"), std::string::npos);
    EXPECT_NE(r.table(false).find("pre"), std::string::npos);
    EXPECT_EQ(r.table(false).find("post"), std::string::npos);
}

TEST(EvaluateCorpus, EmptyCorpusIsUndefined) {
    EXPECT_THROW(evaluate_corpus(Corpus{}, pork_kb(), EvalOptions{}), MetricUndefined);
}
