#include "saltdialog/evalx.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include "saltdialog/errors.hpp"
#include "saltdialog/nscorrect.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || (c & 0x80); }

double percent(std::size_t part, std::size_t whole) {
    return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

} // namespace

double joint_accuracy(std::span<const BeliefState> predicted, std::span<const BeliefState> gold,
                      bool include_salt) {
    if (predicted.size() != gold.size())
        throw AlignmentError(predicted.size(), gold.size());
    if (predicted.empty())
        throw MetricUndefined("joint accuracy of zero turns");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        hits += same_belief(predicted[i], gold[i], include_salt);
    return percent(hits, predicted.size());
}

InformSuccess inform_success(std::span<const DialogueOutcome> outcomes) {
    std::size_t informed = 0, succeeded = 0;
    for (const auto& o : outcomes) {
        if (!o.resolved_record || *o.resolved_record != o.gold_record)
            continue;
        ++informed;
        if (o.delivered_salt &&
            std::abs(*o.delivered_salt - o.gold_salt) <= kSaltTolerance * std::abs(o.gold_salt))
            ++succeeded;
    }
    return {percent(informed, outcomes.size()), percent(succeeded, outcomes.size())};
}

// ---- BLEU --------------------------------------------------------------------

std::vector<std::string> bleu_tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty())
            out.push_back(std::move(word));
        word.clear();
    };
    for (char c : text) {
        if (is_word_char(c)) {
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
            if (!std::isspace(static_cast<unsigned char>(c)))
                out.emplace_back(1, c);
        }
    }
    flush();
    return out;
}

double corpus_bleu(std::span<const std::string> candidates, std::span<const std::string> references) {
    if (candidates.size() != references.size())
        throw AlignmentError(candidates.size(), references.size());
    if (candidates.empty())
        throw MetricUndefined("BLEU of an empty corpus");

    constexpr int kMaxOrder = 4;
    constexpr double kEpsilon = 1e-9;
    std::size_t matches[kMaxOrder] = {}, cand_total[kMaxOrder] = {}, ref_total[kMaxOrder] = {};
    std::size_t c = 0, r = 0;
    using Gram = std::vector<std::string>;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto cand = bleu_tokenize(candidates[i]);
        const auto ref = bleu_tokenize(references[i]);
        c += cand.size();
        r += ref.size();
        for (int n = 1; n <= kMaxOrder; ++n) {
            std::map<Gram, std::size_t> ref_counts, cand_counts;
            for (std::size_t k = 0; k + n <= ref.size(); ++k)
                ++ref_counts[Gram(ref.begin() + static_cast<long>(k), ref.begin() + static_cast<long>(k + n))];
            for (std::size_t k = 0; k + n <= cand.size(); ++k)
                ++cand_counts[Gram(cand.begin() + static_cast<long>(k), cand.begin() + static_cast<long>(k + n))];
            for (const auto& [g, count] : cand_counts) {
                cand_total[n - 1] += count;
                auto it = ref_counts.find(g);
                if (it != ref_counts.end())
                    matches[n - 1] += std::min(count, it->second);
            }
            for (const auto& [g, count] : ref_counts)
                ref_total[n - 1] += count;
        }
    }
    if (c == 0)
        return 0.0;

    double log_sum = 0.0;
    for (int n = 0; n < kMaxOrder; ++n) {
        double p;
        if (cand_total[n] == 0 && ref_total[n] == 0)
            p = 1.0;
        else if (matches[n] == 0)
            p = kEpsilon;
        else
            p = static_cast<double>(matches[n]) / static_cast<double>(cand_total[n]);
        log_sum += std::log(p);
    }
    const double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
    return bp * std::exp(log_sum / kMaxOrder);
}

// ---- readability ----------------------------------------------------------------

int count_syllables(std::string_view word) {
    std::string w;
    for (char c : word)
        if (std::isalpha(static_cast<unsigned char>(c)))
            w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (w.empty())
        return 1;
    auto vowel = [](char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; };
    int groups = 0;
    bool prev = false;
    for (char c : w) {
        bool v = vowel(c);
        if (v && !prev)
            ++groups;
        prev = v;
    }
    const std::size_t n = w.size();
    if (groups > 1) {
        if (n >= 3 && w.ends_with("le") && !vowel(w[n - 3])) {
            // "table", "simple": the final syllable is voiced
        } else if (w.ends_with("e")) {
            --groups;
        } else if (n >= 3 && w.ends_with("ed") && w[n - 3] != 't' && w[n - 3] != 'd') {
            --groups;
        }
    }
    return std::max(groups, 1);
}

Readability readability(std::string_view text) {
    Readability r;
    bool open_sentence = false;
    std::string token;
    auto flush = [&] {
        bool has_alnum = false;
        for (char c : token)
            has_alnum = has_alnum || std::isalnum(static_cast<unsigned char>(c));
        if (has_alnum) {
            ++r.words;
            const int s = count_syllables(token);
            r.syllables += static_cast<std::size_t>(s);
            r.polysyllables += s >= 3;
            open_sentence = true;
        }
        token.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const bool decimal_point = c == '.' && i > 0 && i + 1 < text.size() &&
                                   std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                                   std::isdigit(static_cast<unsigned char>(text[i + 1]));
        if (decimal_point) {
            token.push_back(c);
        } else if (c == '.' || c == '!' || c == '?') {
            flush();
            if (open_sentence)
                ++r.sentences;
            open_sentence = false;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    if (open_sentence)
        ++r.sentences;
    if (r.words == 0)
        throw MetricUndefined("readability of a text without words");

    const double w = static_cast<double>(r.words);
    const double s = static_cast<double>(r.sentences);
    const double y = static_cast<double>(r.syllables);
    r.fkre = 206.835 - 1.015 * (w / s) - 84.6 * (y / w);
    r.fkgl = 0.39 * (w / s) + 11.8 * (y / w) - 15.59;
    r.smog = 1.0430 * std::sqrt(static_cast<double>(r.polysyllables) * 30.0 / s) + 3.1291;
    r.smog_valid = r.sentences >= 30;
    return r;
}

nlohmann::json Readability::to_json() const {
    return {{"smog", smog},       {"fkgl", fkgl},           {"fkre", fkre},
            {"words", words},     {"sentences", sentences}, {"syllables", syllables},
            {"polysyllables", polysyllables}, {"smog_valid", smog_valid}};
}

std::vector<std::string> system_template_corpus(const KnowledgeBase& kb, const TemplatePack& pack,
                                                const UnitTable& units) {
    std::vector<std::string> out;
    for (const auto& record : kb.records()) {
        Bindings b;
        for (const auto& [rel, value] : record.slots)
            b[std::string(to_string(slot_of(rel)))] = value;
        b["count"] = std::to_string(kb.lookup({{Relation::food, record.slots.at(Relation::food)}}).size());
        b["salt"] = format_presentation(salt_for(record, record.serving_weight, record.serving_metric, units));
        b["foodweight"] = format_presentation(record.serving_weight);
        b["metric"] = record.serving_metric;
        b["nutrient"] = "salt";
        for (const auto& [cat, templates] : pack.categories()) {
            if (cat == "initial" || cat.starts_with("answer.") || cat.starts_with("change."))
                continue;
            for (const auto& t : templates) {
                try {
                    out.push_back(render_template(t, b));
                } catch (const TemplateError&) {
                    // slot the record does not have
                }
            }
        }
    }
    return out;
}

nlohmann::json MetricsReport::to_json() const {
    return {{"inform", inform},
            {"success", success},
            {"bleu", bleu},
            {"joint_accuracy", joint_accuracy},
            {"slot_accuracy", slot_accuracy},
            {"readability", readability.to_json()},
            {"dialogues", dialogues},
            {"turns", turns}};
}

std::string_view to_string(PredictorKind k) {
    switch (k) {
    case PredictorKind::reference: return "reference";
    case PredictorKind::corrupting: return "corrupting";
    case PredictorKind::remote: return "remote";
    }
    return "reference";
}

std::optional<PredictorKind> predictor_kind_from_string(std::string_view s) {
    for (PredictorKind k : {PredictorKind::reference, PredictorKind::corrupting, PredictorKind::remote})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

nlohmann::json EvaluationResult::to_json() const {
    return {{"predictor", std::string(to_string(predictor))},
            {"pre_correction", pre.to_json()},
            {"post_correction", post.to_json()},
            {"clean_unique_fraction", clean_unique_fraction}};
}

std::string EvaluationResult::table(bool with_correction) const {
    std::ostringstream os;
    os << std::fixed;
    os << std::left << std::setw(18) << "" << std::right << std::setw(8) << "Inform" << std::setw(9) << "Success"
       << std::setw(8) << "BLEU" << std::setw(16) << "Joint Accuracy" << '\n';
    auto row = [&](const char* label, const MetricsReport& m) {
        os << std::left << std::setw(18) << label << std::right << std::setprecision(2) << std::setw(8) << m.inform
           << std::setw(9) << m.success << std::setprecision(4) << std::setw(8) << m.bleu << std::setprecision(2)
           << std::setw(16) << m.joint_accuracy << '\n';
    };
    row("pre-correction", pre);
    if (with_correction)
        row("post-correction", post);
    return os.str();
}

// ---- evaluation driver ------------------------------------------------------------

namespace {

// The reply a system would give for this outcome, in the corpus' own words.
std::string render_reply(const CorrectionOutcome& outcome, const BeliefState& used, const TemplatePack& pack) {
    Bindings b;
    for (const auto& [slot, value] : used.slots)
        b[std::string(to_string(slot))] = value;
    try {
        if (outcome.record_id && used.salt_value) {
            b["salt"] = format_presentation(*used.salt_value);
            b["foodweight"] = format_presentation(*outcome.weight);
            b["metric"] = outcome.metric;
            return render_template(pack.get("inform").front(), b);
        }
        if (outcome.status == CorrectionStatus::ambiguous) {
            b["count"] = std::to_string(outcome.candidates);
            return render_template(pack.get("unresolved").front(), b);
        }
        if (used.has(Slot::food))
            return render_template(pack.get("no_match").front(), b);
    } catch (const TemplateError&) {
    }
    return render_template(pack.get("not_found").front(), b);
}

struct Side {
    std::vector<BeliefState> predictions;
    std::vector<DialogueOutcome> outcomes;
    std::vector<std::string> candidates;
};

MetricsReport summarize(const Side& side, std::span<const BeliefState> gold, std::span<const std::string> refs,
                        std::size_t dialogues) {
    MetricsReport m;
    m.dialogues = dialogues;
    m.turns = gold.size();
    auto is = inform_success(side.outcomes);
    m.inform = is.inform;
    m.success = is.success;
    if (!gold.empty()) {
        m.joint_accuracy = joint_accuracy(side.predictions, gold, true);
        m.slot_accuracy = joint_accuracy(side.predictions, gold, false);
    }
    if (!side.candidates.empty()) {
        m.bleu = corpus_bleu(side.candidates, refs);
        std::string text;
        for (const auto& c : side.candidates)
            text += c + " ";
        m.readability = readability(text);
    }
    return m;
}

} // namespace

EvaluationResult evaluate_corpus(const Corpus& corpus, const KnowledgeBase& kb, const EvalOptions& options,
                                 const UnitTable& units, const TemplatePack& pack) {
    if (corpus.dialogues.empty())
        throw MetricUndefined("cannot evaluate an empty corpus");
    options.corruption.validate();
    ReferenceTracker tracker(kb, pack, units);
    std::unique_ptr<BeliefPredictor> live;
    if (options.predictor == PredictorKind::reference)
        live = std::make_unique<ReferencePredictor>(tracker);
    else if (options.predictor == PredictorKind::remote)
        live = std::make_unique<RemotePredictor>(options.remote);

    Side pre, post;
    std::vector<BeliefState> gold;
    std::vector<std::string> refs;
    std::size_t clean = 0;

    for (std::size_t di = 0; di < corpus.dialogues.size(); ++di) {
        const Dialogue& d = corpus.dialogues[di];
        std::optional<std::size_t> last_user;
        BeliefState last_pred;
        for (std::size_t ti = 0; ti < d.turns.size(); ++ti) {
            const Turn& turn = d.turns[ti];
            if (turn.speaker != Speaker::user)
                continue;
            BeliefState pred;
            if (live) {
                try {
                    pred = live->predict(context_of(d, ti + 1));
                } catch (const BeliefParseError&) {
                    pred = {};
                }
            } else {
                Rng rng(derive_seed(derive_seed(options.corruption.seed, di), ti));
                pred = corrupting_predict(turn.belief, options.corruption, kb, rng);
            }
            BeliefState fixed = pred.has(Slot::food) ? correct(pred, kb, units).belief : pred;
            pre.predictions.push_back(pred);
            post.predictions.push_back(std::move(fixed));
            gold.push_back(turn.belief);
            last_user = ti;
            last_pred = std::move(pred);
        }
        if (!last_user)
            continue;

        CorrectionOutcome outcome;
        outcome.belief = last_pred;
        if (last_pred.has(Slot::food))
            outcome = correct(last_pred, kb, units);
        DialogueOutcome before{outcome.record_id, last_pred.salt_value, d.goal.record_id, d.goal.salt_mg};
        DialogueOutcome after{outcome.record_id, outcome.belief.salt_value, d.goal.record_id, d.goal.salt_mg};
        pre.outcomes.push_back(before);
        post.outcomes.push_back(after);
        pre.candidates.push_back(render_reply(outcome, last_pred, pack));
        post.candidates.push_back(render_reply(outcome, outcome.belief, pack));
        refs.push_back(d.turns.back().utterance);

        const BeliefState& gold_final = d.turns[*last_user].belief;
        if (same_belief(last_pred, gold_final, false)) {
            auto g = correct(gold_final, kb, units);
            clean += g.resolved() && g.record_id == d.goal.record_id;
        }
    }

    EvaluationResult result;
    result.predictor = options.predictor;
    result.pre = summarize(pre, gold, refs, corpus.dialogues.size());
    result.post = summarize(post, gold, refs, corpus.dialogues.size());
    result.clean_unique_fraction =
        corpus.dialogues.empty() ? 0.0
                                 : static_cast<double>(clean) / static_cast<double>(corpus.dialogues.size());
    return result;
}

} // namespace saltdialog
