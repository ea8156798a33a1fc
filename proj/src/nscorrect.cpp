#include "saltdialog/nscorrect.hpp"

#include "saltdialog/convgen.hpp"
#include "saltdialog/text.hpp"

namespace saltdialog {

std::string_view to_string(CorrectionStatus s) {
    switch (s) {
    case CorrectionStatus::retrieved: return "retrieved";
    case CorrectionStatus::computed: return "computed";
    case CorrectionStatus::ambiguous: return "ambiguous";
    case CorrectionStatus::not_found: return "not_found";
    }
    return "not_found";
}

CorrectionOutcome correct(const BeliefState& predicted, const KnowledgeBase& kb, const UnitTable& units) {
    CorrectionOutcome out;
    out.belief = predicted;
    if (!predicted.has(Slot::food)) {
        out.reason = "no food slot";
        return out;
    }
    auto matches = kb.lookup(predicted.relation_slots());
    out.candidates = matches.size();
    if (matches.empty()) {
        out.reason = "no record matches the slots";
        return out;
    }
    if (matches.size() > 1) {
        out.status = CorrectionStatus::ambiguous;
        out.reason = std::to_string(matches.size()) + " records match";
        return out;
    }

    const FoodRecord& record = *matches.front();
    double weight = record.serving_weight;
    std::string metric = record.serving_metric;
    const std::string* weight_text = predicted.get(Slot::foodweight);
    const std::string* metric_text = predicted.get(Slot::metric);
    if (metric_text)
        metric = units.canonical(*metric_text);
    if (weight_text) {
        auto w = parse_double(*weight_text);
        if (!w || *w <= 0.0) {
            out.reason = "foodweight '" + *weight_text + "' is not a positive number";
            return out;
        }
        weight = *w;
    } else if (metric != units.canonical(record.serving_metric)) {
        weight = 1.0;
    }

    double salt = 0.0;
    try {
        salt = salt_for(record, weight, metric, units);
    } catch (const UnitMismatch& e) {
        out.reason = e.what();
        return out;
    }
    out.status = is_standard_serving(record, weight, metric, units) ? CorrectionStatus::retrieved
                                                                      : CorrectionStatus::computed;
    out.belief.salt_value = salt;
    out.record_id = record.id;
    out.weight = weight;
    out.metric = metric;
    return out;
}

std::vector<CorrectionOutcome> correct_corpus(std::span<const BeliefState> predictions,
                                              std::span<const Dialogue> gold_dialogues, const KnowledgeBase& kb,
                                              const UnitTable& units) {
    if (predictions.size() != gold_dialogues.size())
        throw AlignmentError(predictions.size(), gold_dialogues.size());
    std::vector<CorrectionOutcome> out;
    out.reserve(predictions.size());
    for (const auto& p : predictions)
        out.push_back(correct(p, kb, units));
    return out;
}

} // namespace saltdialog
