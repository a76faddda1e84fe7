#include "olowod/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "olowod/error.hpp"

namespace olowod {

double average_precision(const std::vector<std::pair<double, bool>>& ranked, long positives) {
    if (positives <= 0)
        throw DegenerateInput("average_precision: class has no positives");
    double sum = 0.0;
    long correct_so_far = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (k > 0 && ranked[k].first > ranked[k - 1].first)
            throw ContractViolation("average_precision: ranking not sorted by descending score");
        if (ranked[k].second) {
            correct_so_far += 1;
            sum += static_cast<double>(correct_so_far) / static_cast<double>(k + 1);
        }
    }
    return sum / static_cast<double>(positives);
}

double wilderness_impact(double p_known, double p_known_union_unknown) {
    if (!(p_known_union_unknown > 0.0))
        throw DegenerateInput("wilderness_impact: zero denominator");
    return p_known / p_known_union_unknown - 1.0;
}

long a_ose(const std::vector<EvalRecord>& records) {
    long count = 0;
    for (const auto& r : records)
        if (r.unknown_truth && r.prediction.label != kUnknownLabel) ++count;
    return count;
}

std::optional<double> unknown_recall(const std::vector<EvalRecord>& records) {
    long unknowns = 0, rejected = 0;
    for (const auto& r : records) {
        if (!r.unknown_truth) continue;
        ++unknowns;
        if (r.prediction.label == kUnknownLabel) ++rejected;
    }
    if (unknowns == 0) return std::nullopt;
    return static_cast<double>(rejected) / static_cast<double>(unknowns);
}

namespace {

double score_for(const Prediction& p, int class_id) {
    for (const auto& [id, s] : p.per_class_scores)
        if (id == class_id) return s;
    return 0.0;
}

std::optional<double> class_ap(const std::vector<EvalRecord>& records, int class_id) {
    long positives = 0;
    std::vector<std::pair<double, std::size_t>> order;  // (-score, record index)
    order.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].true_category == class_id) ++positives;
        order.emplace_back(-score_for(records[i].prediction, class_id), i);
    }
    if (positives == 0) return std::nullopt;
    // descending score; equal scores break toward the smaller sample id
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return records[a.second].sample_id < records[b.second].sample_id;
    });
    std::vector<std::pair<double, bool>> ranked;
    ranked.reserve(order.size());
    for (const auto& [neg_score, idx] : order)
        ranked.emplace_back(-neg_score, records[idx].true_category == class_id);
    return average_precision(ranked, positives);
}

std::optional<double> mean_over(const std::map<int, double>& per_class,
                                const std::vector<int>& classes) {
    double sum = 0.0;
    long n = 0;
    for (int c : classes) {
        auto it = per_class.find(c);
        if (it == per_class.end()) continue;
        sum += it->second;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace

MetricsReport build_report(const std::vector<EvalRecord>& records, const ClassSplit& split) {
    MetricsReport report;

    std::vector<int> known = split.previous;
    known.insert(known.end(), split.current.begin(), split.current.end());

    for (int c : known) {
        const std::optional<double> ap = class_ap(records, c);
        if (ap)
            report.per_class_ap[c] = *ap;
        else
            report.undefined_ap_classes.push_back(c);
    }
    report.map_previous = mean_over(report.per_class_ap, split.previous);
    report.map_current = mean_over(report.per_class_ap, split.current);
    report.map_both = mean_over(report.per_class_ap, known);

    long correct = 0, claimed_on_known = 0;
    for (const auto& r : records) {
        if (r.unknown_truth) continue;
        if (r.prediction.label == kUnknownLabel) continue;
        ++claimed_on_known;
        if (r.prediction.label == r.true_category) ++correct;
    }
    report.a_ose = a_ose(records);
    report.ur = unknown_recall(records);
    if (claimed_on_known > 0 && correct > 0) {
        const double p_known =
            static_cast<double>(correct) / static_cast<double>(claimed_on_known);
        const double p_both = static_cast<double>(correct) /
                              static_cast<double>(claimed_on_known + report.a_ose);
        report.wi = wilderness_impact(p_known, p_both);
    }
    return report;
}

}  // namespace olowod
