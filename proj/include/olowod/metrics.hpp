#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "olowod/model.hpp"

namespace olowod {

// One evaluated test record. unknown_truth is derived from the schedule's
// current unknown set, never from the record itself.
struct EvalRecord {
    std::int64_t sample_id = 0;
    int true_category = 0;
    bool unknown_truth = false;
    Prediction prediction;
};

// Which categories count as previous vs current at the evaluation point;
// known = previous + current.
struct ClassSplit {
    std::vector<int> previous;
    std::vector<int> current;
};

struct MetricsReport {
    std::optional<double> map_previous;  // absent for the first task
    std::optional<double> map_current;
    std::optional<double> map_both;
    std::optional<double> wi;            // absent when no known prediction was made
    long a_ose = 0;
    std::optional<double> ur;            // absent when the unknown set is empty
    std::map<int, double> per_class_ap;
    std::vector<int> undefined_ap_classes;  // known classes with no test positives
};

// All-point interpolated AP over a ranking sorted by descending score.
// positives == 0 is the caller's error (excluded classes are reported, not scored).
double average_precision(const std::vector<std::pair<double, bool>>& ranked, long positives);

double wilderness_impact(double p_known, double p_known_union_unknown);

// Unknown ground-truth records claimed as some known class.
long a_ose(const std::vector<EvalRecord>& records);

// Fraction of unknown ground truth flagged UNKNOWN; absent when none exist.
std::optional<double> unknown_recall(const std::vector<EvalRecord>& records);

// Per-class AP over per-class confidence rankings of all records (rejection
// does not hide a record's scores), plus WI / A-OSE / UR.
MetricsReport build_report(const std::vector<EvalRecord>& records, const ClassSplit& split);

}  // namespace olowod
