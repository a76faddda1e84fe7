#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "olowod/error.hpp"
#include "olowod/metrics.hpp"
#include "olowod/rng.hpp"

using namespace olowod;

namespace {

EvalRecord make_record(std::int64_t id, int true_cat, bool unknown, int label, double s1,
                       double s2) {
    EvalRecord r;
    r.sample_id = id;
    r.true_category = true_cat;
    r.unknown_truth = unknown;
    r.prediction.label = label;
    r.prediction.score = std::max(s1, s2);
    r.prediction.per_class_scores = {{1, s1}, {2, s2}};
    return r;
}

// The six-record hand instance: previous class 1, current class 2, class 3
// unknown. Scores chosen so every metric is computable by hand:
//   class-1 ranking: r1(.9 TP) r5(.7 F) r6(.48 F) r4(.45 F) r2(.4 TP) r3(.2 F)
//     AP_1 = (1/1 + 2/5)/2 = 0.7
//   class-2 ranking: r3(.8 TP) r2(.6 F) r4(.55 TP) r6(.52 F) r5(.3 F) r1(.1 F)
//     AP_2 = (1/1 + 2/3)/2 = 5/6
//   correct known claims 3 of 4 -> P_K = 0.75; plus one unknown claimed (r5)
//     -> P_KU = 3/5 = 0.6; WI = 0.75/0.6 - 1 = 0.25
//   A-OSE = 1 (r5), UR = 1/2 (r6 rejected of two unknowns)
std::vector<EvalRecord> hand_instance() {
    return {
        make_record(1, 1, false, 1, 0.9, 0.1),
        make_record(2, 1, false, 2, 0.4, 0.6),
        make_record(3, 2, false, 2, 0.2, 0.8),
        make_record(4, 2, false, 2, 0.45, 0.55),
        make_record(5, 3, true, 1, 0.7, 0.3),
        make_record(6, 3, true, kUnknownLabel, 0.48, 0.52),
    };
}

}  // namespace

TEST_CASE("average_precision pinned rankings") {
    CHECK(average_precision({{0.9, true}, {0.8, true}, {0.1, false}}, 2) == doctest::Approx(1.0));
    CHECK(average_precision({{0.9, false}, {0.8, false}}, 3) == doctest::Approx(0.0));
    // [TP, FP, TP] with 2 positives: (1/1 + 2/3)/2
    CHECK(average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK_THROWS_AS(average_precision({{0.9, true}}, 0), DegenerateInput);
    CHECK_THROWS_AS(average_precision({{0.1, true}, {0.9, false}}, 1), ContractViolation);
}

TEST_CASE("average_precision is invariant under monotone score rescaling") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<double, bool>> ranked;
        long positives = 0;
        double score = 1.0;
        const std::size_t n = 3 + rng.bounded(20);
        for (std::size_t i = 0; i < n; ++i) {
            score -= rng.uniform(0.001, 0.05);
            const bool correct = rng.next_unit() < 0.4;
            if (correct) ++positives;
            ranked.emplace_back(score, correct);
        }
        if (positives == 0) continue;
        std::vector<std::pair<double, bool>> rescaled = ranked;
        for (auto& [s, c] : rescaled) s = 10.0 * std::exp(s) + 3.0;  // strictly monotone
        CHECK(average_precision(ranked, positives) ==
              doctest::Approx(average_precision(rescaled, positives)).epsilon(1e-12));
    }
}

TEST_CASE("wilderness_impact pinned values") {
    CHECK(wilderness_impact(0.7, 0.7) == doctest::Approx(0.0));
    CHECK(wilderness_impact(0.5, 0.4) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(wilderness_impact(0.5, 0.0), DegenerateInput);
}

TEST_CASE("a_ose and unknown_recall on the five-unknown instance") {
    std::vector<EvalRecord> records;
    // five unknowns: two claimed as known, three rejected
    records.push_back(make_record(1, 9, true, 1, 0.8, 0.1));
    records.push_back(make_record(2, 9, true, 2, 0.2, 0.9));
    records.push_back(make_record(3, 9, true, kUnknownLabel, 0.3, 0.3));
    records.push_back(make_record(4, 9, true, kUnknownLabel, 0.4, 0.2));
    records.push_back(make_record(5, 9, true, kUnknownLabel, 0.1, 0.4));
    CHECK(a_ose(records) == 2);
    CHECK(unknown_recall(records).value() == doctest::Approx(0.6));

    std::vector<EvalRecord> no_unknowns{make_record(1, 1, false, 1, 0.9, 0.1)};
    CHECK(a_ose(no_unknowns) == 0);
    CHECK(!unknown_recall(no_unknowns).has_value());

    std::vector<EvalRecord> all_rejected{make_record(1, 9, true, kUnknownLabel, 0.3, 0.3),
                                         make_record(2, 9, true, kUnknownLabel, 0.3, 0.3),
                                         make_record(3, 9, true, kUnknownLabel, 0.3, 0.3)};
    CHECK(a_ose(all_rejected) == 0);
    CHECK(unknown_recall(all_rejected).value() == doctest::Approx(1.0));
}

TEST_CASE("rejection partition: a_ose plus recalled unknowns covers the unknown set") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EvalRecord> records;
        long unknowns = 0;
        const std::size_t n = 1 + rng.bounded(40);
        for (std::size_t i = 0; i < n; ++i) {
            const bool unknown = rng.next_unit() < 0.5;
            if (unknown) ++unknowns;
            const int label = rng.next_unit() < 0.5
                                  ? kUnknownLabel
                                  : (rng.next_unit() < 0.5 ? 1 : 2);
            records.push_back(make_record(static_cast<std::int64_t>(i), unknown ? 9 : 1,
                                          unknown, label, rng.next_unit(), rng.next_unit()));
        }
        if (unknowns == 0) continue;
        const double ur = unknown_recall(records).value();
        CHECK(a_ose(records) + std::lround(ur * static_cast<double>(unknowns)) == unknowns);
    }
}

TEST_CASE("build_report on the six-record hand instance") {
    const std::vector<EvalRecord> records = hand_instance();
    const ClassSplit split{{1}, {2}};
    const MetricsReport m = build_report(records, split);

    CHECK(m.per_class_ap.at(1) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m.per_class_ap.at(2) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(m.map_previous.value() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m.map_current.value() == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(m.map_both.value() == doctest::Approx(23.0 / 30.0).epsilon(1e-12));
    CHECK(m.wi.value() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(m.a_ose == 1);
    CHECK(m.ur.value() == doctest::Approx(0.5));
    CHECK(m.undefined_ap_classes.empty());
}

TEST_CASE("build_report is a pure function of its inputs") {
    const std::vector<EvalRecord> records = hand_instance();
    const ClassSplit split{{1}, {2}};
    const MetricsReport a = build_report(records, split);
    const MetricsReport b = build_report(records, split);
    CHECK(a.map_both.value() == b.map_both.value());
    CHECK(a.wi.value() == b.wi.value());
    CHECK(a.per_class_ap == b.per_class_ap);
}

TEST_CASE("first task: no previous classes, both equals current") {
    std::vector<EvalRecord> records{
        make_record(1, 1, false, 1, 0.9, 0.1),
        make_record(2, 2, false, 2, 0.1, 0.9),
    };
    const MetricsReport m = build_report(records, ClassSplit{{}, {1, 2}});
    CHECK(!m.map_previous.has_value());
    CHECK(m.map_both.value() == doctest::Approx(m.map_current.value()));
}

TEST_CASE("perfect classifier and rejector") {
    std::vector<EvalRecord> records{
        make_record(1, 1, false, 1, 0.9, 0.05),
        make_record(2, 2, false, 2, 0.05, 0.9),
        make_record(3, 9, true, kUnknownLabel, 0.3, 0.3),
        make_record(4, 9, true, kUnknownLabel, 0.3, 0.3),
    };
    const MetricsReport m = build_report(records, ClassSplit{{1}, {2}});
    CHECK(m.map_previous.value() == doctest::Approx(1.0));
    CHECK(m.map_current.value() == doctest::Approx(1.0));
    CHECK(m.map_both.value() == doctest::Approx(1.0));
    CHECK(m.wi.value() == doctest::Approx(0.0));
    CHECK(m.a_ose == 0);
    CHECK(m.ur.value() == doctest::Approx(1.0));
}

TEST_CASE("classes absent from the test set are reported, not scored") {
    std::vector<EvalRecord> records{make_record(1, 1, false, 1, 0.9, 0.1)};
    const MetricsReport m = build_report(records, ClassSplit{{}, {1, 2}});
    CHECK(m.per_class_ap.count(1) == 1);
    CHECK(m.per_class_ap.count(2) == 0);
    CHECK(m.undefined_ap_classes == std::vector<int>{2});
    CHECK(m.map_current.value() == doctest::Approx(1.0));  // mean over defined classes only
}
