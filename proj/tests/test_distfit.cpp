#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "olowod/distfit.hpp"
#include "olowod/error.hpp"
#include "olowod/rng.hpp"

using namespace olowod;

namespace {

std::vector<double> draw(FamilyId f, const DistParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (double& x : out) x = sample_one(f, p, rng);
    return out;
}

void check_report_invariants(const FitReport& report) {
    // at most one entry per family
    CHECK(report.results.size() == kAllFamilies.size());
    std::set<std::string> names;
    for (const auto& r : report.results) names.insert(family_name(r.family));
    CHECK(names.size() == report.results.size());
    // converged prefix sorted ascending by sse, non-converged strictly after
    bool seen_nonconverged = false;
    double prev = -1.0;
    for (const auto& r : report.results) {
        if (!r.converged) {
            seen_nonconverged = true;
            continue;
        }
        CHECK(!seen_nonconverged);
        CHECK(std::isfinite(r.sse));
        CHECK(r.sse >= prev);
        prev = r.sse;
    }
}

}  // namespace

TEST_CASE("closed-form estimators match their pinned examples") {
    const EstimateResult norm = estimate_params(FamilyId::norm, {-1.0, 1.0});
    CHECK(norm.params.loc == doctest::Approx(0.0));
    CHECK(norm.params.scale == doctest::Approx(1.0));  // population std

    const EstimateResult uni = estimate_params(FamilyId::uniform, {2.0, 3.0, 5.0});
    CHECK(uni.params.loc == doctest::Approx(2.0));
    CHECK(uni.params.scale == doctest::Approx(3.0));

    const EstimateResult lap = estimate_params(FamilyId::laplace, {0.0, 1.0, 2.0, 7.0});
    CHECK(lap.params.loc == doctest::Approx(1.5));  // median
    CHECK(lap.params.scale == doctest::Approx((1.5 + 0.5 + 0.5 + 5.5) / 4.0));

    CHECK_THROWS_AS(estimate_params(FamilyId::norm, {3.0, 3.0, 3.0}), DegenerateInput);
    CHECK_THROWS_AS(estimate_params(FamilyId::norm, {3.0}), DegenerateInput);
}

TEST_CASE("logistic and cauchy quantile estimators") {
    Rng rng(31);
    const std::vector<double> s = draw(FamilyId::logistic, {3.0, 0.7, 0.0, 0.0}, 4000, 77);
    const EstimateResult est = estimate_params(FamilyId::logistic, s);
    CHECK(est.params.loc == doctest::Approx(3.0).epsilon(0.05));
    CHECK(est.params.scale == doctest::Approx(0.7).epsilon(0.10));

    const std::vector<double> c = draw(FamilyId::cauchy, {-2.0, 1.5, 0.0, 0.0}, 4000, 78);
    const EstimateResult cest = estimate_params(FamilyId::cauchy, c);
    CHECK(cest.params.loc == doctest::Approx(-2.0).epsilon(0.15));
    CHECK(cest.params.scale == doctest::Approx(1.5).epsilon(0.15));
    (void)rng;
}

TEST_CASE("gamma MLE recovers the generating shape within 0.3") {
    const std::vector<double> s = draw(FamilyId::gamma, {0.0, 1.0, 2.0, 0.0}, 1600, 1234);
    const EstimateResult est = estimate_params(FamilyId::gamma, s);
    CHECK(est.converged);
    CHECK(est.params.shape_a == doctest::Approx(2.0).epsilon(0.15));
    CHECK(std::abs(est.params.shape_a - 2.0) < 0.3);
}

TEST_CASE("sse_score is zero when the fitted pdf equals the empirical density") {
    std::vector<double> samples;
    for (int i = 0; i < 10; ++i) samples.push_back(0.05 + 0.1 * i);
    DistParams p{0.05, 0.90, 0.0, 0.0};
    CHECK(sse_score(FamilyId::uniform, p, samples, 10) < 1e-18);
}

TEST_CASE("sse_score prefers the correct location") {
    const std::vector<double> s = draw(FamilyId::norm, {0.0, 1.0, 0.0, 0.0}, 2000, 55);
    const double good = sse_score(FamilyId::norm, {0.0, 1.0, 0.0, 0.0}, s, 100);
    const double bad = sse_score(FamilyId::norm, {5.0, 1.0, 0.0, 0.0}, s, 100);
    CHECK(good < bad);
}

TEST_CASE("sse_score contract errors") {
    CHECK_THROWS_AS(sse_score(FamilyId::norm, {0.0, 1.0, 0.0, 0.0}, {1.0, 2.0}, 5),
                    ContractViolation);
    CHECK_THROWS_AS(sse_score(FamilyId::norm, {0.0, 1.0, 0.0, 0.0}, {2.0, 2.0, 2.0}, 10),
                    DegenerateInput);
}

TEST_CASE("bin count changes the score but not the winning family") {
    const std::vector<double> s = draw(FamilyId::norm, {0.0, 1.0, 0.0, 0.0}, 1600, 99);
    for (int bins : {50, 100, 200}) {
        const FitReport report = fit_all(s, bins);
        check_report_invariants(report);
        REQUIRE(report.best() != nullptr);
        CHECK(report.best()->family == FamilyId::norm);
    }
}

TEST_CASE("fit_all ranks the generating family first for norm and uniform") {
    int norm_wins = 0, uniform_wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::vector<double> s = draw(FamilyId::norm, {0.0, 1.0, 0.0, 0.0}, 1600, seed);
        const FitReport report = fit_all(s, 100);
        check_report_invariants(report);
        if (report.best() && report.best()->family == FamilyId::norm) ++norm_wins;

        const std::vector<double> u =
            draw(FamilyId::uniform, {0.0, 1.0, 0.0, 0.0}, 1600, seed + 100);
        const FitReport ureport = fit_all(u, 100);
        check_report_invariants(ureport);
        if (ureport.best() && ureport.best()->family == FamilyId::uniform) ++uniform_wins;
    }
    CHECK(norm_wins >= 9);
    CHECK(uniform_wins >= 9);
}

TEST_CASE("fit_all rejects degenerate data") {
    CHECK_THROWS_AS(fit_all(std::vector<double>(200, 4.2), 100), DegenerateInput);
}

TEST_CASE("report invariants hold on awkward inputs") {
    Rng rng(61);
    // bimodal
    std::vector<double> bimodal;
    for (int i = 0; i < 500; ++i) bimodal.push_back(-3.0 + 0.3 * rng.normal());
    for (int i = 0; i < 500; ++i) bimodal.push_back(3.0 + 0.3 * rng.normal());
    check_report_invariants(fit_all(bimodal, 100));
    // heavy right tail
    std::vector<double> skew;
    for (int i = 0; i < 1000; ++i) skew.push_back(std::exp(rng.normal()));
    check_report_invariants(fit_all(skew, 100));
}

TEST_CASE("sample_noise determinism and shape") {
    FitResult fit;
    fit.family = FamilyId::norm;
    fit.params = {2.0, 0.5, 0.0, 0.0};
    fit.converged = true;

    const FeatureMap a = sample_noise(fit, 3, 4, 4, 2024);
    const FeatureMap b = sample_noise(fit, 3, 4, 4, 2024);
    CHECK(a.values.size() == 48);
    CHECK(a.values == b.values);  // bitwise

    const FeatureMap c = sample_noise(fit, 3, 4, 4, 2025);
    CHECK(a.values != c.values);

    FitResult broken = fit;
    broken.converged = false;
    CHECK_THROWS_AS(sample_noise(broken, 1, 1, 1, 7), ContractViolation);
}

TEST_CASE("sampled moments match fitted parameters at n=1e5") {
    struct Case {
        FamilyId family;
        DistParams params;
        double mean, sd;
    };
    const std::vector<Case> cases{
        {FamilyId::norm, {2.0, 0.5, 0.0, 0.0}, 2.0, 0.5},
        {FamilyId::uniform, {1.0, 2.0, 0.0, 0.0}, 2.0, 2.0 / std::sqrt(12.0)},
        {FamilyId::laplace, {-1.0, 0.5, 0.0, 0.0}, -1.0, 0.5 * std::sqrt(2.0)},
        {FamilyId::logistic, {0.5, 0.3, 0.0, 0.0}, 0.5, 0.3 * M_PI / std::sqrt(3.0)},
    };
    for (const Case& c : cases) {
        const std::vector<double> s = draw(c.family, c.params, 100000, 4321);
        double m = 0.0;
        for (double x : s) m += x;
        m /= static_cast<double>(s.size());
        double var = 0.0;
        for (double x : s) var += (x - m) * (x - m);
        var /= static_cast<double>(s.size());
        CHECK(std::abs(m - c.mean) < 0.01 * std::max(1.0, std::abs(c.mean)) + 0.01);
        CHECK(std::abs(std::sqrt(var) - c.sd) < 0.015);
    }
}

TEST_CASE("gamma and cosine samplers hit their analytic moments") {
    // gamma(shape 3, scale 0.5): mean 1.5, var 0.75
    const std::vector<double> g = draw(FamilyId::gamma, {0.0, 0.5, 3.0, 0.0}, 100000, 777);
    double m = 0.0;
    for (double x : g) m += x;
    m /= static_cast<double>(g.size());
    CHECK(m == doctest::Approx(1.5).epsilon(0.01));

    // cosine(loc 1, scale 2): mean 1, var scale^2*(pi^2/3 - 2)
    const std::vector<double> c = draw(FamilyId::cosine, {1.0, 2.0, 0.0, 0.0}, 100000, 778);
    double cm = 0.0;
    for (double x : c) cm += x;
    cm /= static_cast<double>(c.size());
    double cvar = 0.0;
    for (double x : c) cvar += (x - cm) * (x - cm);
    cvar /= static_cast<double>(c.size());
    CHECK(cm == doctest::Approx(1.0).epsilon(0.02));
    CHECK(cvar == doctest::Approx(4.0 * (M_PI * M_PI / 3.0 - 2.0)).epsilon(0.03));
    for (double x : c) {
        CHECK(x >= 1.0 - 2.0 * M_PI - 1e-9);
        CHECK(x <= 1.0 + 2.0 * M_PI + 1e-9);
    }
}

TEST_CASE("family names round-trip") {
    for (FamilyId f : kAllFamilies) CHECK(family_from_name(family_name(f)) == f);
    CHECK_THROWS_AS(family_from_name("weibull"), ContractViolation);
}
