#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "olowod/numeric.hpp"
#include "olowod/rng.hpp"

namespace olowod {

enum class FamilyId {
    alpha,
    beta,
    gamma,
    laplace,
    uniform,
    norm,
    cauchy,
    logistic,
    pareto,
    cosine,
};

inline constexpr std::array<FamilyId, 10> kAllFamilies = {
    FamilyId::alpha,   FamilyId::beta,  FamilyId::gamma,    FamilyId::laplace,
    FamilyId::uniform, FamilyId::norm,  FamilyId::cauchy,   FamilyId::logistic,
    FamilyId::pareto,  FamilyId::cosine};

std::string family_name(FamilyId f);
FamilyId family_from_name(const std::string& name);

// Location-scale convention: z = (x - loc) / scale, pdf(x) = f(z; shapes) / scale.
// shape_a: alpha a, beta a, gamma shape, pareto b. shape_b: beta b. Unused
// fields are zero.
struct DistParams {
    double loc = 0.0;
    double scale = 1.0;
    double shape_a = 0.0;
    double shape_b = 0.0;
};

int shape_count(FamilyId f);

struct EstimateResult {
    DistParams params;
    bool converged = true;  // false when the simplex search hit its iteration cap
};

struct FitResult {
    FamilyId family = FamilyId::norm;
    DistParams params;
    double sse = 0.0;
    bool converged = false;
};

struct FitReport {
    std::vector<FitResult> results;  // ascending sse, non-converged last
    std::size_t sample_count = 0;
    int bins = 0;

    const FitResult* best() const;  // first converged entry, nullptr if none
};

// Density at x; zero outside support, never NaN.
double pdf(FamilyId f, const DistParams& p, double x);

// norm/uniform/laplace/logistic/cauchy: closed-form moment/quantile estimators.
// alpha/beta/gamma/pareto/cosine: simplex MLE from moment-based starts, with
// positive-support families shifted by loc = min - 1e-6 and beta affinely
// rescaled into (0,1). Throws DegenerateInput on zero sample variance.
EstimateResult estimate_params(FamilyId f, const std::vector<double>& samples);

// Sum over equal-width bin centers of (empirical density - pdf(center))^2.
double sse_score(FamilyId f, const DistParams& p, const std::vector<double>& samples, int bins);

FitReport fit_all(const std::vector<double>& samples, int bins);

// One draw via inverse CDF or standard transforms, consuming `rng`.
double sample_one(FamilyId f, const DistParams& p, Rng& rng);

// i.i.d. fill of a (c,h,w) tensor; bitwise deterministic for a given seed.
// Throws ContractViolation on a non-converged fit.
FeatureMap sample_noise(const FitResult& fit, int c, int h, int w, std::uint64_t seed);

}  // namespace olowod
