#include "olowod/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "olowod/error.hpp"
#include "olowod/simplex.hpp"

namespace olowod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupportShift = 1e-6;  // offset below the sample minimum
constexpr double kBetaPadFraction = 0.01;  // keeps mapped samples off the (0,1) endpoints
constexpr double kFenceIqrMultiple = 10.0; // histogram outlier fence
constexpr int kMaxIter = 500;
constexpr double kParamTol = 1e-6;

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

double quantile_of(std::vector<double> sorted, double q) {
    // linear interpolation between order statistics
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// log pdf of the standardized variable; -inf outside support
double log_pdf_std(FamilyId f, const DistParams& p, double z) {
    switch (f) {
        case FamilyId::norm:
            return -0.5 * z * z - 0.5 * std::log(2.0 * M_PI);
        case FamilyId::uniform:
            return (z >= 0.0 && z <= 1.0) ? 0.0 : -kInf;
        case FamilyId::laplace:
            return -std::abs(z) - std::log(2.0);
        case FamilyId::logistic: {
            const double az = std::abs(z);
            return -az - 2.0 * std::log1p(std::exp(-az));
        }
        case FamilyId::cauchy:
            return -std::log(M_PI) - std::log1p(z * z);
        case FamilyId::gamma: {
            if (z <= 0.0) return -kInf;
            const double k = p.shape_a;
            return (k - 1.0) * std::log(z) - z - std::lgamma(k);
        }
        case FamilyId::beta: {
            if (z <= 0.0 || z >= 1.0) return -kInf;
            return (p.shape_a - 1.0) * std::log(z) + (p.shape_b - 1.0) * std::log1p(-z) -
                   log_beta_fn(p.shape_a, p.shape_b);
        }
        case FamilyId::pareto: {
            if (z < 1.0) return -kInf;
            const double b = p.shape_a;
            return std::log(b) - (b + 1.0) * std::log(z);
        }
        case FamilyId::alpha: {
            if (z <= 0.0) return -kInf;
            const double a = p.shape_a;
            const double t = a - 1.0 / z;
            return -2.0 * std::log(z) - 0.5 * t * t - 0.5 * std::log(2.0 * M_PI) -
                   std::log(normal_cdf(a));
        }
        case FamilyId::cosine: {
            if (z < -M_PI || z > M_PI) return -kInf;
            return std::log1p(std::cos(z)) - std::log(2.0 * M_PI);
        }
    }
    return -kInf;
}

// mean negative log-likelihood; +inf when infeasible
double mean_nll(FamilyId f, const DistParams& p, const std::vector<double>& samples) {
    if (!(p.scale > 0.0)) return kInf;
    double s = 0.0;
    for (double x : samples) {
        const double lp = log_pdf_std(f, p, (x - p.loc) / p.scale) - std::log(p.scale);
        if (!std::isfinite(lp)) return kInf;
        s += lp;
    }
    return -s / static_cast<double>(samples.size());
}

EstimateResult fit_simplex(FamilyId f, const std::vector<double>& samples,
                           const std::vector<double>& x0, const std::vector<double>& step,
                           const std::function<DistParams(const std::vector<double>&)>& unpack) {
    auto objective = [&](const std::vector<double>& x) {
        return mean_nll(f, unpack(x), samples);
    };
    SimplexResult r = nelder_mead(objective, x0, step, kMaxIter, kParamTol);
    EstimateResult out;
    out.params = unpack(r.x);
    out.converged = r.converged && std::isfinite(r.fval);
    return out;
}

}  // namespace

std::string family_name(FamilyId f) {
    switch (f) {
        case FamilyId::alpha: return "alpha";
        case FamilyId::beta: return "beta";
        case FamilyId::gamma: return "gamma";
        case FamilyId::laplace: return "laplace";
        case FamilyId::uniform: return "uniform";
        case FamilyId::norm: return "norm";
        case FamilyId::cauchy: return "cauchy";
        case FamilyId::logistic: return "logistic";
        case FamilyId::pareto: return "pareto";
        case FamilyId::cosine: return "cosine";
    }
    return "?";
}

FamilyId family_from_name(const std::string& name) {
    for (FamilyId f : kAllFamilies)
        if (family_name(f) == name) return f;
    throw ContractViolation("unknown distribution family: " + name);
}

int shape_count(FamilyId f) {
    switch (f) {
        case FamilyId::beta: return 2;
        case FamilyId::alpha:
        case FamilyId::gamma:
        case FamilyId::pareto: return 1;
        default: return 0;
    }
}

const FitResult* FitReport::best() const {
    for (const auto& r : results)
        if (r.converged) return &r;
    return nullptr;
}

double pdf(FamilyId f, const DistParams& p, double x) {
    if (!(p.scale > 0.0)) return 0.0;
    const double lp = log_pdf_std(f, p, (x - p.loc) / p.scale) - std::log(p.scale);
    return std::isfinite(lp) ? std::exp(lp) : 0.0;
}

EstimateResult estimate_params(FamilyId f, const std::vector<double>& samples) {
    if (samples.size() < 2)
        throw DegenerateInput("estimate_params: need at least two samples");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    if (!(hi > lo))
        throw DegenerateInput("estimate_params: zero sample variance");
    const double m = mean_of(samples);
    const double var = variance_of(samples, m);
    const double sd = std::sqrt(var);
    const double median = quantile_of(sorted, 0.5);

    EstimateResult res;
    switch (f) {
        case FamilyId::norm:
            res.params = {m, sd, 0.0, 0.0};
            return res;
        case FamilyId::uniform:
            res.params = {lo, hi - lo, 0.0, 0.0};
            return res;
        case FamilyId::laplace: {
            double mad = 0.0;
            for (double x : samples) mad += std::abs(x - median);
            mad /= static_cast<double>(samples.size());
            res.params = {median, mad, 0.0, 0.0};
            return res;
        }
        case FamilyId::logistic:
            res.params = {m, sd * std::sqrt(3.0) / M_PI, 0.0, 0.0};
            return res;
        case FamilyId::cauchy: {
            const double iqr = quantile_of(sorted, 0.75) - quantile_of(sorted, 0.25);
            res.params = {median, iqr / 2.0, 0.0, 0.0};
            return res;
        }
        case FamilyId::gamma: {
            const double loc = lo - kSupportShift;
            const double ms = m - loc;            // mean of the shifted data
            const double k0 = std::max(ms * ms / var, 1e-3);
            const double s0 = std::max(var / ms, 1e-12);
            auto unpack = [loc](const std::vector<double>& x) {
                return DistParams{loc, std::exp(x[1]), std::exp(x[0]), 0.0};
            };
            return fit_simplex(f, samples, {std::log(k0), std::log(s0)}, {0.5, 0.5}, unpack);
        }
        case FamilyId::beta: {
            // affine map onto (0,1) with a small pad so no sample sits on an endpoint
            const double pad = std::max(1e-9, kBetaPadFraction * (hi - lo));
            const double loc = lo - pad;
            const double scale = (hi - lo) + 2.0 * pad;
            const double my = (m - loc) / scale;
            const double vy = var / (scale * scale);
            const double common = my * (1.0 - my) / vy - 1.0;
            const double a0 = common > 0.0 ? std::max(my * common, 0.05) : 1.0;
            const double b0 = common > 0.0 ? std::max((1.0 - my) * common, 0.05) : 1.0;
            auto unpack = [loc, scale](const std::vector<double>& x) {
                return DistParams{loc, scale, std::exp(x[0]), std::exp(x[1])};
            };
            return fit_simplex(f, samples, {std::log(a0), std::log(b0)}, {0.5, 0.5}, unpack);
        }
        case FamilyId::pareto: {
            const double loc = lo - kSupportShift;
            const double min_y = kSupportShift;  // smallest shifted sample by construction
            const double s0 = 0.5 * min_y;
            double log_sum = 0.0;
            for (double x : samples) log_sum += std::log((x - loc) / s0);
            const double b0 = std::max(static_cast<double>(samples.size()) / log_sum, 1e-3);
            auto unpack = [loc](const std::vector<double>& x) {
                return DistParams{loc, std::exp(x[1]), std::exp(x[0]), 0.0};
            };
            return fit_simplex(f, samples, {std::log(b0), std::log(s0)}, {0.3, 0.3}, unpack);
        }
        case FamilyId::alpha: {
            const double loc = lo - kSupportShift;
            const double a0 = 1.0;
            const double s0 = std::max((median - loc) * 1.2, 1e-9);
            auto unpack = [loc](const std::vector<double>& x) {
                return DistParams{loc, std::exp(x[1]), std::exp(x[0]), 0.0};
            };
            return fit_simplex(f, samples, {std::log(a0), std::log(s0)}, {0.5, 0.5}, unpack);
        }
        case FamilyId::cosine: {
            // var of the standardized form is pi^2/3 - 2
            const double s_moment = sd / std::sqrt(M_PI * M_PI / 3.0 - 2.0);
            const double reach = std::max(std::abs(hi - m), std::abs(lo - m));
            const double s0 = std::max(s_moment, reach / M_PI * 1.05);
            auto unpack = [](const std::vector<double>& x) {
                return DistParams{x[0], std::exp(x[1]), 0.0, 0.0};
            };
            return fit_simplex(f, samples, {m, std::log(s0)}, {0.25 * sd, 0.25}, unpack);
        }
    }
    throw ContractViolation("estimate_params: unhandled family");
}

double sse_score(FamilyId f, const DistParams& p, const std::vector<double>& samples, int bins) {
    if (bins < 10) throw ContractViolation("sse_score: bins must be >= 10");
    if (samples.empty()) throw DegenerateInput("sse_score: no samples");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) throw DegenerateInput("sse_score: degenerate sample range");

    // Heavy-tailed samples (cauchy-like) would otherwise collapse the whole
    // histogram into one spike bin and turn the ranking into noise. A wide
    // Tukey fence clips only pathological tails; for ordinary data the range
    // stays exactly [min, max].
    {
        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        const double q25 = quantile_of(sorted, 0.25);
        const double q75 = quantile_of(sorted, 0.75);
        const double iqr = q75 - q25;
        if (iqr > 0.0) {
            const double fence_lo = q25 - kFenceIqrMultiple * iqr;
            const double fence_hi = q75 + kFenceIqrMultiple * iqr;
            if (fence_lo > lo) lo = fence_lo;
            if (fence_hi < hi) hi = fence_hi;
        }
        if (!(hi > lo)) {
            lo = *lo_it;
            hi = *hi_it;
        }
    }

    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    double included = 0.0;
    for (double x : samples) {
        if (x < lo || x > hi) continue;
        auto idx = static_cast<std::size_t>((x - lo) / width);
        if (idx >= counts.size()) idx = counts.size() - 1;
        counts[idx] += 1.0;
        included += 1.0;
    }
    double sse = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double center = lo + (static_cast<double>(i) + 0.5) * width;
        const double density = counts[static_cast<std::size_t>(i)] / (included * width);
        const double diff = density - pdf(f, p, center);
        sse += diff * diff;
    }
    return sse;
}

FitReport fit_all(const std::vector<double>& samples, int bins) {
    if (samples.size() < 2)
        throw DegenerateInput("fit_all: need at least two samples");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    if (!(*hi_it > *lo_it))
        throw DegenerateInput("fit_all: degenerate constant samples");
    FitReport report;
    report.sample_count = samples.size();
    report.bins = bins;
    for (FamilyId f : kAllFamilies) {
        FitResult r;
        r.family = f;
        try {
            EstimateResult est = estimate_params(f, samples);
            r.params = est.params;
            r.sse = sse_score(f, est.params, samples, bins);
            r.converged = est.converged && std::isfinite(r.sse);
        } catch (const Error&) {
            r.converged = false;
            r.sse = kInf;
        }
        report.results.push_back(r);
    }
    std::sort(report.results.begin(), report.results.end(),
              [](const FitResult& a, const FitResult& b) {
                  if (a.converged != b.converged) return a.converged;
                  if (a.sse != b.sse) return a.sse < b.sse;
                  return family_name(a.family) < family_name(b.family);
              });
    return report;
}

namespace {

double sample_std_gamma(double k, Rng& rng) {
    // Marsaglia-Tsang; for k < 1 boost from k+1
    if (k < 1.0) {
        const double u = rng.next_open01();
        return sample_std_gamma(k + 1.0, rng) * std::pow(u, 1.0 / k);
    }
    const double d = k - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.next_open01();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

double solve_cosine_quantile(double u) {
    // solve z + sin z = pi*(2u - 1) on [-pi, pi]; Newton with bisection fallback
    const double target = M_PI * (2.0 * u - 1.0);
    double lo = -M_PI, hi = M_PI;
    double z = target;  // decent start: z + sin z ~ 2z near 0, ~z near edges
    for (int i = 0; i < 100; ++i) {
        const double g = z + std::sin(z) - target;
        if (std::abs(g) < 1e-14) break;
        if (g > 0.0) hi = z; else lo = z;
        const double dg = 1.0 + std::cos(z);
        double next = (dg > 1e-12) ? z - g / dg : 0.5 * (lo + hi);
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        z = next;
    }
    return z;
}

}  // namespace

double sample_one(FamilyId f, const DistParams& p, Rng& rng) {
    switch (f) {
        case FamilyId::norm:
            return p.loc + p.scale * rng.normal();
        case FamilyId::uniform:
            return p.loc + p.scale * rng.next_unit();
        case FamilyId::laplace: {
            const double u = rng.next_open01();
            const double z = u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
            return p.loc + p.scale * z;
        }
        case FamilyId::logistic: {
            const double u = rng.next_open01();
            return p.loc + p.scale * std::log(u / (1.0 - u));
        }
        case FamilyId::cauchy: {
            const double u = rng.next_open01();
            return p.loc + p.scale * std::tan(M_PI * (u - 0.5));
        }
        case FamilyId::gamma:
            return p.loc + p.scale * sample_std_gamma(p.shape_a, rng);
        case FamilyId::beta: {
            const double g1 = sample_std_gamma(p.shape_a, rng);
            const double g2 = sample_std_gamma(p.shape_b, rng);
            return p.loc + p.scale * (g1 / (g1 + g2));
        }
        case FamilyId::pareto: {
            const double u = rng.next_open01();
            return p.loc + p.scale * std::pow(1.0 - u, -1.0 / p.shape_a);
        }
        case FamilyId::alpha: {
            const double u = rng.next_open01();
            const double z = 1.0 / (p.shape_a - normal_quantile(u * normal_cdf(p.shape_a)));
            return p.loc + p.scale * z;
        }
        case FamilyId::cosine: {
            const double u = rng.next_open01();
            return p.loc + p.scale * solve_cosine_quantile(u);
        }
    }
    throw ContractViolation("sample_one: unhandled family");
}

FeatureMap sample_noise(const FitResult& fit, int c, int h, int w, std::uint64_t seed) {
    if (!fit.converged)
        throw ContractViolation("sample_noise: fit did not converge");
    FeatureMap m = FeatureMap::zeros(c, h, w);
    Rng rng(seed);
    for (double& v : m.values) v = sample_one(fit.family, fit.params, rng);
    return m;
}

}  // namespace olowod
