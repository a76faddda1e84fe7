#include "olowod/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "olowod/error.hpp"

namespace olowod {

FeatureMap FeatureMap::zeros(int c, int h, int w) {
    FeatureMap m;
    m.channels = c;
    m.height = h;
    m.width = w;
    m.values.assign(static_cast<std::size_t>(c) * h * w, 0.0);
    return m;
}

void validate_feature_map(const FeatureMap& m) {
    if (m.channels < 1 || m.height < 1 || m.width < 1)
        throw ContractViolation("feature map dimensions must be >= 1");
    if (m.values.size() != static_cast<std::size_t>(m.channels) * m.height * m.width)
        throw ContractViolation("feature map element count does not match shape");
    for (double v : m.values)
        if (!std::isfinite(v)) throw ContractViolation("feature map contains non-finite value");
}

double l2_norm(const FeatureVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double l2_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw ContractViolation("l2_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw ContractViolation("cosine_similarity: dimension mismatch");
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0)
        throw DegenerateInput("cosine_similarity: zero-norm input");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot / (na * nb);
}

std::vector<double> softmax(const std::vector<double>& v) {
    if (v.empty()) throw ContractViolation("softmax: empty input");
    const double m = *std::max_element(v.begin(), v.end());
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

FeatureVector global_average_pool(const FeatureMap& m) {
    validate_feature_map(m);
    FeatureVector out(static_cast<std::size_t>(m.channels), 0.0);
    const std::size_t plane = static_cast<std::size_t>(m.height) * m.width;
    for (int c = 0; c < m.channels; ++c) {
        double s = 0.0;
        const std::size_t base = c * plane;
        for (std::size_t i = 0; i < plane; ++i) s += m.values[base + i];
        out[static_cast<std::size_t>(c)] = s / static_cast<double>(plane);
    }
    return out;
}

}  // namespace olowod
