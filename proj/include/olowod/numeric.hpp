#pragma once

#include <cstddef>
#include <vector>

namespace olowod {

// A length-C vector of feature activations. Dimension is values.size();
// entries are kept finite by the ingestion and generation boundaries.
using FeatureVector = std::vector<double>;

// Dense (C, H, W) tensor, row-major with w fastest.
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    static FeatureMap zeros(int c, int h, int w);

    double& at(int c, int h, int w) {
        return values[static_cast<std::size_t>((c * height + h) * width + w)];
    }
    double at(int c, int h, int w) const {
        return values[static_cast<std::size_t>((c * height + h) * width + w)];
    }
    std::size_t size() const { return values.size(); }
};

// Throws ContractViolation if the map shape is inconsistent or entries are non-finite.
void validate_feature_map(const FeatureMap& m);

double l2_norm(const FeatureVector& v);
double l2_distance(const FeatureVector& a, const FeatureVector& b);

// Throws DegenerateInput on a zero-norm operand.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

// Max-subtracted for stability; output sums to 1.
std::vector<double> softmax(const std::vector<double>& v);

// Per-channel mean over the H*W plane.
FeatureVector global_average_pool(const FeatureMap& m);

}  // namespace olowod
