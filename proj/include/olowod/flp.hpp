#pragma once

#include "olowod/numeric.hpp"
#include "olowod/prototype.hpp"

namespace olowod {

// Softmax-normalized cosine similarities between a feature and every stored
// prototype; aligned to the prototype column order.
struct PerturbationWeights {
    std::vector<double> weights;
};

struct FlpConfig {
    double gamma = 0.5;      // mixing weight of the original feature
    double frequency = 0.01; // fraction of stream features perturbed
};

enum class FlpOutcome {
    applied,
    skipped_frequency,
    skipped_no_prototypes,
    skipped_zero_norm,
};

// Throws NoOldKnowledge when the matrix is empty (nothing learned yet) and
// DegenerateInput on zero-norm inputs.
PerturbationWeights perturbation_weights(const FeatureVector& f, const PrototypeMatrix& m);

// Weighted sum of prototype columns.
FeatureVector generate_old_feature(const PerturbationWeights& w, const PrototypeMatrix& m);

// gamma*f + (1-gamma)*f_gen
FeatureVector perturb_feature(const FeatureVector& f, const FeatureVector& f_gen, double gamma);

// One stream step: perturb when coin < cfg.frequency and old prototypes exist.
// Zero-norm features (and zero-norm prototype columns) skip rather than error;
// the caller counts skips via `outcome`.
FeatureVector apply_flp(const FeatureVector& f, const PrototypeMatrix& m, const FlpConfig& cfg,
                        double coin, FlpOutcome* outcome = nullptr);

}  // namespace olowod
