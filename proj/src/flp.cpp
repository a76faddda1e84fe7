#include "olowod/flp.hpp"

#include "olowod/error.hpp"

namespace olowod {

PerturbationWeights perturbation_weights(const FeatureVector& f, const PrototypeMatrix& m) {
    if (m.empty())
        throw NoOldKnowledge("perturbation_weights: no old categories yet");
    std::vector<double> sims(m.count());
    for (std::size_t i = 0; i < m.count(); ++i)
        sims[i] = cosine_similarity(f, m.column(i));
    return PerturbationWeights{softmax(sims)};
}

FeatureVector generate_old_feature(const PerturbationWeights& w, const PrototypeMatrix& m) {
    if (w.weights.size() != m.count())
        throw ContractViolation("generate_old_feature: weight/prototype count mismatch");
    FeatureVector gen(static_cast<std::size_t>(m.dim()), 0.0);
    for (std::size_t i = 0; i < m.count(); ++i) {
        const FeatureVector& proto = m.column(i);
        const double wi = w.weights[i];
        for (std::size_t k = 0; k < gen.size(); ++k) gen[k] += wi * proto[k];
    }
    return gen;
}

FeatureVector perturb_feature(const FeatureVector& f, const FeatureVector& f_gen, double gamma) {
    if (f.size() != f_gen.size())
        throw ContractViolation("perturb_feature: dimension mismatch");
    if (gamma < 0.0 || gamma > 1.0)
        throw ContractViolation("perturb_feature: gamma outside [0,1]");
    FeatureVector out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = gamma * f[i] + (1.0 - gamma) * f_gen[i];
    return out;
}

FeatureVector apply_flp(const FeatureVector& f, const PrototypeMatrix& m, const FlpConfig& cfg,
                        double coin, FlpOutcome* outcome) {
    auto report = [&](FlpOutcome o) {
        if (outcome) *outcome = o;
    };
    if (m.empty()) {
        report(FlpOutcome::skipped_no_prototypes);
        return f;
    }
    if (coin >= cfg.frequency) {
        report(FlpOutcome::skipped_frequency);
        return f;
    }
    if (l2_norm(f) == 0.0 || m.min_column_norm() == 0.0) {
        report(FlpOutcome::skipped_zero_norm);
        return f;
    }
    report(FlpOutcome::applied);
    return perturb_feature(f, generate_old_feature(perturbation_weights(f, m), m), cfg.gamma);
}

}  // namespace olowod
