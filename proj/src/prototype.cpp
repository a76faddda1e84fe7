#include "olowod/prototype.hpp"

#include <algorithm>
#include <limits>

#include "olowod/error.hpp"

namespace olowod {

void PrototypeMatrix::add(int category_id, FeatureVector prototype) {
    if (prototype.empty())
        throw ContractViolation("prototype must have dim >= 1");
    if (dim_ == 0)
        dim_ = static_cast<int>(prototype.size());
    else if (static_cast<int>(prototype.size()) != dim_)
        throw ContractViolation("prototype dimension mismatch");
    if (contains(category_id))
        throw DuplicateCategory("category already has a prototype: " + std::to_string(category_id));
    norms_.push_back(l2_norm(prototype));
    ids_.push_back(category_id);
    columns_.push_back(std::move(prototype));
}

double PrototypeMatrix::min_column_norm() const {
    double m = std::numeric_limits<double>::infinity();
    for (double n : norms_) m = std::min(m, n);
    return m;
}

bool PrototypeMatrix::contains(int category_id) const {
    return std::find(ids_.begin(), ids_.end(), category_id) != ids_.end();
}

const FeatureVector& PrototypeMatrix::prototype_for(int category_id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == category_id) return columns_[i];
    throw ContractViolation("no prototype for category " + std::to_string(category_id));
}

FeatureVector compute_prototype(const std::vector<FeatureVector>& features) {
    if (features.empty())
        throw ContractViolation("compute_prototype: empty category");
    const std::size_t dim = features.front().size();
    FeatureVector mean(dim, 0.0);
    for (const auto& f : features) {
        if (f.size() != dim)
            throw ContractViolation("compute_prototype: dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i) mean[i] += f[i];
    }
    for (double& x : mean) x /= static_cast<double>(features.size());
    return mean;
}

PrototypeMatrix build_prototypes(const std::map<int, std::vector<FeatureVector>>& labeled) {
    PrototypeMatrix m;
    for (const auto& [category, features] : labeled)
        m.add(category, compute_prototype(features));
    return m;
}

ExemplarSelection select_exemplars(const std::vector<std::pair<std::int64_t, FeatureVector>>& samples,
                                   const FeatureVector& prototype, std::size_t k,
                                   int category_id) {
    if (k == 0) throw ContractViolation("select_exemplars: k must be positive");
    if (samples.empty()) throw ContractViolation("select_exemplars: empty sample set");

    std::vector<std::pair<double, std::int64_t>> ranked;
    ranked.reserve(samples.size());
    for (const auto& [id, f] : samples)
        ranked.emplace_back(l2_distance(f, prototype), id);
    std::sort(ranked.begin(), ranked.end());

    const std::size_t n = std::min(k, ranked.size());
    ExemplarSelection sel;
    sel.category_id = category_id;
    sel.ranked_ids.reserve(n);
    sel.distances.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        sel.distances.push_back(ranked[i].first);
        sel.ranked_ids.push_back(ranked[i].second);
    }
    return sel;
}

PrototypeMatrix append_prototypes(const PrototypeMatrix& m, const PrototypeMatrix& extra) {
    if (!m.empty() && !extra.empty() && m.dim() != extra.dim())
        throw ContractViolation("append_prototypes: dimension mismatch");
    PrototypeMatrix out;
    for (std::size_t i = 0; i < m.count(); ++i)
        out.add(m.category_ids()[i], m.column(i));
    for (std::size_t i = 0; i < extra.count(); ++i)
        out.add(extra.category_ids()[i], extra.column(i));  // throws on duplicates
    return out;
}

}  // namespace olowod
