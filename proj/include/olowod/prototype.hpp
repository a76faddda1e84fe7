#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "olowod/numeric.hpp"

namespace olowod {

// Per-category mean feature vectors in stable insertion order. Immutable in
// spirit: columns are only appended, never edited.
class PrototypeMatrix {
  public:
    PrototypeMatrix() = default;

    void add(int category_id, FeatureVector prototype);

    std::size_t count() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    int dim() const { return dim_; }
    const std::vector<int>& category_ids() const { return ids_; }
    const FeatureVector& column(std::size_t i) const { return columns_[i]; }
    double column_norm(std::size_t i) const { return norms_[i]; }
    double min_column_norm() const;
    bool contains(int category_id) const;
    const FeatureVector& prototype_for(int category_id) const;

  private:
    int dim_ = 0;
    std::vector<int> ids_;
    std::vector<FeatureVector> columns_;
    std::vector<double> norms_;
};

struct ExemplarSelection {
    int category_id = 0;
    std::vector<std::int64_t> ranked_ids;  // ascending distance, ties by lower id
    std::vector<double> distances;
};

// Elementwise mean. Throws ContractViolation on empty input or mixed dims.
FeatureVector compute_prototype(const std::vector<FeatureVector>& features);

// One column per category, in ascending category-id order. Per-category
// feature counts need not match.
PrototypeMatrix build_prototypes(const std::map<int, std::vector<FeatureVector>>& labeled);

// The k samples nearest the prototype (all of them when fewer than k exist).
// Ties on distance break toward the smaller sample id.
ExemplarSelection select_exemplars(const std::vector<std::pair<std::int64_t, FeatureVector>>& samples,
                                   const FeatureVector& prototype, std::size_t k,
                                   int category_id = 0);

// Union preserving insertion order, old columns first.
// Throws DuplicateCategory on overlapping ids, ContractViolation on dim mismatch.
PrototypeMatrix append_prototypes(const PrototypeMatrix& m, const PrototypeMatrix& extra);

}  // namespace olowod
