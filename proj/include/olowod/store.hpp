#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "olowod/numeric.hpp"

namespace olowod {

struct DlpConfig {
    double frequency = 0.01;                          // fraction of stream records perturbed
    double noise_scale = 1.0;                         // lambda applied to sampled noise
    std::optional<std::pair<double, double>> clamp;   // optional (lo, hi) output range
};

// Capped per-category buffer of stored features, organized as groups of
// group_size vectors. Capacity is max_groups groups per category (a partial
// tail group counts); the oldest group is evicted when a new one must open
// past capacity, so stored values never exceed group_size * max_groups.
class FeatureStore {
  public:
    explicit FeatureStore(int group_size = 80, int max_groups = 20);

    void push(int category, const FeatureVector& f);

    // All stored scalars, in (category-id, group age, slot, coordinate) order.
    // Throws NoOldKnowledge when nothing is stored.
    std::vector<double> pooled_values() const;

    bool empty() const { return categories_.empty(); }
    int group_size() const { return group_size_; }
    int max_groups() const { return max_groups_; }
    std::vector<int> category_ids() const;
    std::size_t complete_group_count(int category) const;
    std::size_t stored_count(int category) const;  // feature vectors, not scalars
    std::size_t eviction_count(int category) const;
    const std::deque<std::vector<FeatureVector>>& groups(int category) const;

  private:
    struct CategoryRing {
        std::deque<std::vector<FeatureVector>> groups;
        std::size_t evictions = 0;
    };

    int group_size_;
    int max_groups_;
    int dim_ = 0;
    std::map<int, CategoryRing> categories_;
};

// Eq-style elementwise addition of scaled noise, optionally clamped; the input
// record is untouched.
FeatureMap make_adversarial(const FeatureMap& raw, const FeatureMap& noise, const DlpConfig& cfg);

// Independent Bernoulli(rate) flags, deterministic per seed.
std::vector<bool> select_perturb_subset(std::size_t stream_length, double rate, std::uint64_t seed);

}  // namespace olowod
