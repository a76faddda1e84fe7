#include "olowod/store.hpp"

#include <algorithm>

#include "olowod/error.hpp"
#include "olowod/rng.hpp"

namespace olowod {

FeatureStore::FeatureStore(int group_size, int max_groups)
    : group_size_(group_size), max_groups_(max_groups) {
    if (group_size < 1 || max_groups < 1)
        throw ContractViolation("FeatureStore: group_size and max_groups must be >= 1");
}

void FeatureStore::push(int category, const FeatureVector& f) {
    if (f.empty()) throw ContractViolation("FeatureStore::push: empty feature");
    if (dim_ == 0)
        dim_ = static_cast<int>(f.size());
    else if (static_cast<int>(f.size()) != dim_)
        throw ContractViolation("FeatureStore::push: dimension mismatch");

    CategoryRing& ring = categories_[category];
    if (ring.groups.empty() ||
        ring.groups.back().size() == static_cast<std::size_t>(group_size_)) {
        ring.groups.emplace_back();
        ring.groups.back().reserve(static_cast<std::size_t>(group_size_));
        if (ring.groups.size() > static_cast<std::size_t>(max_groups_)) {
            ring.groups.pop_front();
            ring.evictions += 1;
        }
    }
    ring.groups.back().push_back(f);
}

std::vector<double> FeatureStore::pooled_values() const {
    if (categories_.empty())
        throw NoOldKnowledge("pooled_values: feature store is empty");
    std::vector<double> out;
    for (const auto& [category, ring] : categories_) {
        (void)category;
        for (const auto& group : ring.groups)
            for (const auto& f : group)
                out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

std::vector<int> FeatureStore::category_ids() const {
    std::vector<int> ids;
    ids.reserve(categories_.size());
    for (const auto& [category, ring] : categories_) {
        (void)ring;
        ids.push_back(category);
    }
    return ids;
}

std::size_t FeatureStore::complete_group_count(int category) const {
    auto it = categories_.find(category);
    if (it == categories_.end()) return 0;
    std::size_t n = 0;
    for (const auto& g : it->second.groups)
        if (g.size() == static_cast<std::size_t>(group_size_)) ++n;
    return n;
}

std::size_t FeatureStore::stored_count(int category) const {
    auto it = categories_.find(category);
    if (it == categories_.end()) return 0;
    std::size_t n = 0;
    for (const auto& g : it->second.groups) n += g.size();
    return n;
}

std::size_t FeatureStore::eviction_count(int category) const {
    auto it = categories_.find(category);
    return it == categories_.end() ? 0 : it->second.evictions;
}

const std::deque<std::vector<FeatureVector>>& FeatureStore::groups(int category) const {
    auto it = categories_.find(category);
    if (it == categories_.end())
        throw ContractViolation("FeatureStore::groups: unknown category");
    return it->second.groups;
}

FeatureMap make_adversarial(const FeatureMap& raw, const FeatureMap& noise, const DlpConfig& cfg) {
    if (raw.channels != noise.channels || raw.height != noise.height || raw.width != noise.width)
        throw ContractViolation("make_adversarial: shape mismatch");
    FeatureMap out = raw;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = raw.values[i] + cfg.noise_scale * noise.values[i];
    if (cfg.clamp) {
        const auto [lo, hi] = *cfg.clamp;
        for (double& v : out.values) v = std::clamp(v, lo, hi);
    }
    return out;
}

std::vector<bool> select_perturb_subset(std::size_t stream_length, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate > 1.0)
        throw ContractViolation("select_perturb_subset: rate outside [0,1]");
    Rng rng(seed);
    std::vector<bool> flags(stream_length, false);
    for (std::size_t i = 0; i < stream_length; ++i)
        flags[i] = rng.next_unit() < rate;
    return flags;
}

}  // namespace olowod
