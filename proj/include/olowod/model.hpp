#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olowod/numeric.hpp"

namespace olowod {

// Predicted label value when the max softmax probability falls below the
// unknown threshold.
inline constexpr int kUnknownLabel = -1;

struct Prediction {
    int label = kUnknownLabel;
    double score = 0.0;  // max softmax probability
    std::vector<std::pair<int, double>> per_class_scores;
};

// Linear softmax classifier over stream features, one weight row per known
// class, trained by single-record SGD on cross-entropy. Stands in for the
// detector heads so the replay/perturbation protocol can run end to end.
class ModelState {
  public:
    static ModelState init(int feature_dim, const std::vector<int>& known_classes,
                           double learning_rate, double unknown_threshold, std::uint64_t seed);

    // Grows the head; existing rows are untouched bit for bit.
    void add_classes(const std::vector<int>& new_classes, std::uint64_t seed);

    // One SGD step on softmax cross-entropy; returns the loss at the point
    // before the update. Throws ContractViolation for labels outside the head.
    double train_step(const FeatureVector& feature, int label);

    // Loss only, no update.
    double loss(const FeatureVector& feature, int label) const;

    Prediction predict(const FeatureVector& feature) const;

    int feature_dim() const { return feature_dim_; }
    double learning_rate() const { return learning_rate_; }
    double unknown_threshold() const { return unknown_threshold_; }
    std::size_t class_count() const { return class_ids_.size(); }
    const std::vector<int>& class_ids() const { return class_ids_; }
    const FeatureVector& weights_for(int class_id) const;
    double bias_for(int class_id) const;

    // Checkpoint round-trip.
    std::string to_json_string() const;
    static ModelState from_json_string(const std::string& text);

  private:
    std::vector<double> logits(const FeatureVector& feature) const;
    std::size_t index_of(int class_id) const;

    int feature_dim_ = 0;
    double learning_rate_ = 0.05;
    double unknown_threshold_ = 0.5;
    std::vector<int> class_ids_;            // insertion order
    std::vector<FeatureVector> weights_;    // parallel to class_ids_
    std::vector<double> biases_;
};

}  // namespace olowod
