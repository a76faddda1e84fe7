#include "olowod/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "olowod/error.hpp"
#include "olowod/rng.hpp"

namespace olowod {

namespace {
constexpr double kInitMagnitude = 0.01;

FeatureVector init_row(int dim, Rng& rng) {
    FeatureVector w(static_cast<std::size_t>(dim));
    for (double& x : w) x = rng.uniform(-kInitMagnitude, kInitMagnitude);
    return w;
}
}  // namespace

ModelState ModelState::init(int feature_dim, const std::vector<int>& known_classes,
                            double learning_rate, double unknown_threshold, std::uint64_t seed) {
    if (feature_dim < 1) throw ContractViolation("ModelState: feature_dim must be >= 1");
    ModelState m;
    m.feature_dim_ = feature_dim;
    m.learning_rate_ = learning_rate;
    m.unknown_threshold_ = unknown_threshold;
    m.add_classes(known_classes, seed);
    return m;
}

void ModelState::add_classes(const std::vector<int>& new_classes, std::uint64_t seed) {
    for (int c : new_classes)
        if (std::find(class_ids_.begin(), class_ids_.end(), c) != class_ids_.end())
            throw DuplicateCategory("add_classes: class already present: " + std::to_string(c));
    Rng rng(seed);
    for (int c : new_classes) {
        class_ids_.push_back(c);
        weights_.push_back(init_row(feature_dim_, rng));
        biases_.push_back(0.0);
    }
}

std::size_t ModelState::index_of(int class_id) const {
    for (std::size_t i = 0; i < class_ids_.size(); ++i)
        if (class_ids_[i] == class_id) return i;
    throw ContractViolation("model does not know class " + std::to_string(class_id));
}

const FeatureVector& ModelState::weights_for(int class_id) const {
    return weights_[index_of(class_id)];
}

double ModelState::bias_for(int class_id) const { return biases_[index_of(class_id)]; }

std::vector<double> ModelState::logits(const FeatureVector& feature) const {
    if (static_cast<int>(feature.size()) != feature_dim_)
        throw ContractViolation("model: feature dimension mismatch");
    std::vector<double> out(class_ids_.size());
    for (std::size_t c = 0; c < class_ids_.size(); ++c) {
        double z = biases_[c];
        const FeatureVector& w = weights_[c];
        for (std::size_t i = 0; i < feature.size(); ++i) z += w[i] * feature[i];
        out[c] = z;
    }
    return out;
}

double ModelState::loss(const FeatureVector& feature, int label) const {
    const std::size_t target = index_of(label);
    const std::vector<double> probs = softmax(logits(feature));
    return -std::log(std::max(probs[target], 1e-300));
}

double ModelState::train_step(const FeatureVector& feature, int label) {
    const std::size_t target = index_of(label);
    const std::vector<double> probs = softmax(logits(feature));
    const double point_loss = -std::log(std::max(probs[target], 1e-300));
    for (std::size_t c = 0; c < class_ids_.size(); ++c) {
        const double g = probs[c] - (c == target ? 1.0 : 0.0);
        FeatureVector& w = weights_[c];
        for (std::size_t i = 0; i < feature.size(); ++i)
            w[i] -= learning_rate_ * g * feature[i];
        biases_[c] -= learning_rate_ * g;
    }
    return point_loss;
}

Prediction ModelState::predict(const FeatureVector& feature) const {
    if (class_ids_.empty())
        throw ContractViolation("predict: model has no classes");
    const std::vector<double> probs = softmax(logits(feature));
    Prediction p;
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c)
        if (probs[c] > probs[best]) best = c;
    p.score = probs[best];
    p.label = p.score >= unknown_threshold_ ? class_ids_[best] : kUnknownLabel;
    p.per_class_scores.reserve(class_ids_.size());
    for (std::size_t c = 0; c < class_ids_.size(); ++c)
        p.per_class_scores.emplace_back(class_ids_[c], probs[c]);
    return p;
}

std::string ModelState::to_json_string() const {
    nlohmann::json j;
    j["feature_dim"] = feature_dim_;
    j["learning_rate"] = learning_rate_;
    j["unknown_threshold"] = unknown_threshold_;
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < class_ids_.size(); ++c) {
        classes.push_back({{"class_id", class_ids_[c]},
                           {"weights", weights_[c]},
                           {"bias", biases_[c]}});
    }
    j["classes"] = std::move(classes);
    return j.dump();
}

ModelState ModelState::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ModelState m;
    m.feature_dim_ = j.at("feature_dim").get<int>();
    m.learning_rate_ = j.at("learning_rate").get<double>();
    m.unknown_threshold_ = j.at("unknown_threshold").get<double>();
    for (const auto& c : j.at("classes")) {
        m.class_ids_.push_back(c.at("class_id").get<int>());
        m.weights_.push_back(c.at("weights").get<FeatureVector>());
        m.biases_.push_back(c.at("bias").get<double>());
    }
    return m;
}

}  // namespace olowod
