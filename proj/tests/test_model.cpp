#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "olowod/error.hpp"
#include "olowod/model.hpp"
#include "olowod/rng.hpp"

using namespace olowod;

namespace {

// copy of the model with one weight (coord >= 0) or the bias (coord == -1) nudged
ModelState nudged(const ModelState& m, int class_id, int coord, double delta) {
    nlohmann::json j = nlohmann::json::parse(m.to_json_string());
    for (auto& c : j.at("classes")) {
        if (c.at("class_id").get<int>() != class_id) continue;
        if (coord < 0)
            c["bias"] = c.at("bias").get<double>() + delta;
        else
            c.at("weights")[static_cast<std::size_t>(coord)] =
                c.at("weights").at(static_cast<std::size_t>(coord)).get<double>() + delta;
    }
    return ModelState::from_json_string(j.dump());
}

}  // namespace

TEST_CASE("init determinism and magnitude bound") {
    const ModelState a = ModelState::init(8, {1, 2, 3}, 0.05, 0.5, 99);
    const ModelState b = ModelState::init(8, {1, 2, 3}, 0.05, 0.5, 99);
    CHECK(a.to_json_string() == b.to_json_string());
    for (int c : {1, 2, 3}) {
        for (double w : a.weights_for(c)) CHECK(std::abs(w) <= 0.01);
        CHECK(a.bias_for(c) == 0.0);
    }

    const ModelState empty = ModelState::init(4, {}, 0.05, 0.5, 1);
    CHECK(empty.class_count() == 0);
}

TEST_CASE("add_classes grows without touching existing rows") {
    ModelState m = ModelState::init(6, {1, 2}, 0.05, 0.5, 7);
    const FeatureVector w1 = m.weights_for(1);
    const FeatureVector w2 = m.weights_for(2);

    m.add_classes({}, 11);
    CHECK(m.class_count() == 2);

    m.add_classes({3, 4}, 12);
    CHECK(m.class_count() == 4);
    CHECK(m.weights_for(1) == w1);  // bitwise
    CHECK(m.weights_for(2) == w2);

    CHECK_THROWS_AS(m.add_classes({3}, 13), DuplicateCategory);
}

TEST_CASE("train_step drives the loss down on a separable record") {
    ModelState m = ModelState::init(4, {1, 2}, 0.1, 0.5, 5);
    const FeatureVector f{1.0, 2.0, -1.0, 0.5};
    double prev = m.loss(f, 1);
    int steps = 0;
    while (prev >= 0.01 && steps < 500) {
        m.train_step(f, 1);
        const double now = m.loss(f, 1);
        CHECK(now < prev);
        prev = now;
        ++steps;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("lr zero leaves the model unchanged") {
    ModelState m = ModelState::init(4, {1, 2}, 0.0, 0.5, 5);
    const std::string before = m.to_json_string();
    m.train_step({1.0, 0.0, 0.0, 1.0}, 2);
    CHECK(m.to_json_string() == before);
}

TEST_CASE("train_step rejects labels outside the head") {
    ModelState m = ModelState::init(4, {1}, 0.05, 0.5, 5);
    CHECK_THROWS_AS(m.train_step({1.0, 0.0, 0.0, 0.0}, 9), ContractViolation);
    CHECK_THROWS_AS(m.train_step({1.0, 0.0}, 1), ContractViolation);
}

TEST_CASE("analytic gradient matches central finite differences") {
    // 3 classes, C=8, seeded instance; relative tolerance 1e-5
    const int dim = 8;
    ModelState m = ModelState::init(dim, {1, 2, 3}, 0.05, 0.5, 31);
    Rng rng(32);
    FeatureVector f(dim);
    for (double& x : f) x = rng.uniform(-2.0, 2.0);
    const int label = 2;

    // analytic gradient recovered from one step: grad = (w_before - w_after) / lr
    ModelState stepped = ModelState::from_json_string(m.to_json_string());
    stepped.train_step(f, label);
    const double h = 1e-6;
    for (int c : {1, 2, 3}) {
        for (int i = -1; i < dim; ++i) {  // -1 probes the bias
            const double before = i < 0 ? m.bias_for(c)
                                        : m.weights_for(c)[static_cast<std::size_t>(i)];
            const double after = i < 0 ? stepped.bias_for(c)
                                       : stepped.weights_for(c)[static_cast<std::size_t>(i)];
            const double analytic = (before - after) / m.learning_rate();
            const double fplus = nudged(m, c, i, h).loss(f, label);
            const double fminus = nudged(m, c, i, -h).loss(f, label);
            const double numeric = (fplus - fminus) / (2.0 * h);
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            CHECK(std::abs(analytic - numeric) / denom < 1e-5);
        }
    }
}

TEST_CASE("predict thresholds and shift invariance") {
    ModelState one = ModelState::init(2, {5}, 0.05, 0.0, 3);
    const Prediction p1 = one.predict({1.0, 1.0});
    CHECK(p1.label == 5);
    CHECK(p1.score == doctest::Approx(1.0));

    ModelState two = ModelState::init(2, {1, 2}, 0.5, 1.0, 3);
    for (int i = 0; i < 20; ++i) two.train_step({1.0, 0.0}, 1);
    const Prediction p2 = two.predict({1.0, 0.0});
    CHECK(p2.label == kUnknownLabel);  // max softmax < 1 with distinct logits
    CHECK(p2.score < 1.0);

    ModelState none = ModelState::init(2, {}, 0.05, 0.5, 3);
    CHECK_THROWS_AS(none.predict({1.0, 0.0}), ContractViolation);
}

TEST_CASE("trained two-cluster model classifies held-out points") {
    Rng rng(41);
    const int dim = 8;
    FeatureVector mean1(dim), mean2(dim);
    for (int i = 0; i < dim; ++i) {
        mean1[static_cast<std::size_t>(i)] = rng.normal();
        mean2[static_cast<std::size_t>(i)] = rng.normal();
    }
    for (double& x : mean1) x *= 4.0;
    for (double& x : mean2) x *= -4.0;

    ModelState m = ModelState::init(dim, {1, 2}, 0.05, 0.5, 42);
    auto sample = [&](const FeatureVector& mean) {
        FeatureVector f(mean.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = mean[i] + rng.normal();
        return f;
    };
    for (int epoch = 0; epoch < 3; ++epoch)
        for (int i = 0; i < 100; ++i) {
            m.train_step(sample(mean1), 1);
            m.train_step(sample(mean2), 2);
        }

    int correct = 0;
    const int held_out = 200;
    for (int i = 0; i < held_out; ++i) {
        const bool first = i % 2 == 0;
        const Prediction p = m.predict(sample(first ? mean1 : mean2));
        if (p.label == (first ? 1 : 2) && p.score > 0.5) ++correct;
    }
    CHECK(correct >= static_cast<int>(0.95 * held_out));
}

TEST_CASE("checkpoint round-trip preserves predictions") {
    ModelState m = ModelState::init(5, {1, 2, 3}, 0.05, 0.4, 77);
    Rng rng(78);
    for (int i = 0; i < 50; ++i) {
        FeatureVector f(5);
        for (double& x : f) x = rng.normal();
        m.train_step(f, 1 + static_cast<int>(rng.bounded(3)));
    }
    const ModelState restored = ModelState::from_json_string(m.to_json_string());
    FeatureVector probe(5, 0.3);
    const Prediction a = m.predict(probe);
    const Prediction b = restored.predict(probe);
    CHECK(a.label == b.label);
    CHECK(a.score == b.score);
    CHECK(a.per_class_scores == b.per_class_scores);
}
