#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/toytrain.hpp"

using namespace tonekit;
namespace fs = std::filesystem;

namespace {

// Separable toy problem: class 0 lights up feature 0, class 1 feature 1, ...
void separable_data(std::vector<std::vector<double>>& features, std::vector<std::string>& labels,
                    int per_class, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 0.05);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> f(4, 0.0);
            for (auto& v : f) v = noise(rng);
            f[c] += 1.0;
            features.push_back(f);
            labels.push_back("k" + std::to_string(c));
        }
    }
}

std::vector<std::vector<double>> random_logits(std::mt19937_64& rng, size_t n, size_t c) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<std::vector<double>> z(n, std::vector<double>(c));
    for (auto& row : z) {
        for (auto& v : row) v = u(rng);
    }
    return z;
}

std::vector<std::vector<double>> one_hot_targets(std::mt19937_64& rng, size_t n, size_t c) {
    std::vector<std::vector<double>> t(n, std::vector<double>(c, 0.0));
    for (auto& row : t) row[rng() % c] = 1.0;
    return t;
}

}  // namespace

TEST_CASE("featurize downsamples the histogram and appends the scaled median") {
    tone::ItaHistogram h;
    h.binning.theta_min = 0;
    h.binning.theta_max = 32;  // 32 bins -> pairs collapse into 16 features
    h.mass.assign(32, 1.0 / 32.0);
    auto f = toytrain::featurize(h, 42.0);
    REQUIRE(f.size() == size_t(toytrain::kFeatureBins) + 1);
    for (int i = 0; i < toytrain::kFeatureBins; ++i) {
        CHECK(f[i] == doctest::Approx(2.0 / 32.0).epsilon(1e-12));
    }
    CHECK(f.back() == doctest::Approx(0.42));

    // Total histogram mass is preserved by the downsampling.
    double sum = 0.0;
    for (int i = 0; i < toytrain::kFeatureBins; ++i) sum += f[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // Fewer bins than features: mass lands in the leading slots.
    tone::ItaHistogram narrow;
    narrow.binning.theta_min = 0;
    narrow.binning.theta_max = 4;
    narrow.mass = {0.25, 0.25, 0.25, 0.25};
    auto g = toytrain::featurize(narrow, -10.0);
    REQUIRE(g.size() == size_t(toytrain::kFeatureBins) + 1);
    double gsum = 0.0;
    for (int i = 0; i < toytrain::kFeatureBins; ++i) gsum += g[i];
    CHECK(gsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.back() == doctest::Approx(-0.1));
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        size_t n = 2 + rng() % 6, c = 2 + rng() % 4;
        auto logits = random_logits(rng, n, c);
        auto targets = one_hot_targets(rng, n, c);
        std::vector<double> weights(n);
        std::uniform_real_distribution<double> wu(0.1, 2.0);
        for (auto& w : weights) w = wu(rng);
        std::vector<double> class_weights(c);
        for (auto& w : class_weights) w = wu(rng);

        std::vector<std::vector<double>> grad;
        toytrain::loss_and_logit_gradient(logits, targets, weights, &class_weights, grad);
        REQUIRE(grad.size() == n);

        const double eps = 1e-6;
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < c; ++j) {
                auto bump = logits;
                bump[i][j] += eps;
                std::vector<std::vector<double>> tmp;
                double up = toytrain::loss_and_logit_gradient(bump, targets, weights,
                                                              &class_weights, tmp);
                bump[i][j] -= 2 * eps;
                double down = toytrain::loss_and_logit_gradient(bump, targets, weights,
                                                                &class_weights, tmp);
                double numeric = (up - down) / (2 * eps);
                double denom = std::max({std::abs(numeric), std::abs(grad[i][j]), 1e-8});
                CHECK(std::abs(numeric - grad[i][j]) / denom < 1e-5);
            }
        }
    }
}

TEST_CASE("training separates a separable problem and the loss decreases") {
    std::mt19937_64 rng(77);
    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;
    separable_data(features, labels, 30, rng);
    std::vector<double> weights(features.size(), 1.0);

    toytrain::TrainOptions opts;
    opts.iterations = 300;
    opts.learning_rate = 1.0;
    auto result = toytrain::train_toy(features, labels, weights, opts);

    CHECK(result.converged);
    REQUIRE(result.loss_history.size() == 300);
    CHECK(result.loss_history.back() < result.loss_history.front());
    CHECK(std::is_sorted(result.model.class_names.begin(), result.model.class_names.end()));

    size_t correct = 0;
    for (size_t i = 0; i < features.size(); ++i) {
        correct += toytrain::predict(result.model, features[i]) == labels[i];
    }
    CHECK(double(correct) / double(features.size()) > 0.95);
}

TEST_CASE("zero-weight samples do not influence training") {
    std::mt19937_64 rng(83);
    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;
    separable_data(features, labels, 10, rng);

    // Poisoned copies of class k0 labeled k1, all with zero weight.
    auto poisoned_features = features;
    auto poisoned_labels = labels;
    std::vector<double> poisoned_weights(features.size(), 1.0);
    for (int i = 0; i < 10; ++i) {
        poisoned_features.push_back(poisoned_features[i]);
        poisoned_labels.push_back("k1");
        poisoned_weights.push_back(0.0);
    }

    toytrain::TrainOptions opts;
    opts.iterations = 150;
    auto base = toytrain::train_toy(features, labels, std::vector<double>(features.size(), 1.0), opts);
    auto poisoned = toytrain::train_toy(poisoned_features, poisoned_labels, poisoned_weights, opts);
    REQUIRE(base.model.weights.size() == poisoned.model.weights.size());
    for (size_t i = 0; i < base.model.weights.size(); ++i) {
        CHECK(base.model.weights[i] == doctest::Approx(poisoned.model.weights[i]).epsilon(1e-9));
    }
}

TEST_CASE("class weights push decisions toward the upweighted class") {
    // Two overlapping classes; upweighting k1 must raise its predicted share.
    std::mt19937_64 rng(89);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;
    for (int i = 0; i < 200; ++i) {
        double x = g(rng) + (i % 2 == 0 ? 0.4 : -0.4);
        features.push_back({x});
        labels.push_back(i % 2 == 0 ? "k0" : "k1");
    }
    std::vector<double> ones(features.size(), 1.0);

    toytrain::TrainOptions plain;
    plain.iterations = 200;
    toytrain::TrainOptions boosted = plain;
    boosted.class_weights = std::vector<double>{1.0, 5.0};

    auto m0 = toytrain::train_toy(features, labels, ones, plain);
    auto m1 = toytrain::train_toy(features, labels, ones, boosted);
    size_t k1_plain = 0, k1_boost = 0;
    for (const auto& f : features) {
        k1_plain += toytrain::predict(m0.model, f) == "k1";
        k1_boost += toytrain::predict(m1.model, f) == "k1";
    }
    CHECK(k1_boost > k1_plain);
}

TEST_CASE("predict_proba returns a distribution and predict the argmax") {
    toytrain::ToyModel model;
    model.n_classes = 3;
    model.n_features = 2;
    model.class_names = {"a", "b", "c"};
    model.weights = {1.0, 0.0, 0.0, 1.0, -1.0, -1.0};
    model.bias = {0.0, 0.1, -0.2};
    auto p = toytrain::predict_proba(model, {0.5, 0.25});
    REQUIRE(p.size() == 3);
    double sum = 0.0;
    for (double v : p) {
        CHECK(v > 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    size_t arg = size_t(std::max_element(p.begin(), p.end()) - p.begin());
    CHECK(toytrain::predict(model, {0.5, 0.25}) == model.class_names[arg]);
}

TEST_CASE("models round-trip through json") {
    std::mt19937_64 rng(97);
    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;
    separable_data(features, labels, 5, rng);
    toytrain::TrainOptions opts;
    opts.iterations = 50;
    auto result = toytrain::train_toy(features, labels, std::vector<double>(15, 1.0), opts);

    auto path = fs::temp_directory_path() / "tonekit_toy_model.json";
    toytrain::save_model(result.model, path);
    auto back = toytrain::load_model(path);
    CHECK(back.n_classes == result.model.n_classes);
    CHECK(back.n_features == result.model.n_features);
    CHECK(back.class_names == result.model.class_names);
    CHECK(back.weights == result.model.weights);
    CHECK(back.bias == result.model.bias);
    for (const auto& f : features) {
        CHECK(toytrain::predict(back, f) == toytrain::predict(result.model, f));
    }
    fs::remove(path);
}

TEST_CASE("train_toy validates its inputs") {
    toytrain::TrainOptions opts;
    CHECK_THROWS_AS(toytrain::train_toy({}, {}, {}, opts), EmptySample);
    CHECK_THROWS_AS(toytrain::train_toy({{1.0}}, {"a", "b"}, {1.0}, opts), ShapeMismatch);
    CHECK_THROWS_AS(toytrain::train_toy({{1.0}}, {"a"}, {1.0, 1.0}, opts), ShapeMismatch);
    CHECK_THROWS_AS(toytrain::train_toy({{1.0}, {1.0, 2.0}}, {"a", "b"}, {1.0, 1.0}, opts),
                    ShapeMismatch);
    // Class weight vector must cover every class.
    toytrain::TrainOptions short_cw;
    short_cw.class_weights = std::vector<double>{1.0};
    CHECK_THROWS_AS(
        toytrain::train_toy({{1.0}, {2.0}}, {"a", "b"}, {1.0, 1.0}, short_cw), ShapeMismatch);
}
