#include "tonekit/toytrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "tonekit/weighting.hpp"

namespace tonekit::toytrain {

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
    double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        p[j] = std::exp(logits[j] - peak);
        total += p[j];
    }
    for (auto& v : p) {
        v /= total;
    }
    return p;
}

} // namespace

std::vector<double> featurize(const tone::ItaHistogram& histogram, double median_ita) {
    const int k = histogram.binning.bin_count();
    std::vector<double> features(static_cast<std::size_t>(kFeatureBins) + 1, 0.0);
    for (int i = 0; i < k; ++i) {
        int j = static_cast<int>(static_cast<long long>(i) * kFeatureBins / k);
        features[static_cast<std::size_t>(j)] += histogram.mass[static_cast<std::size_t>(i)];
    }
    features[kFeatureBins] = median_ita / 100.0;
    return features;
}

double loss_and_logit_gradient(const std::vector<std::vector<double>>& logits,
                               const std::vector<std::vector<double>>& targets,
                               const std::vector<double>& weights,
                               const std::vector<double>* class_weights,
                               std::vector<std::vector<double>>& grad_out) {
    const std::size_t n = logits.size();
    if (targets.size() != n || weights.size() != n) {
        throw ShapeMismatch("logits, targets and weights must have equal lengths");
    }
    std::vector<std::vector<double>> probs(n);
    for (std::size_t i = 0; i < n; ++i) {
        probs[i] = softmax(logits[i]);
    }
    double loss = weighting::fair_cross_entropy(probs, targets, weights, class_weights);

    double weight_sum = 0.0;
    for (double w : weights) {
        weight_sum += w;
    }
    grad_out.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        grad_out[i].assign(logits[i].size(), 0.0);
        if (weight_sum <= 0.0) {
            continue;
        }
        double scale = weights[i];
        if (class_weights != nullptr) {
            for (std::size_t j = 0; j < targets[i].size(); ++j) {
                if (targets[i][j] > 0.0) {
                    scale *= (*class_weights)[j];
                    break;
                }
            }
        }
        scale /= weight_sum;
        for (std::size_t j = 0; j < logits[i].size(); ++j) {
            grad_out[i][j] = scale * (probs[i][j] - targets[i][j]);
        }
    }
    return loss;
}

TrainResult train_toy(const std::vector<std::vector<double>>& features,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& sample_weights, const TrainOptions& opts) {
    const std::size_t n = features.size();
    if (n == 0) {
        throw EmptySample("no training samples");
    }
    if (labels.size() != n || sample_weights.size() != n) {
        throw ShapeMismatch("features, labels and weights must have equal lengths");
    }
    const std::size_t d = features[0].size();
    for (const auto& f : features) {
        if (f.size() != d) {
            throw ShapeMismatch("feature vectors must have equal lengths");
        }
    }
    if (opts.iterations < 1) {
        throw ShapeMismatch("iterations must be positive");
    }

    std::map<std::string, int> class_index;
    for (const auto& l : labels) {
        class_index.emplace(l, 0);
    }
    int c = 0;
    for (auto& [name, idx] : class_index) {
        idx = c++;
    }
    if (opts.class_weights && opts.class_weights->size() != class_index.size()) {
        throw ShapeMismatch("class_weights length must equal the number of classes");
    }

    TrainResult result;
    auto& model = result.model;
    model.n_classes = c;
    model.n_features = static_cast<int>(d);
    model.class_names.resize(static_cast<std::size_t>(c));
    for (const auto& [name, idx] : class_index) {
        model.class_names[static_cast<std::size_t>(idx)] = name;
    }
    model.weights.assign(static_cast<std::size_t>(c) * d, 0.0);
    model.bias.assign(static_cast<std::size_t>(c), 0.0);

    std::vector<std::vector<double>> targets(n, std::vector<double>(static_cast<std::size_t>(c), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        targets[i][static_cast<std::size_t>(class_index[labels[i]])] = 1.0;
    }
    const std::vector<double>* cw = opts.class_weights ? &*opts.class_weights : nullptr;

    std::vector<std::vector<double>> logits(n, std::vector<double>(static_cast<std::size_t>(c), 0.0));
    std::vector<std::vector<double>> grad_logits;
    result.loss_history.reserve(static_cast<std::size_t>(opts.iterations));

    for (int it = 0; it < opts.iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < c; ++j) {
                double z = model.bias[static_cast<std::size_t>(j)];
                const double* w = model.weights.data() + static_cast<std::size_t>(j) * d;
                for (std::size_t f = 0; f < d; ++f) {
                    z += w[f] * features[i][f];
                }
                logits[i][static_cast<std::size_t>(j)] = z;
            }
        }
        double loss = loss_and_logit_gradient(logits, targets, sample_weights, cw, grad_logits);
        result.loss_history.push_back(loss);

        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < c; ++j) {
                double g = grad_logits[i][static_cast<std::size_t>(j)];
                if (g == 0.0) {
                    continue;
                }
                double* w = model.weights.data() + static_cast<std::size_t>(j) * d;
                for (std::size_t f = 0; f < d; ++f) {
                    w[f] -= opts.learning_rate * g * features[i][f];
                }
                model.bias[static_cast<std::size_t>(j)] -= opts.learning_rate * g;
            }
        }
    }

    std::size_t last = result.loss_history.size() - 1;
    std::size_t milestone = last * 9 / 10;
    result.converged = result.loss_history[last] <= result.loss_history[milestone];
    return result;
}

std::vector<double> predict_proba(const ToyModel& model, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != model.n_features) {
        throw ShapeMismatch("feature vector length does not match the model");
    }
    std::vector<double> logits(static_cast<std::size_t>(model.n_classes), 0.0);
    for (int j = 0; j < model.n_classes; ++j) {
        double z = model.bias[static_cast<std::size_t>(j)];
        const double* w = model.weights.data() + static_cast<std::size_t>(j) * features.size();
        for (std::size_t f = 0; f < features.size(); ++f) {
            z += w[f] * features[f];
        }
        logits[static_cast<std::size_t>(j)] = z;
    }
    return softmax(logits);
}

std::string predict(const ToyModel& model, const std::vector<double>& features) {
    auto p = predict_proba(model, features);
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j) {
        if (p[j] > p[best]) {
            best = j;
        }
    }
    return model.class_names[best];
}

void save_model(const ToyModel& model, const std::filesystem::path& path) {
    nlohmann::json j = {
        {"n_classes", model.n_classes},   {"n_features", model.n_features},
        {"feature_bins", model.feature_bins}, {"class_names", model.class_names},
        {"weights", model.weights},       {"bias", model.bias},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

ToyModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError(path.string() + ": invalid JSON");
    }
    for (const char* key : {"n_classes", "n_features", "feature_bins", "class_names", "weights", "bias"}) {
        if (!j.contains(key)) {
            throw ParseError(path.filename().string() + ": missing field '" + std::string(key) + "'");
        }
    }
    ToyModel model;
    model.n_classes = j["n_classes"].get<int>();
    model.n_features = j["n_features"].get<int>();
    model.feature_bins = j["feature_bins"].get<int>();
    model.class_names = j["class_names"].get<std::vector<std::string>>();
    model.weights = j["weights"].get<std::vector<double>>();
    model.bias = j["bias"].get<std::vector<double>>();
    if (model.n_classes < 1 ||
        model.class_names.size() != static_cast<std::size_t>(model.n_classes) ||
        model.weights.size() !=
            static_cast<std::size_t>(model.n_classes) * static_cast<std::size_t>(model.n_features) ||
        model.bias.size() != static_cast<std::size_t>(model.n_classes)) {
        throw ParseError(path.filename().string() + ": inconsistent model dimensions");
    }
    return model;
}

} // namespace tonekit::toytrain
