#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/tone.hpp"

namespace tonekit::toytrain {

/// Histogram-downsample width of the feature vector; one trailing slot holds
/// the median ITA scaled by 1/100.
constexpr int kFeatureBins = 16;

/// Deliberately tone-sensitive features so reweighting has something to fix.
std::vector<double> featurize(const tone::ItaHistogram& histogram, double median_ita);

/// Multinomial logistic model over featurize() vectors.
struct ToyModel {
    int n_classes = 0;
    int n_features = 0;
    int feature_bins = kFeatureBins;
    std::vector<std::string> class_names; // class index -> label
    std::vector<double> weights;          // n_classes x n_features, row-major
    std::vector<double> bias;             // n_classes
};

void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

struct TrainOptions {
    int iterations = 600;
    double learning_rate = 2.0;
    std::optional<std::vector<double>> class_weights; // by class index after label sort
};

struct TrainResult {
    ToyModel model;
    std::vector<double> loss_history; // one entry per iteration
    bool converged = true; // false when the loss fails to decrease over the final 10%
};

/// Full-batch gradient descent from zero parameters on the weighted
/// cross-entropy; deterministic (no randomness in the optimizer).
TrainResult train_toy(const std::vector<std::vector<double>>& features,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& sample_weights, const TrainOptions& opts);

/// Batch loss and its analytic gradient w.r.t. the logits; the training loop
/// consumes exactly this function, so the gradient check covers it.
double loss_and_logit_gradient(const std::vector<std::vector<double>>& logits,
                               const std::vector<std::vector<double>>& targets,
                               const std::vector<double>& weights,
                               const std::vector<double>* class_weights,
                               std::vector<std::vector<double>>& grad_out);

std::vector<double> predict_proba(const ToyModel& model, const std::vector<double>& features);
std::string predict(const ToyModel& model, const std::vector<double>& features);

} // namespace tonekit::toytrain
