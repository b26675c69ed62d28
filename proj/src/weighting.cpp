#include "tonekit/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tonekit::weighting {

namespace {

constexpr double kBandwidthFloor = 1e-3;
constexpr double kLogClamp = 1e-12;

double gauss_kernel(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

// Linear-interpolation quantile on a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) {
        return sorted.front();
    }
    double pos = q * (sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double silverman_bandwidth(const std::vector<double>& distances) {
    const std::size_t n = distances.size();
    if (n < 2) {
        return kBandwidthFloor;
    }
    double mean = 0.0;
    for (double d : distances) {
        mean += d;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double d : distances) {
        ss += (d - mean) * (d - mean);
    }
    double sigma = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted = distances;
    std::sort(sorted.begin(), sorted.end());
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    double spread = std::min(sigma, iqr / 1.34);
    double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
    return std::max(h, kBandwidthFloor);
}

} // namespace

KdeModel KdeModel::fit(const std::vector<double>& distances, std::optional<double> bandwidth) {
    if (distances.empty()) {
        throw EmptySupport();
    }
    KdeModel model;
    model.support_ = distances;
    model.bandwidth_ = bandwidth ? std::max(*bandwidth, kBandwidthFloor)
                                 : silverman_bandwidth(distances);

    model.support_densities_.reserve(distances.size());
    for (double d : distances) {
        model.support_densities_.push_back(model.eval(d));
    }
    auto [lo, hi] =
        std::minmax_element(model.support_densities_.begin(), model.support_densities_.end());
    model.f_min_ = *lo;
    model.f_max_ = *hi;
    return model;
}

double KdeModel::eval(double d) const {
    double s = 0.0;
    for (double di : support_) {
        s += gauss_kernel((d - di) / bandwidth_);
    }
    return s / (static_cast<double>(support_.size()) * bandwidth_);
}

double drw_weight(const KdeModel& model, double d) {
    double range = model.f_max() - model.f_min();
    if (range <= 0.0) {
        return 1.0;
    }
    double w = 1.0 - (model.eval(d) - model.f_min()) / range;
    return std::clamp(w, 0.0, 1.0);
}

std::size_t GroupClassTable::total() const {
    std::size_t t = 0;
    for (const auto& [key, n] : counts) {
        t += n;
    }
    return t;
}

std::map<std::pair<int, int>, double> carw_weights(const GroupClassTable& table) {
    std::map<std::pair<int, int>, double> weights;
    const double total = static_cast<double>(table.total());
    if (total == 0.0) {
        return weights;
    }

    std::map<int, std::size_t> group_counts;
    std::map<int, std::size_t> class_counts;
    for (const auto& [key, n] : table.counts) {
        group_counts[key.first] += n;
        class_counts[key.second] += n;
    }

    for (const auto& [key, n] : table.counts) {
        if (n == 0) {
            weights[key] = 1.0;
            continue;
        }
        double p_exp = (static_cast<double>(group_counts[key.first]) / total) *
                       (static_cast<double>(class_counts[key.second]) / total);
        double p_obs = static_cast<double>(n) / total;
        weights[key] = p_exp / p_obs;
    }
    return weights;
}

double combined_weight(double w_r, double w) {
    return w_r * w;
}

double fair_cross_entropy(const std::vector<std::vector<double>>& predictions,
                          const std::vector<std::vector<double>>& targets,
                          const std::vector<double>& weights,
                          const std::vector<double>* class_weights) {
    const std::size_t n = predictions.size();
    if (targets.size() != n || weights.size() != n) {
        throw ShapeMismatch("predictions, targets and weights must have equal lengths");
    }

    double weighted_sum = 0.0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pred = predictions[i];
        const auto& target = targets[i];
        if (pred.size() != target.size()) {
            throw ShapeMismatch("prediction and target vectors must have equal lengths");
        }
        double pred_sum = 0.0;
        for (double p : pred) {
            pred_sum += p;
        }
        if (std::abs(pred_sum - 1.0) > 1e-6) {
            throw NonDistributionPrediction();
        }

        double ce = 0.0;
        std::size_t true_class = 0;
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (target[j] != 0.0) {
                ce -= target[j] * std::log(std::max(pred[j], kLogClamp));
                true_class = j;
            }
        }
        if (class_weights) {
            if (true_class >= class_weights->size()) {
                throw ShapeMismatch("class weight vector shorter than class count");
            }
            ce *= (*class_weights)[true_class];
        }
        weighted_sum += ce * weights[i];
        weight_sum += weights[i];
    }
    if (weight_sum <= 0.0) {
        return 0.0;
    }
    return weighted_sum / weight_sum;
}

} // namespace tonekit::weighting
