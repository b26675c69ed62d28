#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tonekit/errors.hpp"

namespace tonekit::weighting {

/// Gaussian-kernel density estimate over training distances.
/// Immutable after fit; f_min/f_max are cached over the support points so the
/// inverse-density weight is defined for unseen queries.
class KdeModel {
public:
    /// Fits on normalized distances. Without an explicit bandwidth, applies
    /// Silverman's rule h = 0.9 * min(sigma, IQR/1.34) * n^(-1/5), floored at 1e-3.
    static KdeModel fit(const std::vector<double>& distances,
                        std::optional<double> bandwidth = std::nullopt);

    /// Exact kernel sum over the support, O(n) per query.
    double eval(double d) const;

    double bandwidth() const { return bandwidth_; }
    double f_min() const { return f_min_; }
    double f_max() const { return f_max_; }
    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& support_densities() const { return support_densities_; }

private:
    std::vector<double> support_;
    std::vector<double> support_densities_;
    double bandwidth_ = 0.0;
    double f_min_ = 0.0;
    double f_max_ = 0.0;
};

/// Inverse-density weight w = 1 - (f(d) - f_min) / (f_max - f_min), clipped to [0,1].
/// A flat density (f_max = f_min) yields weight 1 for every query.
double drw_weight(const KdeModel& model, double d);

/// Observed (skin type, class) joint counts with marginals.
struct GroupClassTable {
    std::map<std::pair<int, int>, std::size_t> counts;

    void add(int group, int cls, std::size_t n = 1) { counts[{group, cls}] += n; }
    std::size_t total() const;
};

/// Categorical reweighting: w_r(s,y) = P_exp(s,y) / P_obs(s,y) with
/// P_exp = P(s) * P(y) from the marginals. Zero-count cells map to 1.
std::map<std::pair<int, int>, double> carw_weights(const GroupClassTable& table);

double combined_weight(double w_r, double w);

/// Weighted multiclass cross-entropy. Per sample: -sum_j y_j log(max(yhat_j, 1e-12)),
/// scaled by the optional class weight and the sample weight; the batch loss is the
/// weighted sum divided by the sum of sample weights.
double fair_cross_entropy(const std::vector<std::vector<double>>& predictions,
                          const std::vector<std::vector<double>>& targets,
                          const std::vector<double>& weights,
                          const std::vector<double>* class_weights = nullptr);

} // namespace tonekit::weighting
