#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/tone.hpp"

namespace tonekit::metrics {

/// The eleven distance/similarity functions over binned tone distributions.
/// FS and HS are similarities (1 on identical inputs); the rest are distances.
enum class MetricKind { AD, CVM, FS, HS, HM, KL, KS, KP, KD, PF, WD };

constexpr std::array<MetricKind, 11> all_metrics = {
    MetricKind::AD, MetricKind::CVM, MetricKind::FS, MetricKind::HS,
    MetricKind::HM, MetricKind::KL,  MetricKind::KS, MetricKind::KP,
    MetricKind::KD, MetricKind::PF,  MetricKind::WD,
};

bool is_similarity(MetricKind kind);
std::string to_string(MetricKind kind);
MetricKind metric_from_string(const std::string& name);

/// Cumulative distribution over a Binning; values[j] = sum of mass up to bin j.
struct Cdf {
    tone::Binning binning;
    std::vector<double> values;
};

Cdf cdf(const tone::ItaHistogram& h);
Cdf cdf(const tone::ReferenceDistribution& ref);

/// Evaluates one metric between two normalized mass vectors on a shared binning.
/// Integral forms (AD, CVM, WD) are left-Riemann sums with dt = bin width.
double distance(MetricKind kind, const tone::ItaHistogram& p, const tone::ReferenceDistribution& q);
double distance(MetricKind kind, std::span<const double> p, std::span<const double> q,
                double bin_width = 1.0);

/// Train-split min-max normalization, frozen and applied to test-time values.
struct MinMaxScaler {
    MetricKind metric = MetricKind::WD;
    double lo = 0.0;
    double hi = 0.0;
};

MinMaxScaler fit_scaler(MetricKind kind, const std::vector<double>& training_raws);

/// (raw - lo) / (hi - lo), clipped to [0,1]. Degenerate scalers map everything to 0.
double apply_scaler(const MinMaxScaler& s, double raw);

} // namespace tonekit::metrics
