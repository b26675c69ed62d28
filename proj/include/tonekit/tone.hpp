#pragma once

#include <cstdint>
#include <vector>

#include "tonekit/errors.hpp"

namespace tonekit::tone {

/// CIELab triple. L* in [0,100] for in-gamut sRGB inputs.
struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Standard sRGB -> D65 CIEXYZ -> CIELab conversion.
Lab rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Inverse conversion; out-of-gamut channels are clipped to [0,255].
void lab_to_rgb(const Lab& lab, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

/// Individual Typology Angle in degrees. atan2 keeps b* = 0 defined (maps to +-90).
double ita(double l_star, double b_star);

/// Per-image collection of ITA angles, degrees.
struct ItaSample {
    std::vector<double> values;
};

/// Fixed integer-degree binning with 1-degree bins; K = theta_max - theta_min.
struct Binning {
    int theta_min = 0;
    int theta_max = 0;

    int bin_count() const { return theta_max - theta_min; }
    static constexpr double width = 1.0; // degrees

    /// Bin index for a value, clamping out-of-range values into the boundary bins.
    int index_of(double value) const;

    bool operator==(const Binning&) const = default;
};

/// Normalized per-image distribution of ITA degrees over a Binning.
struct ItaHistogram {
    Binning binning;
    std::vector<double> mass;
};

/// Bin-wise median of training histograms, renormalized to sum one.
struct ReferenceDistribution {
    Binning binning;
    std::vector<double> mass;
};

/// Binning spanning [floor(min), ceil(max)] of the given training ITA values.
/// Widened to one bin if the range collapses.
Binning binning_from_training(const std::vector<double>& values);

/// Counts values into 1-degree bins and normalizes by the sample size.
ItaHistogram ita_histogram(const ItaSample& sample, const Binning& binning);

/// Per-bin median across histograms, renormalized. All inputs must share one binning.
ReferenceDistribution aggregate_reference(const std::vector<ItaHistogram>& histograms);

/// Statistical median; average-of-two for even counts.
double median_ita(const ItaSample& sample);

} // namespace tonekit::tone
