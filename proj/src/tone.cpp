#include "tonekit/tone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tonekit::tone {

namespace {

double srgb_linearize(std::uint8_t c) {
    double u = c / 255.0;
    return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

double srgb_gamma(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u <= 0.0031308 ? 12.92 * u : 1.055 * std::pow(u, 1.0 / 2.4) - 0.055;
}

// D65 reference white
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

} // namespace

Lab rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    double rl = srgb_linearize(r);
    double gl = srgb_linearize(g);
    double bl = srgb_linearize(b);

    double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

    double fx = lab_f(x / kXn);
    double fy = lab_f(y / kYn);
    double fz = lab_f(z / kZn);

    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

void lab_to_rgb(const Lab& lab, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
    double fy = (lab.l + 16.0) / 116.0;
    double fx = fy + lab.a / 500.0;
    double fz = fy - lab.b / 200.0;

    double x = kXn * lab_f_inv(fx);
    double y = kYn * lab_f_inv(fy);
    double z = kZn * lab_f_inv(fz);

    double rl = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    double gl = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

    r = static_cast<std::uint8_t>(std::lround(255.0 * srgb_gamma(rl)));
    g = static_cast<std::uint8_t>(std::lround(255.0 * srgb_gamma(gl)));
    b = static_cast<std::uint8_t>(std::lround(255.0 * srgb_gamma(bl)));
}

double ita(double l_star, double b_star) {
    return 180.0 / std::numbers::pi * std::atan2(l_star - 50.0, b_star);
}

int Binning::index_of(double value) const {
    int idx = static_cast<int>(std::floor(value)) - theta_min;
    return std::clamp(idx, 0, bin_count() - 1);
}

Binning binning_from_training(const std::vector<double>& values) {
    if (values.empty()) {
        throw EmptySample("cannot derive binning from an empty training set");
    }
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    Binning binning;
    binning.theta_min = static_cast<int>(std::floor(*lo));
    binning.theta_max = static_cast<int>(std::ceil(*hi));
    if (binning.theta_max <= binning.theta_min) {
        binning.theta_max = binning.theta_min + 1;
    }
    return binning;
}

ItaHistogram ita_histogram(const ItaSample& sample, const Binning& binning) {
    if (sample.values.empty()) {
        throw EmptySample("cannot build a histogram from an empty ITA sample");
    }
    ItaHistogram h;
    h.binning = binning;
    h.mass.assign(binning.bin_count(), 0.0);
    for (double v : sample.values) {
        h.mass[binning.index_of(v)] += 1.0;
    }
    double n = static_cast<double>(sample.values.size());
    for (double& m : h.mass) {
        m /= n;
    }
    return h;
}

ReferenceDistribution aggregate_reference(const std::vector<ItaHistogram>& histograms) {
    if (histograms.empty()) {
        throw EmptySample("cannot aggregate an empty histogram list");
    }
    const Binning binning = histograms.front().binning;
    for (const auto& h : histograms) {
        if (h.binning != binning) {
            throw MixedBinning();
        }
    }

    const int k = binning.bin_count();
    const std::size_t n = histograms.size();
    ReferenceDistribution ref;
    ref.binning = binning;
    ref.mass.assign(k, 0.0);

    std::vector<double> column(n);
    for (int j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = histograms[i].mass[j];
        }
        auto mid = column.begin() + n / 2;
        std::nth_element(column.begin(), mid, column.end());
        if (n % 2 == 1) {
            ref.mass[j] = *mid;
        } else {
            double upper = *mid;
            double lower = *std::max_element(column.begin(), mid);
            ref.mass[j] = 0.5 * (lower + upper);
        }
    }

    // The raw bin-wise median need not sum to one; renormalize.
    double total = 0.0;
    for (double m : ref.mass) {
        total += m;
    }
    if (total <= 0.0) {
        throw Error("reference aggregation degenerate: every bin-wise median is zero");
    }
    for (double& m : ref.mass) {
        m /= total;
    }
    return ref;
}

double median_ita(const ItaSample& sample) {
    if (sample.values.empty()) {
        throw EmptySample("median of an empty ITA sample");
    }
    std::vector<double> v = sample.values;
    auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) {
        return *mid;
    }
    double upper = *mid;
    double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

} // namespace tonekit::tone
