#include "tonekit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tonekit::metrics {

bool is_similarity(MetricKind kind) {
    return kind == MetricKind::FS || kind == MetricKind::HS;
}

std::string to_string(MetricKind kind) {
    switch (kind) {
    case MetricKind::AD: return "AD";
    case MetricKind::CVM: return "CVM";
    case MetricKind::FS: return "FS";
    case MetricKind::HS: return "HS";
    case MetricKind::HM: return "HM";
    case MetricKind::KL: return "KL";
    case MetricKind::KS: return "KS";
    case MetricKind::KP: return "KP";
    case MetricKind::KD: return "KD";
    case MetricKind::PF: return "PF";
    case MetricKind::WD: return "WD";
    }
    return "?";
}

MetricKind metric_from_string(const std::string& name) {
    for (MetricKind kind : all_metrics) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw Error("unknown metric: " + name);
}

namespace {

std::vector<double> prefix_sums(std::span<const double> mass) {
    std::vector<double> out(mass.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        acc += mass[i];
        out[i] = acc;
    }
    return out;
}

constexpr double kKlEpsilon = 1e-10;
constexpr double kCdfEdge = 1e-12;

} // namespace

Cdf cdf(const tone::ItaHistogram& h) {
    return {h.binning, prefix_sums(h.mass)};
}

Cdf cdf(const tone::ReferenceDistribution& ref) {
    return {ref.binning, prefix_sums(ref.mass)};
}

double distance(MetricKind kind, const tone::ItaHistogram& p, const tone::ReferenceDistribution& q) {
    if (p.binning != q.binning) {
        throw MixedBinning("histogram and reference binnings differ");
    }
    return distance(kind, p.mass, q.mass, tone::Binning::width);
}

double distance(MetricKind kind, std::span<const double> p, std::span<const double> q,
                double bin_width) {
    if (p.size() != q.size()) {
        throw MixedBinning("mass vectors have different lengths");
    }
    const std::size_t k = p.size();

    switch (kind) {
    case MetricKind::FS: {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            s += std::sqrt(p[i] * q[i]);
        }
        return s;
    }
    case MetricKind::HM: {
        // Algebraically sqrt(1 - FS), but summing squared root-differences keeps
        // the identity HM(P,P) = 0 exact instead of sqrt(rounding noise).
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double d = std::sqrt(p[i]) - std::sqrt(q[i]);
            s += d * d;
        }
        return std::sqrt(0.5 * s);
    }
    case MetricKind::HS: {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double denom = p[i] + q[i];
            if (denom > 0.0) {
                s += 2.0 * p[i] * q[i] / denom;
            }
        }
        return s;
    }
    case MetricKind::KL: {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (p[i] > 0.0) {
                s += p[i] * std::log(p[i] / std::max(q[i], kKlEpsilon));
            }
        }
        return s;
    }
    case MetricKind::KD: {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double d = std::abs(p[i] - q[i]);
            s += d / (1.0 + d);
        }
        return s;
    }
    case MetricKind::PF: {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double d = p[i] - q[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    case MetricKind::KS:
    case MetricKind::KP:
    case MetricKind::WD:
    case MetricKind::CVM:
    case MetricKind::AD: {
        // CDF-based forms share one pass over the prefix sums.
        double fp = 0.0, fq = 0.0;
        double sup_abs = 0.0, sup_pq = 0.0, sup_qp = 0.0;
        double wd = 0.0, cvm = 0.0, ad = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            fp += p[i];
            fq += q[i];
            double diff = fp - fq;
            sup_abs = std::max(sup_abs, std::abs(diff));
            sup_pq = std::max(sup_pq, diff);
            sup_qp = std::max(sup_qp, -diff);
            wd += std::abs(diff) * bin_width;
            cvm += diff * diff * bin_width;
            // Support edges where F_Q(1-F_Q) = 0 are excluded from the AD sum.
            // The edge test is epsilon-robust: prefix-sum rounding can leave F_Q
            // a few ulp away from 1 past the reference support.
            if (fq > kCdfEdge && fq < 1.0 - kCdfEdge) {
                ad += diff * diff / (fq * (1.0 - fq)) * bin_width;
            }
        }
        switch (kind) {
        case MetricKind::KS: return sup_abs;
        case MetricKind::KP: return sup_pq + sup_qp;
        case MetricKind::WD: return wd;
        case MetricKind::CVM: return cvm;
        default: return ad;
        }
    }
    }
    throw Error("unhandled metric kind");
}

MinMaxScaler fit_scaler(MetricKind kind, const std::vector<double>& training_raws) {
    if (training_raws.empty()) {
        throw EmptySample("cannot fit a scaler on zero values");
    }
    auto [lo, hi] = std::minmax_element(training_raws.begin(), training_raws.end());
    return {kind, *lo, *hi};
}

double apply_scaler(const MinMaxScaler& s, double raw) {
    if (s.hi <= s.lo) {
        return 0.0;
    }
    return std::clamp((raw - s.lo) / (s.hi - s.lo), 0.0, 1.0);
}

} // namespace tonekit::metrics
