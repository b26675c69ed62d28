#include "tonekit/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace tonekit::evaluation {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

// Average ranks (1-based) with ties sharing the mean rank of their run.
std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        return kNan;
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

int fitzpatrick_type(double median_ita, const FitzpatrickThresholds& thresholds) {
    for (std::size_t i = 0; i < thresholds.cuts.size(); ++i) {
        if (median_ita >= thresholds.cuts[i]) {
            return static_cast<int>(i) + 1;
        }
    }
    return 6;
}

int sturges_bins(std::size_t n) {
    if (n == 0) {
        throw EmptySample("Sturges' rule needs at least one observation");
    }
    // ceil(log2 n) in exact integer arithmetic.
    int ceil_log2 = static_cast<int>(std::bit_width(n - 1));
    return ceil_log2 + 1;
}

std::vector<double> bin_edges(const std::vector<double>& training_values, int k) {
    if (training_values.empty()) {
        throw EmptySample("bin edges need at least one training value");
    }
    if (k < 1) {
        throw Error("bin count must be positive");
    }
    auto [lo_it, hi_it] = std::minmax_element(training_values.begin(), training_values.end());
    double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        throw DegenerateRange("all training values are equal");
    }
    std::vector<double> edges(k + 1);
    for (int i = 0; i <= k; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k);
    }
    edges.back() = hi;
    return edges;
}

int assign_bin(const std::vector<double>& edges, double value) {
    const int k = static_cast<int>(edges.size()) - 1;
    auto it = std::upper_bound(edges.begin(), edges.end(), value);
    int idx = static_cast<int>(it - edges.begin()) - 1;
    return std::clamp(idx, 0, k - 1);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw ShapeMismatch("correlation inputs must have equal lengths");
    }
    if (x.size() < 2) {
        throw TooFewBins();
    }
    return pearson(average_ranks(x), average_ranks(y));
}

double density_accuracy_spearman(const std::vector<double>& train_counts_per_bin,
                                 const std::vector<double>& test_accuracy_per_bin) {
    if (train_counts_per_bin.size() != test_accuracy_per_bin.size()) {
        throw ShapeMismatch("per-bin vectors must have equal lengths");
    }
    std::vector<double> counts, acc;
    for (std::size_t i = 0; i < train_counts_per_bin.size(); ++i) {
        if (!std::isnan(test_accuracy_per_bin[i])) {
            counts.push_back(train_counts_per_bin[i]);
            acc.push_back(test_accuracy_per_bin[i]);
        }
    }
    if (counts.size() < 2) {
        throw TooFewBins();
    }
    return spearman(counts, acc);
}

double f1_score(const std::vector<std::string>& truth, const std::vector<std::string>& predicted,
                F1Mode mode) {
    if (truth.size() != predicted.size()) {
        throw ShapeMismatch("truth and prediction vectors must have equal lengths");
    }
    std::set<std::string> labels(truth.begin(), truth.end());
    labels.insert(predicted.begin(), predicted.end());
    if (labels.empty()) {
        return 0.0;
    }

    double f1_sum = 0.0, weighted_sum = 0.0;
    std::size_t support_total = 0;
    for (const auto& label : labels) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            bool t = truth[i] == label;
            bool p = predicted[i] == label;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        std::size_t support = tp + fn;
        f1_sum += f1;
        weighted_sum += f1 * static_cast<double>(support);
        support_total += support;
    }
    if (mode == F1Mode::macro) {
        return f1_sum / static_cast<double>(labels.size());
    }
    return support_total > 0 ? weighted_sum / static_cast<double>(support_total) : 0.0;
}

FairnessReport group_report(const std::vector<PredictionRecord>& records, F1Mode f1_mode,
                            const FitzpatrickThresholds& thresholds) {
    FairnessReport report;

    std::map<int, std::vector<const PredictionRecord*>> by_type;
    for (const auto& r : records) {
        if (r.split == Split::test) {
            by_type[fitzpatrick_type(r.median_ita, thresholds)].push_back(&r);
        }
    }
    if (by_type.empty()) {
        throw Error("group report requires at least one test record");
    }

    std::vector<double> accs, f1s;
    for (const auto& [type, rs] : by_type) {
        TypeScore score;
        score.n = rs.size();
        std::vector<std::string> truth, predicted;
        std::size_t correct = 0;
        for (const auto* r : rs) {
            truth.push_back(r->true_class);
            predicted.push_back(r->predicted_class);
            correct += r->correct();
        }
        score.accuracy = static_cast<double>(correct) / static_cast<double>(rs.size());
        score.f1 = f1_score(truth, predicted, f1_mode);
        report.per_type[type] = score;
        accs.push_back(score.accuracy);
        f1s.push_back(score.f1);
    }

    auto gaps = [](const std::vector<double>& scores, double& max_gap, double& sum_gap) {
        double hi = *std::max_element(scores.begin(), scores.end());
        double mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                      static_cast<double>(scores.size());
        max_gap = 0.0;
        sum_gap = 0.0;
        for (double s : scores) {
            max_gap = std::max(max_gap, std::abs(hi - s));
            sum_gap += std::abs(mean - s);
        }
    };
    gaps(accs, report.max_abs_gap_acc, report.sum_abs_mean_gap_acc);
    gaps(f1s, report.max_abs_gap_f1, report.sum_abs_mean_gap_f1);
    return report;
}

FairnessReport full_report(const std::vector<PredictionRecord>& records, F1Mode f1_mode,
                           const FitzpatrickThresholds& thresholds) {
    FairnessReport report = group_report(records, f1_mode, thresholds);

    std::vector<const PredictionRecord*> train, test;
    for (const auto& r : records) {
        (r.split == Split::train ? train : test).push_back(&r);
    }

    for (metrics::MetricKind kind : metrics::all_metrics) {
        std::vector<double> train_values;
        for (const auto* r : train) {
            auto it = r->distances.find(kind);
            if (it != r->distances.end()) {
                train_values.push_back(it->second);
            }
        }
        if (train_values.empty()) {
            continue;
        }
        BinCorrelation corr;
        int k = sturges_bins(train_values.size());
        try {
            corr.edges = bin_edges(train_values, k);
        } catch (const DegenerateRange&) {
            corr.rho = kNan;
            report.per_metric[kind] = corr;
            continue;
        }

        corr.train_counts.assign(k, 0.0);
        for (double v : train_values) {
            corr.train_counts[assign_bin(corr.edges, v)] += 1.0;
        }

        corr.test_counts.assign(k, 0);
        std::vector<std::size_t> test_correct(k, 0);
        for (const auto* r : test) {
            auto it = r->distances.find(kind);
            if (it == r->distances.end()) {
                continue;
            }
            int bin = assign_bin(corr.edges, it->second);
            corr.test_counts[bin] += 1;
            test_correct[bin] += r->correct();
        }
        corr.test_accuracy.assign(k, kNan);
        for (int b = 0; b < k; ++b) {
            if (corr.test_counts[b] > 0) {
                corr.test_accuracy[b] =
                    static_cast<double>(test_correct[b]) / static_cast<double>(corr.test_counts[b]);
            }
        }
        try {
            corr.rho = density_accuracy_spearman(corr.train_counts, corr.test_accuracy);
        } catch (const TooFewBins&) {
            corr.rho = kNan;
        }
        report.per_metric[kind] = corr;
    }

    std::vector<PredictionRecord> test_records;
    for (const auto* r : test) {
        test_records.push_back(*r);
    }
    report.ita_trend = logistic_ita_trend(test_records, thresholds);
    return report;
}

ItaTrend logistic_ita_trend(const std::vector<PredictionRecord>& records,
                            const FitzpatrickThresholds& thresholds) {
    ItaTrend trend;
    trend.acc_at_60 = kNan;
    trend.acc_at_120 = kNan;
    trend.drop_pct = kNan;

    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : records) {
        if (fitzpatrick_type(r.median_ita, thresholds) == 1) {
            x.push_back(r.median_ita);
            y.push_back(r.correct() ? 1.0 : 0.0);
        }
    }

    const std::size_t n = x.size();
    std::size_t positives = static_cast<std::size_t>(std::accumulate(y.begin(), y.end(), 0.0));
    if (n < 10 || positives == 0 || positives == n) {
        trend.separated = true;
        return trend;
    }

    // Center the covariate for conditioning; transform the intercept back at the end.
    double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::vector<double> xc(n);
    double x_spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xc[i] = x[i] - x_mean;
        x_spread = std::max(x_spread, std::abs(xc[i]));
    }

    auto log_likelihood = [&](double b0, double b1) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = b0 + b1 * xc[i];
            // log sigma(z) and log(1 - sigma(z)) in a stable form
            double log_p = z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
            double log_q = z >= 0.0 ? -z - std::log1p(std::exp(-z)) : -std::log1p(std::exp(z));
            ll += y[i] > 0.5 ? log_p : log_q;
        }
        return ll;
    };

    double b0 = 0.0, b1 = 0.0;
    double ll = log_likelihood(b0, b1);
    constexpr int kMaxIterations = 500;
    constexpr double kTolerance = 1e-8;
    bool converged = false;

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        double g0 = 0.0, g1 = 0.0;
        double h00 = 0.0, h01 = 0.0, h11 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(b0 + b1 * xc[i]);
            double resid = y[i] - p;
            double w = p * (1.0 - p);
            g0 += resid;
            g1 += resid * xc[i];
            h00 += w;
            h01 += w * xc[i];
            h11 += w * xc[i] * xc[i];
        }
        double det = h00 * h11 - h01 * h01;
        if (!(std::abs(det) > 1e-12)) {
            trend.separated = true; // saturated probabilities: singular Hessian
            return trend;
        }
        double step0 = (h11 * g0 - h01 * g1) / det;
        double step1 = (h00 * g1 - h01 * g0) / det;

        // Damped Newton: halve the step while the likelihood does not improve.
        double scale = 1.0;
        double next_ll = ll;
        double nb0 = b0, nb1 = b1;
        for (int halving = 0; halving < 30; ++halving) {
            nb0 = b0 + scale * step0;
            nb1 = b1 + scale * step1;
            next_ll = log_likelihood(nb0, nb1);
            if (next_ll >= ll - 1e-12) {
                break;
            }
            scale *= 0.5;
        }
        double change = std::max(std::abs(nb0 - b0), std::abs(nb1 - b1));
        b0 = nb0;
        b1 = nb1;
        ll = next_ll;
        if (change < kTolerance) {
            converged = true;
            break;
        }
    }

    // Diverging coefficients mean the fitted probabilities saturated: separation.
    if (!converged || std::abs(b0) + std::abs(b1) * x_spread > 40.0) {
        trend.separated = true;
        return trend;
    }

    trend.intercept = b0 - b1 * x_mean;
    trend.slope = b1;
    trend.acc_at_60 = sigmoid(trend.intercept + trend.slope * 60.0);
    trend.acc_at_120 = sigmoid(trend.intercept + trend.slope * 120.0);
    trend.drop_pct = (trend.acc_at_60 - trend.acc_at_120) / trend.acc_at_60;
    return trend;
}

} // namespace tonekit::evaluation
