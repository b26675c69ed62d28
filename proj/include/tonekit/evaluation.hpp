#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/metrics.hpp"

namespace tonekit::evaluation {

enum class Split { train, test };

/// One classified sample with its tone scalar and per-metric distances.
struct PredictionRecord {
    std::string sample_id;
    std::string true_class;
    std::string predicted_class;
    double median_ita = 0.0;
    std::map<metrics::MetricKind, double> distances; // normalized, in [0,1]
    Split split = Split::test;

    bool correct() const { return true_class == predicted_class; }
};

/// Lower ITA bounds for types 1-5; anything below the last cut is type 6.
/// Defaults to the standard cutoffs {55, 41, 28, 10, -30}.
struct FitzpatrickThresholds {
    std::array<double, 5> cuts{55.0, 41.0, 28.0, 10.0, -30.0};

    bool strictly_decreasing() const {
        for (std::size_t i = 1; i < cuts.size(); ++i) {
            if (!(cuts[i] < cuts[i - 1])) {
                return false;
            }
        }
        return true;
    }
};

/// Fitzpatrick type 1-6 from the median ITA.
/// Defaults: >=55 -> 1; [41,55) -> 2; [28,41) -> 3; [10,28) -> 4; [-30,10) -> 5; else 6.
int fitzpatrick_type(double median_ita, const FitzpatrickThresholds& thresholds = {});

/// Sturges' rule: K = ceil(log2 n) + 1 (computed in integer arithmetic).
int sturges_bins(std::size_t n);

/// K equal-width bin edges spanning [min, max] of the training values; K+1 edges.
std::vector<double> bin_edges(const std::vector<double>& training_values, int k);

/// Bin index for a value against frozen edges; out-of-range values clamp to the end bins.
int assign_bin(const std::vector<double>& edges, double value);

/// Spearman rank correlation with average-rank tie handling.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Spearman between per-bin training counts and per-bin test accuracy.
/// Bins whose accuracy is NaN (no test samples) are excluded pairwise.
double density_accuracy_spearman(const std::vector<double>& train_counts_per_bin,
                                 const std::vector<double>& test_accuracy_per_bin);

enum class F1Mode { macro, weighted };

struct TypeScore {
    std::size_t n = 0;
    double accuracy = 0.0;
    double f1 = 0.0;
};

/// Accuracy-vs-ITA logistic trend inside skin type 1.
struct ItaTrend {
    double acc_at_60 = 0.0;
    double acc_at_120 = 0.0;
    double drop_pct = 0.0;    // (p60 - p120) / p60
    double intercept = 0.0;
    double slope = 0.0;
    bool separated = false;   // perfectly separable correctness; estimates undefined
};

struct BinCorrelation {
    double rho = 0.0;
    std::vector<double> edges;
    std::vector<double> train_counts;
    std::vector<double> test_accuracy;  // NaN where a bin has no test samples
    std::vector<std::size_t> test_counts;
};

struct FairnessReport {
    std::map<int, TypeScore> per_type;
    double max_abs_gap_acc = 0.0;
    double max_abs_gap_f1 = 0.0;
    double sum_abs_mean_gap_acc = 0.0;
    double sum_abs_mean_gap_f1 = 0.0;
    std::map<metrics::MetricKind, BinCorrelation> per_metric;
    ItaTrend ita_trend;
};

/// Per-type accuracy/macro-F1 and the gap summaries over test records.
/// Types with zero samples are omitted.
FairnessReport group_report(const std::vector<PredictionRecord>& records,
                            F1Mode f1_mode = F1Mode::macro,
                            const FitzpatrickThresholds& thresholds = {});

/// Full report: group scores, per-metric Sturges-binned density-accuracy
/// correlations (bins frozen from the train split), and the ITA trend.
FairnessReport full_report(const std::vector<PredictionRecord>& records,
                           F1Mode f1_mode = F1Mode::macro,
                           const FitzpatrickThresholds& thresholds = {});

/// Univariate logistic regression of correctness on median ITA, restricted to
/// type-1 records. Perfect separation is reported via the flag.
ItaTrend logistic_ita_trend(const std::vector<PredictionRecord>& records,
                            const FitzpatrickThresholds& thresholds = {});

/// Macro or weighted F1 over true/predicted label pairs.
double f1_score(const std::vector<std::string>& truth, const std::vector<std::string>& predicted,
                F1Mode mode);

} // namespace tonekit::evaluation
