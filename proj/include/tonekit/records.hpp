#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/evaluation.hpp"
#include "tonekit/metrics.hpp"
#include "tonekit/tone.hpp"

namespace tonekit::records {

/// Per-sample histogram artifact produced by the extract stage. Carries the
/// manifest fields downstream stages need so they never re-read images.
struct HistogramRecord {
    std::string sample_id;
    evaluation::Split split = evaluation::Split::train;
    std::string label;
    double median_ita = 0.0;
    std::size_t n_pixels = 0;
    tone::ItaHistogram histogram;
};

void write_histogram(const std::filesystem::path& path, const HistogramRecord& rec);
HistogramRecord read_histogram(const std::filesystem::path& path);

struct ReferenceFile {
    tone::ReferenceDistribution distribution;
    std::size_t n_train = 0;
};

void write_reference(const std::filesystem::path& path, const ReferenceFile& ref);
ReferenceFile read_reference(const std::filesystem::path& path);

/// Row of the distance CSV: `sample_id,metric,raw,normalized`.
struct DistanceRow {
    std::string sample_id;
    metrics::MetricKind metric = metrics::MetricKind::WD;
    double raw = 0.0;
    double normalized = 0.0;
};

void write_distances(const std::filesystem::path& path, const std::vector<DistanceRow>& rows);
std::vector<DistanceRow> read_distances(const std::filesystem::path& path);

/// Row of the weight sidecar CSV:
/// `sample_id,metric,distance,density,drw,carw,combined`.
struct WeightRow {
    std::string sample_id;
    metrics::MetricKind metric = metrics::MetricKind::WD;
    double distance = 0.0; // normalized
    double density = 0.0;
    double drw = 0.0;
    double carw = 0.0;
    double combined = 0.0;
};

void write_weights(const std::filesystem::path& path, const std::vector<WeightRow>& rows);
std::vector<WeightRow> read_weights(const std::filesystem::path& path);

/// Predictions CSV: `sample_id,split,true_class,predicted_class,median_ita`
/// followed by one `d_<METRIC>` column per metric present.
void write_predictions(const std::filesystem::path& path,
                       const std::vector<evaluation::PredictionRecord>& records,
                       const std::vector<metrics::MetricKind>& metric_order);
std::vector<evaluation::PredictionRecord> read_predictions(const std::filesystem::path& path);

/// One extract-stage outcome per manifest row; skips carry a reason code.
struct ExtractionLogRow {
    std::string sample_id;
    std::string status; // "ok" or "skipped"
    std::string reason; // empty for ok rows
    std::size_t n_pixels = 0;
};

void write_extraction_log(const std::filesystem::path& path,
                          const std::vector<ExtractionLogRow>& rows);

/// FairnessReport as versioned JSON; NaN serializes as null.
void write_report(const std::filesystem::path& path, const evaluation::FairnessReport& report);

/// Plot-ready CSVs next to the report: per-metric bin table, per-type score
/// table, and the sampled logistic trend curve.
void write_plot_csvs(const std::filesystem::path& dir, const evaluation::FairnessReport& report);

} // namespace tonekit::records
