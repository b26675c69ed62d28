#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/evaluation.hpp"
#include "tonekit/imaging.hpp"
#include "tonekit/metrics.hpp"

namespace tonekit::pipeline {

/// Shared configuration for every pipeline command; validated before any work
/// starts. Stage inputs and outputs are files so external systems can splice
/// in at any boundary.
struct RunConfig {
    std::filesystem::path out_dir = ".";
    std::optional<int> theta_min; // binning overrides: both or neither
    std::optional<int> theta_max;
    imaging::HairParams hair;
    std::optional<double> bandwidth; // KDE override; Silverman's rule otherwise
    std::vector<metrics::MetricKind> selected_metrics{metrics::all_metrics.begin(),
                                                      metrics::all_metrics.end()};
    std::string weighting_mode = "none"; // none | carw | drw | combined
    metrics::MetricKind weight_metric = metrics::MetricKind::WD;
    std::optional<std::vector<double>> class_weights; // by sorted class name
    evaluation::FitzpatrickThresholds fitzpatrick;
    evaluation::F1Mode f1_mode = evaluation::F1Mode::macro;
    std::optional<std::uint64_t> seed; // overrides the synth spec seed
    int jobs = 1;
    int iterations = 600;
    double learning_rate = 2.0;

    void validate() const;
};

struct ExtractSummary {
    std::size_t n_ok = 0;
    std::size_t n_skipped = 0;
};

/// manifest -> out_dir/histograms/*.json + out_dir/extraction_log.csv.
/// Unreadable inputs and empty skin regions are logged skips, not failures;
/// the binning is frozen from the train split unless overridden.
ExtractSummary cmd_extract(const std::filesystem::path& manifest_path, const RunConfig& cfg);

/// histogram dir -> out_dir/reference.json, aggregated over the train split.
void cmd_reference(const std::filesystem::path& histogram_dir, const RunConfig& cfg);

/// histogram dir + reference -> out_dir/distances.csv + out_dir/distance_log.json.
/// Scalers are fitted on train rows and frozen for the rest.
void cmd_distance(const std::filesystem::path& histogram_dir,
                  const std::filesystem::path& reference_path, const RunConfig& cfg);

/// distances + manifest + histograms -> out_dir/weights.csv + out_dir/weights_log.json.
/// Every weight column is always computed; the mode is consumed at training time.
void cmd_weights(const std::filesystem::path& distances_csv,
                 const std::filesystem::path& manifest_path,
                 const std::filesystem::path& histogram_dir, const RunConfig& cfg);

/// synth spec -> synthetic dataset in manifest layout under out_dir.
void cmd_synth(const std::filesystem::path& spec_path, const RunConfig& cfg);

struct TrainSummary {
    bool converged = true;
    double final_loss = 0.0;
    std::size_t n_train = 0;
};

/// manifest + histograms + weight sidecar -> out_dir/model.json +
/// out_dir/predictions.csv + out_dir/training_log.json.
TrainSummary cmd_train_toy(const std::filesystem::path& manifest_path,
                           const std::filesystem::path& histogram_dir,
                           const std::filesystem::path& weights_csv, const RunConfig& cfg);

/// predictions -> out_dir/report.json + plot CSVs. When a manifest is given,
/// every prediction row is cross-checked against it.
void cmd_evaluate(const std::filesystem::path& predictions_csv,
                  const std::optional<std::filesystem::path>& manifest_path, const RunConfig& cfg);

} // namespace tonekit::pipeline
