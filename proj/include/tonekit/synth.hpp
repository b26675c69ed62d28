#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/evaluation.hpp"
#include "tonekit/image.hpp"

namespace tonekit::synth {

/// One Gaussian component of the tone mixture, in ITA degrees.
struct ToneMode {
    double mean = 0.0;
    double std = 1.0;
    double proportion = 1.0;
};

struct SynthSpec {
    std::size_t n_samples = 0;
    std::vector<ToneMode> tone_mixture;
    int n_classes = 3;
    double label_noise_base = 0.05;
    double rarity_noise_gain = 0.3;
    std::uint64_t seed = 0;
    int image_size = 64;
    double train_fraction = 0.75;
    double band_width_deg = 12.0;      // tone band per class label
    double texture_amplitude_l = 2.5;  // smooth L* field amplitude
    double texture_noise_l = 0.2;      // iid per-pixel L* noise
    double hair_probability = 0.3;

    void validate() const; // throws InvalidSpec
};

SynthSpec load_spec(const std::filesystem::path& path);
void save_spec(const SynthSpec& spec, const std::filesystem::path& path);

struct SynthSample {
    std::string sample_id;
    evaluation::Split split = evaluation::Split::train;
    int mode = 0;                 // mixture component drawn
    double true_tone = 0.0;       // realized ITA degrees (clamped for rendering)
    double density_quantile = 0.0;
    std::string clean_label;
    std::string observed_label;  // differs from clean_label iff flipped
    bool flipped = false;
    RgbImage image;
    BinaryMask lesion_mask; // true = lesion pixel
};

struct SynthDataset {
    SynthSpec spec;
    std::vector<SynthSample> samples;
};

/// Deterministic under spec.seed: tone and label draws are sequential, swatch
/// rendering runs in parallel under per-sample derived seeds. Labels flip with
/// probability base + gain * (1 - density quantile), train split only, so test
/// labels stay clean for evaluation.
SynthDataset generate_synthetic(const SynthSpec& spec, int jobs = 1);

/// Writes images/, masks/, manifest.csv, ground_truth.csv and spec.json into
/// dir; the manifest is directly consumable by the extract stage.
void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir);

} // namespace tonekit::synth
