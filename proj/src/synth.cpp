#include "tonekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tonekit/manifest.hpp"
#include "tonekit/tone.hpp"
#include "tonekit/util.hpp"

#include <fstream>

namespace tonekit::synth {

namespace {

constexpr double kToneClamp = 72.0; // keeps L* = 50 + 15 tan(ITA) renderable

// Platform-stable replacements for the unspecified std distributions: the
// mt19937_64 output stream is standardized, so these draws reproduce exactly.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_normal(std::mt19937_64& rng) {
    double u1 = std::max(next_unit(rng), 1e-300);
    double u2 = next_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int next_index(std::mt19937_64& rng, int n) {
    return std::min(n - 1, static_cast<int>(next_unit(rng) * n));
}

double mixture_pdf(const SynthSpec& spec, double t) {
    double f = 0.0;
    for (const auto& m : spec.tone_mixture) {
        double z = (t - m.mean) / m.std;
        f += m.proportion * std::exp(-0.5 * z * z) / (m.std * std::sqrt(2.0 * std::numbers::pi));
    }
    return f;
}

std::string class_name(int cls) {
    return "c" + std::to_string(cls);
}

int band_class(double tone, const SynthSpec& spec) {
    int band = static_cast<int>(std::floor((tone + 90.0) / spec.band_width_deg));
    int cls = band % spec.n_classes;
    return cls < 0 ? cls + spec.n_classes : cls;
}

void render_sample(SynthSample& s, const SynthSpec& spec, std::mt19937_64& rng) {
    const int sz = spec.image_size;
    s.image = RgbImage(sz, sz);
    s.lesion_mask = BinaryMask(sz, sz, false);

    // Skin field: base L* from the drawn tone plus a smooth sinusoid and tiny
    // iid noise, both in L* units so the texture contrast stays tone-invariant
    // (a field in ITA degrees would blow up through tan at extreme tones and
    // trip the hair detector).
    double base_l = 50.0 + 15.0 * std::tan(s.true_tone * std::numbers::pi / 180.0);
    double wave_x = 0.5 + next_unit(rng);
    double wave_y = 0.5 + next_unit(rng);
    double phase = next_unit(rng) * 2.0 * std::numbers::pi;
    for (int y = 0; y < sz; ++y) {
        for (int x = 0; x < sz; ++x) {
            double swell = std::sin(2.0 * std::numbers::pi * (wave_x * x + wave_y * y) / sz + phase);
            double noise = spec.texture_noise_l > 0.0 ? next_normal(rng) * spec.texture_noise_l : 0.0;
            double l = std::clamp(base_l + spec.texture_amplitude_l * swell + noise, 1.0, 99.0);
            std::uint8_t r, g, b;
            tone::lab_to_rgb({l, 10.0, 15.0}, r, g, b);
            s.image.set(x, y, r, g, b);
        }
    }

    double cx = sz / 2.0 + (next_unit(rng) - 0.5) * sz / 4.0;
    double cy = sz / 2.0 + (next_unit(rng) - 0.5) * sz / 4.0;
    double radius = sz / 6.0 + next_unit(rng) * sz / 12.0;
    for (int y = 0; y < sz; ++y) {
        for (int x = 0; x < sz; ++x) {
            double dx = x - cx;
            double dy = y - cy;
            if (dx * dx + dy * dy <= radius * radius) {
                s.lesion_mask.set(x, y, true);
                auto* p = s.image.at(x, y);
                p[0] = static_cast<std::uint8_t>(p[0] * 0.45);
                p[1] = static_cast<std::uint8_t>(p[1] * 0.35);
                p[2] = static_cast<std::uint8_t>(p[2] * 0.30);
            }
        }
    }

    int strokes = next_unit(rng) < spec.hair_probability ? 1 + next_index(rng, 3) : 0;
    for (int k = 0; k < strokes; ++k) {
        double x0 = next_unit(rng) * sz;
        double y0 = next_unit(rng) * sz;
        double angle = next_unit(rng) * std::numbers::pi;
        auto shade = static_cast<std::uint8_t>(20 + next_index(rng, 20));
        double dx = std::cos(angle);
        double dy = std::sin(angle);
        for (double t = -1.5 * sz; t <= 1.5 * sz; t += 0.5) {
            int xi = static_cast<int>(std::lround(x0 + dx * t));
            int yi = static_cast<int>(std::lround(y0 + dy * t));
            if (xi >= 0 && xi < sz && yi >= 0 && yi < sz) {
                s.image.set(xi, yi, shade, static_cast<std::uint8_t>(shade * 0.8),
                            static_cast<std::uint8_t>(shade * 0.7));
            }
        }
    }
}

} // namespace

void SynthSpec::validate() const {
    if (n_samples == 0) {
        throw InvalidSpec("n_samples must be positive");
    }
    if (tone_mixture.empty()) {
        throw InvalidSpec("tone_mixture must have at least one mode");
    }
    double total = 0.0;
    for (const auto& m : tone_mixture) {
        if (m.std <= 0.0) {
            throw InvalidSpec("mode std must be positive");
        }
        if (m.proportion < 0.0) {
            throw InvalidSpec("mode proportion must be non-negative");
        }
        total += m.proportion;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidSpec("mode proportions must sum to 1, got " + util::format_double(total));
    }
    if (n_classes < 2) {
        throw InvalidSpec("n_classes must be at least 2");
    }
    if (label_noise_base < 0.0 || label_noise_base > 1.0) {
        throw InvalidSpec("label_noise_base must be in [0,1]");
    }
    if (rarity_noise_gain < 0.0) {
        throw InvalidSpec("rarity_noise_gain must be non-negative");
    }
    if (image_size < 8) {
        throw InvalidSpec("image_size must be at least 8");
    }
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw InvalidSpec("train_fraction must be in (0,1]");
    }
    if (band_width_deg <= 0.0) {
        throw InvalidSpec("band_width_deg must be positive");
    }
    if (texture_amplitude_l < 0.0 || texture_noise_l < 0.0) {
        throw InvalidSpec("texture parameters must be non-negative");
    }
    if (hair_probability < 0.0 || hair_probability > 1.0) {
        throw InvalidSpec("hair_probability must be in [0,1]");
    }
}

SynthSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open spec: " + path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError(path.string() + ": invalid JSON");
    }
    const std::string context = path.filename().string();
    for (const char* key : {"n_samples", "tone_mixture", "seed"}) {
        if (!j.contains(key)) {
            throw ParseError(context + ": missing field '" + std::string(key) + "'");
        }
    }
    SynthSpec spec;
    spec.n_samples = j["n_samples"].get<std::size_t>();
    if (!j["tone_mixture"].is_array()) {
        throw ParseError(context + ": tone_mixture must be an array");
    }
    for (const auto& jm : j["tone_mixture"]) {
        for (const char* key : {"mean", "std", "proportion"}) {
            if (!jm.contains(key)) {
                throw ParseError(context + ": tone_mixture entries need mean, std, proportion");
            }
        }
        spec.tone_mixture.push_back(
            {jm["mean"].get<double>(), jm["std"].get<double>(), jm["proportion"].get<double>()});
    }
    spec.seed = j["seed"].get<std::uint64_t>();
    spec.n_classes = j.value("n_classes", spec.n_classes);
    spec.label_noise_base = j.value("label_noise_base", spec.label_noise_base);
    spec.rarity_noise_gain = j.value("rarity_noise_gain", spec.rarity_noise_gain);
    spec.image_size = j.value("image_size", spec.image_size);
    spec.train_fraction = j.value("train_fraction", spec.train_fraction);
    spec.band_width_deg = j.value("band_width_deg", spec.band_width_deg);
    spec.texture_amplitude_l = j.value("texture_amplitude_l", spec.texture_amplitude_l);
    spec.texture_noise_l = j.value("texture_noise_l", spec.texture_noise_l);
    spec.hair_probability = j.value("hair_probability", spec.hair_probability);
    spec.validate();
    return spec;
}

void save_spec(const SynthSpec& spec, const std::filesystem::path& path) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : spec.tone_mixture) {
        modes.push_back({{"mean", m.mean}, {"std", m.std}, {"proportion", m.proportion}});
    }
    nlohmann::json j = {
        {"n_samples", spec.n_samples},
        {"tone_mixture", modes},
        {"n_classes", spec.n_classes},
        {"label_noise_base", spec.label_noise_base},
        {"rarity_noise_gain", spec.rarity_noise_gain},
        {"seed", spec.seed},
        {"image_size", spec.image_size},
        {"train_fraction", spec.train_fraction},
        {"band_width_deg", spec.band_width_deg},
        {"texture_amplitude_l", spec.texture_amplitude_l},
        {"texture_noise_l", spec.texture_noise_l},
        {"hair_probability", spec.hair_probability},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

SynthDataset generate_synthetic(const SynthSpec& spec, int jobs) {
    spec.validate();
    const std::size_t n = spec.n_samples;

    SynthDataset ds;
    ds.spec = spec;
    ds.samples.resize(n);

    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
    n_train = std::min(n_train, n);
    if (n >= 2 && spec.train_fraction < 1.0) {
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    }

    std::size_t id_width = std::max<std::size_t>(4, std::to_string(n - 1).size());

    std::vector<double> pdf_values(n);
    std::vector<double> flip_draw(n);
    std::vector<int> flip_offset(n);
    std::vector<int> clean_class(n);

    for (std::size_t i = 0; i < n; ++i) {
        auto& s = ds.samples[i];
        std::string digits = std::to_string(i);
        s.sample_id = "s" + std::string(id_width - digits.size(), '0') + digits;
        s.split = i < n_train ? evaluation::Split::train : evaluation::Split::test;

        std::mt19937_64 rng(util::splitmix64(spec.seed + 2 * i));
        double u = next_unit(rng);
        double cum = 0.0;
        int mode = static_cast<int>(spec.tone_mixture.size()) - 1;
        for (std::size_t k = 0; k < spec.tone_mixture.size(); ++k) {
            cum += spec.tone_mixture[k].proportion;
            if (u < cum) {
                mode = static_cast<int>(k);
                break;
            }
        }
        s.mode = mode;
        const auto& m = spec.tone_mixture[static_cast<std::size_t>(mode)];
        s.true_tone = std::clamp(m.mean + next_normal(rng) * m.std, -kToneClamp, kToneClamp);
        clean_class[i] = band_class(s.true_tone, spec);
        s.clean_label = class_name(clean_class[i]);

        flip_draw[i] = next_unit(rng);
        flip_offset[i] = 1 + next_index(rng, spec.n_classes - 1);
        pdf_values[i] = mixture_pdf(spec, s.true_tone);
    }

    // Density quantile = rank of the mixture pdf value among all samples.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pdf_values[a] != pdf_values[b] ? pdf_values[a] < pdf_values[b] : a < b;
    });
    for (std::size_t rank = 0; rank < n; ++rank) {
        ds.samples[order[rank]].density_quantile =
            n > 1 ? static_cast<double>(rank) / static_cast<double>(n - 1) : 1.0;
    }

    // Rarity-dependent label noise; applied to the train split only so the
    // test labels stay a clean target for the fairness evaluation.
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = ds.samples[i];
        double p = std::clamp(
            spec.label_noise_base + spec.rarity_noise_gain * (1.0 - s.density_quantile), 0.0, 1.0);
        s.flipped = s.split == evaluation::Split::train && flip_draw[i] < p;
        int observed = s.flipped ? (clean_class[i] + flip_offset[i]) % spec.n_classes : clean_class[i];
        s.observed_label = class_name(observed);
    }

    util::parallel_for(n, jobs, [&](std::size_t i) {
        std::mt19937_64 rng(util::splitmix64(spec.seed + 2 * i + 1));
        render_sample(ds.samples[i], spec, rng);
    });

    return ds;
}

void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    std::filesystem::create_directories(dir / "masks");

    for (const auto& s : dataset.samples) {
        save_rgb_image(s.image, (dir / "images" / (s.sample_id + ".png")).string());
        save_mask(s.lesion_mask, (dir / "masks" / (s.sample_id + ".png")).string());
    }

    {
        std::ofstream out(dir / "manifest.csv", std::ios::binary);
        if (!out) {
            throw Error("cannot write " + (dir / "manifest.csv").string());
        }
        out << "sample_id,image_path,lesion_mask_path,label,split\n";
        for (const auto& s : dataset.samples) {
            out << s.sample_id << ",images/" << s.sample_id << ".png,masks/" << s.sample_id
                << ".png," << util::csv_escape(s.observed_label) << ','
                << manifest::to_string(s.split) << '\n';
        }
    }
    {
        std::ofstream out(dir / "ground_truth.csv", std::ios::binary);
        if (!out) {
            throw Error("cannot write " + (dir / "ground_truth.csv").string());
        }
        out << "sample_id,split,mode,true_tone,density_quantile,clean_label,observed_label,flipped\n";
        for (const auto& s : dataset.samples) {
            out << s.sample_id << ',' << manifest::to_string(s.split) << ',' << s.mode << ','
                << util::format_double(s.true_tone) << ','
                << util::format_double(s.density_quantile) << ',' << s.clean_label << ','
                << s.observed_label << ',' << (s.flipped ? 1 : 0) << '\n';
        }
    }
    save_spec(dataset.spec, dir / "spec.json");
}

} // namespace tonekit::synth
