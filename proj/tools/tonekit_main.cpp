#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tonekit/metrics.hpp"
#include "tonekit/pipeline.hpp"

namespace {

void add_common(CLI::App* cmd, tonekit::pipeline::RunConfig& cfg) {
    cmd->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--jobs", cfg.jobs, "Worker threads for per-sample stages")
        ->capture_default_str();
}

void add_fitzpatrick(CLI::App* cmd, std::vector<double>& cuts) {
    cmd->add_option("--fitzpatrick-cuts", cuts,
                    "Lower ITA bounds for skin types 1-5 (default 55 41 28 10 -30)")
        ->expected(5);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skin tone distribution analysis and loss-reweighting toolkit"};
    app.require_subcommand(1);

    tonekit::pipeline::RunConfig cfg;

    std::filesystem::path manifest_path;
    std::filesystem::path histogram_dir;
    std::filesystem::path reference_path;
    std::filesystem::path distances_csv;
    std::filesystem::path weights_csv;
    std::filesystem::path predictions_csv;
    std::filesystem::path spec_path;
    std::filesystem::path eval_manifest;
    std::vector<std::string> metric_names;
    std::vector<double> fitz_cuts;
    std::vector<double> class_weights;
    std::string weight_metric = "WD";
    std::string f1_mode = "macro";
    int theta_min = 0;
    int theta_max = 0;
    double bandwidth = 0.0;
    std::uint64_t seed = 0;

    auto* extract = app.add_subcommand(
        "extract", "Per-sample ITA histograms and extraction log from a dataset manifest");
    extract->add_option("manifest", manifest_path, "Manifest file (CSV or JSONL)")->required();
    add_common(extract, cfg);
    auto* tmin = extract->add_option("--theta-min", theta_min,
                                     "Histogram lower bound in degrees (needs --theta-max)");
    auto* tmax = extract->add_option("--theta-max", theta_max,
                                     "Histogram upper bound in degrees (needs --theta-min)");
    extract->add_option("--clahe-clip", cfg.hair.clahe_clip_limit, "CLAHE clip limit")
        ->capture_default_str();
    extract->add_option("--clahe-grid", cfg.hair.clahe_tile_grid, "CLAHE tile grid size")
        ->capture_default_str();
    extract->add_option("--blackhat-kernel", cfg.hair.blackhat_kernel,
                        "Black Hat cross kernel size in pixels (odd)")
        ->capture_default_str();
    extract->add_option("--hair-threshold", cfg.hair.threshold,
                        "Threshold on the Black Hat response (0-255)")
        ->capture_default_str();
    extract->add_option("--dilate-radius", cfg.hair.dilate_radius,
                        "Hair mask dilation radius in pixels")
        ->capture_default_str();
    extract->callback([&] {
        if (*tmin) {
            cfg.theta_min = theta_min;
        }
        if (*tmax) {
            cfg.theta_max = theta_max;
        }
        auto summary = tonekit::pipeline::cmd_extract(manifest_path, cfg);
        std::cout << "histograms written: " << summary.n_ok << '\n';
        if (summary.n_skipped > 0) {
            std::cerr << "warning: skipped " << summary.n_skipped
                      << " sample(s); see extraction_log.csv\n";
        }
    });

    auto* reference = app.add_subcommand(
        "reference", "Aggregate train-split histograms into the reference distribution");
    reference->add_option("histograms", histogram_dir, "Histogram directory")->required();
    add_common(reference, cfg);
    reference->callback([&] { tonekit::pipeline::cmd_reference(histogram_dir, cfg); });

    auto* distance =
        app.add_subcommand("distance", "Distances of every histogram to the reference");
    distance->add_option("histograms", histogram_dir, "Histogram directory")->required();
    distance->add_option("reference", reference_path, "Reference distribution file")->required();
    add_common(distance, cfg);
    distance
        ->add_option("--metrics", metric_names,
                     "Comma-separated metric subset (default: all eleven)")
        ->delimiter(',');
    distance->callback([&] {
        if (!metric_names.empty()) {
            cfg.selected_metrics.clear();
            for (const auto& name : metric_names) {
                cfg.selected_metrics.push_back(tonekit::metrics::metric_from_string(name));
            }
        }
        tonekit::pipeline::cmd_distance(histogram_dir, reference_path, cfg);
    });

    auto* weights = app.add_subcommand(
        "weights", "KDE densities, inverse-density, categorical and combined loss weights");
    weights->add_option("distances", distances_csv, "Distance CSV")->required();
    weights->add_option("manifest", manifest_path, "Manifest file")->required();
    weights->add_option("histograms", histogram_dir, "Histogram directory")->required();
    add_common(weights, cfg);
    auto* bw = weights->add_option("--bandwidth", bandwidth,
                                   "KDE bandwidth override (default: Silverman's rule)");
    weights->add_option("--mode", cfg.weighting_mode, "Weighting mode recorded in the run log")
        ->check(CLI::IsMember({"none", "carw", "drw", "combined"}))
        ->capture_default_str();
    add_fitzpatrick(weights, fitz_cuts);
    weights->callback([&] {
        if (*bw) {
            cfg.bandwidth = bandwidth;
        }
        if (!fitz_cuts.empty()) {
            std::copy(fitz_cuts.begin(), fitz_cuts.end(), cfg.fitzpatrick.cuts.begin());
        }
        tonekit::pipeline::cmd_weights(distances_csv, manifest_path, histogram_dir, cfg);
    });

    auto* synth = app.add_subcommand("synth", "Synthetic tone-controlled dataset in manifest layout");
    synth->add_option("spec", spec_path, "Synthesis spec JSON")->required();
    add_common(synth, cfg);
    auto* seed_opt = synth->add_option("--seed", seed, "Override the spec seed");
    synth->callback([&] {
        if (*seed_opt) {
            cfg.seed = seed;
        }
        tonekit::pipeline::cmd_synth(spec_path, cfg);
    });

    auto* train = app.add_subcommand(
        "train-toy", "Multinomial logistic classifier over histogram features");
    train->add_option("manifest", manifest_path, "Manifest file")->required();
    train->add_option("histograms", histogram_dir, "Histogram directory")->required();
    train->add_option("weights", weights_csv, "Weight sidecar CSV")->required();
    add_common(train, cfg);
    train->add_option("--mode", cfg.weighting_mode, "Loss weighting mode")
        ->check(CLI::IsMember({"none", "carw", "drw", "combined"}))
        ->capture_default_str();
    train->add_option("--metric", weight_metric, "Metric whose weights feed the loss")
        ->capture_default_str();
    train->add_option("--iterations", cfg.iterations, "Gradient descent iterations")
        ->capture_default_str();
    train->add_option("--learning-rate", cfg.learning_rate, "Gradient descent step size")
        ->capture_default_str();
    train
        ->add_option("--class-weights", class_weights,
                     "Per-class loss weights, by sorted class name")
        ->delimiter(',');
    train->callback([&] {
        cfg.weight_metric = tonekit::metrics::metric_from_string(weight_metric);
        if (!class_weights.empty()) {
            cfg.class_weights = class_weights;
        }
        auto summary = tonekit::pipeline::cmd_train_toy(manifest_path, histogram_dir, weights_csv, cfg);
        std::cout << "trained on " << summary.n_train << " samples, final loss "
                  << summary.final_loss << '\n';
        if (!summary.converged) {
            std::cerr << "warning: loss did not decrease over the final 10% of iterations\n";
        }
    });

    auto* evaluate = app.add_subcommand("evaluate", "Fairness report and plot CSVs from predictions");
    evaluate->add_option("predictions", predictions_csv, "Prediction CSV")->required();
    add_common(evaluate, cfg);
    auto* mf_opt = evaluate->add_option("--manifest", eval_manifest,
                                        "Manifest to cross-check predictions against");
    evaluate->add_option("--f1", f1_mode, "F1 averaging mode")
        ->check(CLI::IsMember({"macro", "weighted"}))
        ->capture_default_str();
    add_fitzpatrick(evaluate, fitz_cuts);
    evaluate->callback([&] {
        cfg.f1_mode = f1_mode == "weighted" ? tonekit::evaluation::F1Mode::weighted
                                            : tonekit::evaluation::F1Mode::macro;
        if (!fitz_cuts.empty()) {
            std::copy(fitz_cuts.begin(), fitz_cuts.end(), cfg.fitzpatrick.cuts.begin());
        }
        std::optional<std::filesystem::path> mf;
        if (*mf_opt) {
            mf = eval_manifest;
        }
        tonekit::pipeline::cmd_evaluate(predictions_csv, mf, cfg);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const tonekit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
