#include "tonekit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "tonekit/image.hpp"
#include "tonekit/manifest.hpp"
#include "tonekit/records.hpp"
#include "tonekit/synth.hpp"
#include "tonekit/tone.hpp"
#include "tonekit/toytrain.hpp"
#include "tonekit/util.hpp"
#include "tonekit/weighting.hpp"

namespace tonekit::pipeline {

namespace {

using nlohmann::json;

void dump_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

std::vector<records::HistogramRecord> read_histogram_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error("histogram directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            paths.push_back(entry.path());
        }
    }
    if (paths.empty()) {
        throw Error("no histogram files in " + dir.string());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<records::HistogramRecord> recs;
    recs.reserve(paths.size());
    for (const auto& p : paths) {
        recs.push_back(records::read_histogram(p));
    }
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (!(recs[i].histogram.binning == recs[0].histogram.binning)) {
            throw MixedBinning("histogram " + recs[i].sample_id +
                               " uses a different binning than " + recs[0].sample_id);
        }
    }
    return recs;
}

std::map<std::string, const manifest::Row*> index_manifest(const manifest::Manifest& mf) {
    std::map<std::string, const manifest::Row*> by_id;
    for (const auto& row : mf.rows) {
        by_id[row.sample_id] = &row;
    }
    return by_id;
}

void cross_check(const records::HistogramRecord& rec,
                 const std::map<std::string, const manifest::Row*>& by_id) {
    auto it = by_id.find(rec.sample_id);
    if (it == by_id.end()) {
        throw ParseError("sample '" + rec.sample_id + "' is not in the manifest");
    }
    if (it->second->label != rec.label) {
        throw ParseError("sample '" + rec.sample_id + "': histogram label '" + rec.label +
                         "' disagrees with the manifest");
    }
    if (it->second->split != rec.split) {
        throw ParseError("sample '" + rec.sample_id + "': histogram split disagrees with the manifest");
    }
}

json fitzpatrick_json(const evaluation::FitzpatrickThresholds& t) {
    return json(std::vector<double>(t.cuts.begin(), t.cuts.end()));
}

} // namespace

void RunConfig::validate() const {
    if (theta_min.has_value() != theta_max.has_value()) {
        throw Error("theta overrides must set both bounds or neither");
    }
    if (theta_min && !(*theta_min < *theta_max)) {
        throw Error("theta_min must be below theta_max");
    }
    if (bandwidth && !(*bandwidth > 0.0)) {
        throw Error("bandwidth must be positive");
    }
    if (selected_metrics.empty()) {
        throw Error("at least one metric must be selected");
    }
    std::set<metrics::MetricKind> seen(selected_metrics.begin(), selected_metrics.end());
    if (seen.size() != selected_metrics.size()) {
        throw Error("duplicate metric selection");
    }
    if (weighting_mode != "none" && weighting_mode != "carw" && weighting_mode != "drw" &&
        weighting_mode != "combined") {
        throw Error("weighting mode must be none, carw, drw or combined");
    }
    if (class_weights) {
        for (double w : *class_weights) {
            if (!(w >= 0.0)) {
                throw Error("class weights must be non-negative");
            }
        }
    }
    if (!fitzpatrick.strictly_decreasing()) {
        throw Error("Fitzpatrick thresholds must be strictly decreasing");
    }
    if (jobs < 1) {
        throw Error("jobs must be at least 1");
    }
    if (iterations < 1) {
        throw Error("iterations must be at least 1");
    }
    if (!(learning_rate > 0.0)) {
        throw Error("learning rate must be positive");
    }
    if (!(hair.clahe_clip_limit > 0.0) || hair.clahe_tile_grid < 1) {
        throw Error("invalid CLAHE parameters");
    }
    if (hair.blackhat_kernel < 3 || hair.blackhat_kernel % 2 == 0) {
        throw Error("Black Hat kernel must be odd and at least 3");
    }
    if (hair.threshold < 0 || hair.threshold > 255) {
        throw Error("hair threshold must be in [0,255]");
    }
    if (hair.dilate_radius < 0) {
        throw Error("dilate radius must be non-negative");
    }
}

ExtractSummary cmd_extract(const std::filesystem::path& manifest_path, const RunConfig& cfg) {
    cfg.validate();
    auto mf = manifest::load_manifest(manifest_path);
    const std::size_t n = mf.rows.size();

    struct PerSample {
        tone::ItaSample values;
        bool ok = false;
        std::string reason;
    };
    std::vector<PerSample> per(n);

    util::parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const auto& row = mf.rows[i];
        auto& slot = per[i];
        try {
            RgbImage image = load_rgb_image(row.image_path.string());
            BinaryMask lesion = load_mask(row.lesion_mask_path.string());
            BinaryMask hair = imaging::detect_hair_mask(image, cfg.hair);
            auto skin = imaging::extract_skin_pixels(image, lesion, hair);
            slot.values.values.reserve(skin.lab_pixels.size());
            for (const auto& lab : skin.lab_pixels) {
                slot.values.values.push_back(tone::ita(lab.l, lab.b));
            }
            slot.ok = true;
        } catch (const EmptySkinRegion&) {
            slot.reason = "empty_skin_region";
        } catch (const ShapeMismatch&) {
            slot.reason = "mask_mismatch";
        } catch (const Error&) {
            slot.reason = "load_failed";
        }
    });

    tone::Binning binning;
    if (cfg.theta_min) {
        binning = {*cfg.theta_min, *cfg.theta_max};
    } else {
        std::vector<double> train_values;
        for (std::size_t i = 0; i < n; ++i) {
            if (per[i].ok && mf.rows[i].split == evaluation::Split::train) {
                train_values.insert(train_values.end(), per[i].values.values.begin(),
                                    per[i].values.values.end());
            }
        }
        if (train_values.empty()) {
            throw Error("no usable train samples to fix the binning");
        }
        binning = tone::binning_from_training(train_values);
    }

    const auto hist_dir = cfg.out_dir / "histograms";
    std::filesystem::create_directories(hist_dir);
    for (const auto& entry : std::filesystem::directory_iterator(hist_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            std::filesystem::remove(entry.path());
        }
    }

    ExtractSummary summary;
    std::vector<records::ExtractionLogRow> log(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = mf.rows[i];
        auto& entry = log[i];
        entry.sample_id = row.sample_id;
        if (!per[i].ok) {
            entry.status = "skipped";
            entry.reason = per[i].reason;
            ++summary.n_skipped;
            continue;
        }
        records::HistogramRecord rec;
        rec.sample_id = row.sample_id;
        rec.split = row.split;
        rec.label = row.label;
        rec.median_ita = tone::median_ita(per[i].values);
        rec.n_pixels = per[i].values.values.size();
        rec.histogram = tone::ita_histogram(per[i].values, binning);
        records::write_histogram(hist_dir / (row.sample_id + ".json"), rec);
        entry.status = "ok";
        entry.n_pixels = rec.n_pixels;
        ++summary.n_ok;
    }
    records::write_extraction_log(cfg.out_dir / "extraction_log.csv", log);
    return summary;
}

void cmd_reference(const std::filesystem::path& histogram_dir, const RunConfig& cfg) {
    cfg.validate();
    auto recs = read_histogram_dir(histogram_dir);

    std::vector<tone::ItaHistogram> train;
    for (const auto& r : recs) {
        if (r.split == evaluation::Split::train) {
            train.push_back(r.histogram);
        }
    }
    if (train.empty()) {
        throw EmptySample("no train split histograms in " + histogram_dir.string());
    }

    records::ReferenceFile ref;
    ref.distribution = tone::aggregate_reference(train);
    ref.n_train = train.size();
    std::filesystem::create_directories(cfg.out_dir);
    records::write_reference(cfg.out_dir / "reference.json", ref);
}

void cmd_distance(const std::filesystem::path& histogram_dir,
                  const std::filesystem::path& reference_path, const RunConfig& cfg) {
    cfg.validate();
    auto ref = records::read_reference(reference_path);
    auto recs = read_histogram_dir(histogram_dir);
    if (!(recs[0].histogram.binning == ref.distribution.binning)) {
        throw MixedBinning("histograms and reference use different binnings");
    }

    std::size_t n_train = 0;
    for (const auto& r : recs) {
        n_train += r.split == evaluation::Split::train;
    }
    if (n_train == 0) {
        throw EmptySample("distance normalization needs train split histograms");
    }

    std::map<metrics::MetricKind, std::vector<double>> raw; // per metric, in record order
    for (auto kind : cfg.selected_metrics) {
        auto& values = raw[kind];
        values.resize(recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
            values[i] = metrics::distance(kind, recs[i].histogram, ref.distribution);
        }
    }

    json scaler_log = json::object();
    std::map<metrics::MetricKind, metrics::MinMaxScaler> scalers;
    for (auto kind : cfg.selected_metrics) {
        std::vector<double> train_raws;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (recs[i].split == evaluation::Split::train) {
                train_raws.push_back(raw[kind][i]);
            }
        }
        scalers[kind] = metrics::fit_scaler(kind, train_raws);
        scaler_log[metrics::to_string(kind)] = {{"lo", scalers[kind].lo}, {"hi", scalers[kind].hi}};
    }

    std::vector<records::DistanceRow> rows;
    rows.reserve(recs.size() * cfg.selected_metrics.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        for (auto kind : cfg.selected_metrics) {
            records::DistanceRow row;
            row.sample_id = recs[i].sample_id;
            row.metric = kind;
            row.raw = raw[kind][i];
            row.normalized = metrics::apply_scaler(scalers[kind], row.raw);
            rows.push_back(std::move(row));
        }
    }

    std::filesystem::create_directories(cfg.out_dir);
    records::write_distances(cfg.out_dir / "distances.csv", rows);
    dump_json(cfg.out_dir / "distance_log.json",
              {{"n_samples", recs.size()}, {"n_train", n_train}, {"scalers", scaler_log}});
}

void cmd_weights(const std::filesystem::path& distances_csv,
                 const std::filesystem::path& manifest_path,
                 const std::filesystem::path& histogram_dir, const RunConfig& cfg) {
    cfg.validate();
    auto rows = records::read_distances(distances_csv);
    if (rows.empty()) {
        throw EmptySample("distance CSV has no rows");
    }
    auto mf = manifest::load_manifest(manifest_path);
    auto by_id = index_manifest(mf);
    auto recs = read_histogram_dir(histogram_dir);

    std::map<std::string, const records::HistogramRecord*> hist_by_id;
    for (const auto& r : recs) {
        cross_check(r, by_id);
        hist_by_id[r.sample_id] = &r;
    }
    for (const auto& row : rows) {
        if (!hist_by_id.count(row.sample_id)) {
            throw ParseError("distance row for unknown sample '" + row.sample_id + "'");
        }
    }

    // One KDE per metric, fitted on the train split's normalized distances.
    std::map<metrics::MetricKind, weighting::KdeModel> models;
    json bandwidth_log = json::object();
    std::set<metrics::MetricKind> kinds;
    for (const auto& row : rows) {
        kinds.insert(row.metric);
    }
    std::size_t n_train = 0;
    for (auto kind : kinds) {
        std::vector<double> train_distances;
        for (const auto& row : rows) {
            if (row.metric == kind &&
                hist_by_id[row.sample_id]->split == evaluation::Split::train) {
                train_distances.push_back(row.normalized);
            }
        }
        if (train_distances.empty()) {
            throw EmptySample("metric " + metrics::to_string(kind) + " has no train distances");
        }
        n_train = train_distances.size();
        models.emplace(kind, weighting::KdeModel::fit(train_distances, cfg.bandwidth));
        bandwidth_log[metrics::to_string(kind)] = models.at(kind).bandwidth();
    }

    // Categorical weights over the (Fitzpatrick type, class) cells of the train split.
    std::set<std::string> label_set;
    for (const auto& [id, rec] : hist_by_id) {
        label_set.insert(rec->label);
    }
    std::map<std::string, int> label_idx;
    int next = 0;
    for (const auto& l : label_set) {
        label_idx[l] = next++;
    }
    weighting::GroupClassTable table;
    for (const auto& [id, rec] : hist_by_id) {
        if (rec->split == evaluation::Split::train) {
            table.add(evaluation::fitzpatrick_type(rec->median_ita, cfg.fitzpatrick),
                      label_idx[rec->label]);
        }
    }
    auto carw = weighting::carw_weights(table);
    auto carw_for = [&](const records::HistogramRecord& rec) {
        auto key = std::make_pair(evaluation::fitzpatrick_type(rec.median_ita, cfg.fitzpatrick),
                                  label_idx[rec.label]);
        auto it = carw.find(key);
        return it == carw.end() ? 1.0 : it->second;
    };

    std::vector<records::WeightRow> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const auto& rec = *hist_by_id[row.sample_id];
        const auto& model = models.at(row.metric);
        records::WeightRow w;
        w.sample_id = row.sample_id;
        w.metric = row.metric;
        w.distance = row.normalized;
        w.density = model.eval(row.normalized);
        w.drw = weighting::drw_weight(model, row.normalized);
        w.carw = carw_for(rec);
        w.combined = weighting::combined_weight(w.carw, w.drw);
        out.push_back(std::move(w));
    }

    std::filesystem::create_directories(cfg.out_dir);
    records::write_weights(cfg.out_dir / "weights.csv", out);

    json labels = json::array();
    for (const auto& l : label_set) {
        labels.push_back(l);
    }
    dump_json(cfg.out_dir / "weights_log.json",
              {{"mode", cfg.weighting_mode},
               {"n_train", n_train},
               {"bandwidths", bandwidth_log},
               {"labels", labels},
               {"fitzpatrick_cuts", fitzpatrick_json(cfg.fitzpatrick)}});
}

void cmd_synth(const std::filesystem::path& spec_path, const RunConfig& cfg) {
    cfg.validate();
    auto spec = synth::load_spec(spec_path);
    if (cfg.seed) {
        spec.seed = *cfg.seed;
    }
    auto dataset = synth::generate_synthetic(spec, cfg.jobs);
    synth::write_dataset(dataset, cfg.out_dir);
}

TrainSummary cmd_train_toy(const std::filesystem::path& manifest_path,
                           const std::filesystem::path& histogram_dir,
                           const std::filesystem::path& weights_csv, const RunConfig& cfg) {
    cfg.validate();
    auto mf = manifest::load_manifest(manifest_path);
    auto by_id = index_manifest(mf);
    auto recs = read_histogram_dir(histogram_dir);
    for (const auto& r : recs) {
        cross_check(r, by_id);
    }

    auto wrows = records::read_weights(weights_csv);
    std::map<std::string, std::map<metrics::MetricKind, records::WeightRow>> weights_by_id;
    for (auto& row : wrows) {
        weights_by_id[row.sample_id][row.metric] = row;
    }

    auto sample_weight = [&](const records::HistogramRecord& rec) -> double {
        if (cfg.weighting_mode == "none") {
            return 1.0;
        }
        auto sit = weights_by_id.find(rec.sample_id);
        if (sit == weights_by_id.end() || !sit->second.count(cfg.weight_metric)) {
            throw ParseError("no weight row for sample '" + rec.sample_id + "' and metric " +
                             metrics::to_string(cfg.weight_metric));
        }
        const auto& row = sit->second.at(cfg.weight_metric);
        if (cfg.weighting_mode == "carw") {
            return row.carw;
        }
        if (cfg.weighting_mode == "drw") {
            return row.drw;
        }
        return row.combined;
    };

    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;
    std::vector<double> weights;
    for (const auto& r : recs) {
        if (r.split == evaluation::Split::train) {
            features.push_back(toytrain::featurize(r.histogram, r.median_ita));
            labels.push_back(r.label);
            weights.push_back(sample_weight(r));
        }
    }

    toytrain::TrainOptions opts;
    opts.iterations = cfg.iterations;
    opts.learning_rate = cfg.learning_rate;
    opts.class_weights = cfg.class_weights;
    auto result = toytrain::train_toy(features, labels, weights, opts);

    std::vector<evaluation::PredictionRecord> predictions;
    predictions.reserve(recs.size());
    for (const auto& r : recs) {
        evaluation::PredictionRecord p;
        p.sample_id = r.sample_id;
        p.true_class = r.label;
        p.predicted_class = toytrain::predict(result.model, toytrain::featurize(r.histogram, r.median_ita));
        p.median_ita = r.median_ita;
        p.split = r.split;
        auto sit = weights_by_id.find(r.sample_id);
        if (sit == weights_by_id.end()) {
            throw ParseError("no weight rows for sample '" + r.sample_id + "'");
        }
        for (const auto& [kind, row] : sit->second) {
            p.distances[kind] = row.distance;
        }
        predictions.push_back(std::move(p));
    }

    std::vector<metrics::MetricKind> metric_order;
    for (auto kind : metrics::all_metrics) {
        if (!predictions.empty() && predictions[0].distances.count(kind)) {
            metric_order.push_back(kind);
        }
    }

    std::filesystem::create_directories(cfg.out_dir);
    toytrain::save_model(result.model, cfg.out_dir / "model.json");
    records::write_predictions(cfg.out_dir / "predictions.csv", predictions, metric_order);

    TrainSummary summary;
    summary.converged = result.converged;
    summary.final_loss = result.loss_history.back();
    summary.n_train = features.size();

    json cw = cfg.class_weights ? json(*cfg.class_weights) : json(nullptr);
    dump_json(cfg.out_dir / "training_log.json",
              {{"mode", cfg.weighting_mode},
               {"metric", metrics::to_string(cfg.weight_metric)},
               {"iterations", cfg.iterations},
               {"learning_rate", cfg.learning_rate},
               {"class_weights", cw},
               {"converged", summary.converged},
               {"final_loss", summary.final_loss},
               {"n_train", summary.n_train},
               {"classes", result.model.class_names}});
    return summary;
}

void cmd_evaluate(const std::filesystem::path& predictions_csv,
                  const std::optional<std::filesystem::path>& manifest_path, const RunConfig& cfg) {
    cfg.validate();
    auto predictions = records::read_predictions(predictions_csv);
    if (manifest_path) {
        auto mf = manifest::load_manifest(*manifest_path);
        auto by_id = index_manifest(mf);
        for (const auto& p : predictions) {
            auto it = by_id.find(p.sample_id);
            if (it == by_id.end()) {
                throw ParseError("prediction row for unknown sample '" + p.sample_id + "'");
            }
            if (it->second->split != p.split) {
                throw ParseError("sample '" + p.sample_id + "': prediction split disagrees with the manifest");
            }
            if (it->second->label != p.true_class) {
                throw ParseError("sample '" + p.sample_id + "': true class disagrees with the manifest");
            }
        }
    }

    auto report = evaluation::full_report(predictions, cfg.f1_mode, cfg.fitzpatrick);
    std::filesystem::create_directories(cfg.out_dir);
    records::write_report(cfg.out_dir / "report.json", report);
    records::write_plot_csvs(cfg.out_dir, report);
}

} // namespace tonekit::pipeline
