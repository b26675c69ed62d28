#include "tonekit/records.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "tonekit/manifest.hpp"
#include "tonekit/util.hpp"

namespace tonekit::records {

namespace {

using nlohmann::json;

json binning_to_json(const tone::Binning& b) {
    return {{"theta_min", b.theta_min}, {"theta_max", b.theta_max}, {"width", tone::Binning::width}};
}

tone::Binning binning_from_json(const json& j, const std::string& context) {
    if (!j.is_object() || !j.contains("theta_min") || !j.contains("theta_max")) {
        throw ParseError(context + ": binning must carry theta_min and theta_max");
    }
    tone::Binning b;
    b.theta_min = j["theta_min"].get<int>();
    b.theta_max = j["theta_max"].get<int>();
    if (b.theta_max <= b.theta_min) {
        throw ParseError(context + ": binning range is empty");
    }
    if (j.contains("width") && j["width"].get<double>() != tone::Binning::width) {
        throw ParseError(context + ": unsupported bin width");
    }
    return b;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(path.string() + ": invalid JSON");
    }
    return j;
}

void dump_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

std::vector<double> mass_from_json(const json& j, const tone::Binning& binning,
                                   const std::string& context) {
    if (!j.is_array()) {
        throw ParseError(context + ": mass must be an array");
    }
    std::vector<double> mass = j.get<std::vector<double>>();
    if (static_cast<int>(mass.size()) != binning.bin_count()) {
        throw ParseError(context + ": mass length does not match the binning");
    }
    return mass;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

std::ifstream open_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return in;
}

std::string read_header(std::ifstream& in, const std::filesystem::path& path,
                        const std::string& expected) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != expected) {
        throw ParseError(path.filename().string() + ":1: header must be " + expected);
    }
    return line;
}

std::vector<std::string> data_fields(const std::string& raw_line, std::size_t expected,
                                     const std::string& context) {
    std::string line = raw_line;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    auto fields = util::split_csv_line(line);
    if (fields.size() != expected) {
        throw ParseError(context + ": expected " + std::to_string(expected) + " fields, got " +
                         std::to_string(fields.size()));
    }
    return fields;
}

} // namespace

void write_histogram(const std::filesystem::path& path, const HistogramRecord& rec) {
    json j = {
        {"sample_id", rec.sample_id},
        {"split", manifest::to_string(rec.split)},
        {"label", rec.label},
        {"median_ita", rec.median_ita},
        {"n_pixels", rec.n_pixels},
        {"binning", binning_to_json(rec.histogram.binning)},
        {"mass", rec.histogram.mass},
    };
    dump_json(path, j);
}

HistogramRecord read_histogram(const std::filesystem::path& path) {
    json j = load_json(path);
    const std::string context = path.filename().string();
    for (const char* key : {"sample_id", "split", "label", "median_ita", "n_pixels", "binning", "mass"}) {
        if (!j.contains(key)) {
            throw ParseError(context + ": missing field '" + std::string(key) + "'");
        }
    }
    HistogramRecord rec;
    rec.sample_id = j["sample_id"].get<std::string>();
    rec.split = manifest::split_from_string(j["split"].get<std::string>(), context);
    rec.label = j["label"].get<std::string>();
    rec.median_ita = j["median_ita"].get<double>();
    rec.n_pixels = j["n_pixels"].get<std::size_t>();
    rec.histogram.binning = binning_from_json(j["binning"], context);
    rec.histogram.mass = mass_from_json(j["mass"], rec.histogram.binning, context);
    return rec;
}

void write_reference(const std::filesystem::path& path, const ReferenceFile& ref) {
    json j = {
        {"binning", binning_to_json(ref.distribution.binning)},
        {"mass", ref.distribution.mass},
        {"n_train", ref.n_train},
    };
    dump_json(path, j);
}

ReferenceFile read_reference(const std::filesystem::path& path) {
    json j = load_json(path);
    const std::string context = path.filename().string();
    for (const char* key : {"binning", "mass", "n_train"}) {
        if (!j.contains(key)) {
            throw ParseError(context + ": missing field '" + std::string(key) + "'");
        }
    }
    ReferenceFile ref;
    ref.distribution.binning = binning_from_json(j["binning"], context);
    ref.distribution.mass = mass_from_json(j["mass"], ref.distribution.binning, context);
    ref.n_train = j["n_train"].get<std::size_t>();
    return ref;
}

void write_distances(const std::filesystem::path& path, const std::vector<DistanceRow>& rows) {
    auto out = open_csv(path);
    out << "sample_id,metric,raw,normalized\n";
    for (const auto& r : rows) {
        out << util::csv_escape(r.sample_id) << ',' << metrics::to_string(r.metric) << ','
            << util::format_double(r.raw) << ',' << util::format_double(r.normalized) << '\n';
    }
}

std::vector<DistanceRow> read_distances(const std::filesystem::path& path) {
    auto in = open_read(path);
    read_header(in, path, "sample_id,metric,raw,normalized");
    std::vector<DistanceRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::string context = path.filename().string() + ":" + std::to_string(line_no);
        auto f = data_fields(line, 4, context);
        DistanceRow r;
        r.sample_id = f[0];
        try {
            r.metric = metrics::metric_from_string(f[1]);
        } catch (const Error& e) {
            throw ParseError(context + ": " + e.what());
        }
        r.raw = util::parse_double(f[2], context);
        r.normalized = util::parse_double(f[3], context);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_weights(const std::filesystem::path& path, const std::vector<WeightRow>& rows) {
    auto out = open_csv(path);
    out << "sample_id,metric,distance,density,drw,carw,combined\n";
    for (const auto& r : rows) {
        out << util::csv_escape(r.sample_id) << ',' << metrics::to_string(r.metric) << ','
            << util::format_double(r.distance) << ',' << util::format_double(r.density) << ','
            << util::format_double(r.drw) << ',' << util::format_double(r.carw) << ','
            << util::format_double(r.combined) << '\n';
    }
}

std::vector<WeightRow> read_weights(const std::filesystem::path& path) {
    auto in = open_read(path);
    read_header(in, path, "sample_id,metric,distance,density,drw,carw,combined");
    std::vector<WeightRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::string context = path.filename().string() + ":" + std::to_string(line_no);
        auto f = data_fields(line, 7, context);
        WeightRow r;
        r.sample_id = f[0];
        try {
            r.metric = metrics::metric_from_string(f[1]);
        } catch (const Error& e) {
            throw ParseError(context + ": " + e.what());
        }
        r.distance = util::parse_double(f[2], context);
        r.density = util::parse_double(f[3], context);
        r.drw = util::parse_double(f[4], context);
        r.carw = util::parse_double(f[5], context);
        r.combined = util::parse_double(f[6], context);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<evaluation::PredictionRecord>& records,
                       const std::vector<metrics::MetricKind>& metric_order) {
    auto out = open_csv(path);
    out << "sample_id,split,true_class,predicted_class,median_ita";
    for (auto m : metric_order) {
        out << ",d_" << metrics::to_string(m);
    }
    out << '\n';
    for (const auto& r : records) {
        out << util::csv_escape(r.sample_id) << ',' << manifest::to_string(r.split) << ','
            << util::csv_escape(r.true_class) << ',' << util::csv_escape(r.predicted_class) << ','
            << util::format_double(r.median_ita);
        for (auto m : metric_order) {
            auto it = r.distances.find(m);
            if (it == r.distances.end()) {
                throw ShapeMismatch("record " + r.sample_id + " lacks metric " +
                                    metrics::to_string(m));
            }
            out << ',' << util::format_double(it->second);
        }
        out << '\n';
    }
}

std::vector<evaluation::PredictionRecord> read_predictions(const std::filesystem::path& path) {
    auto in = open_read(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    auto header = util::split_csv_line(line);
    const std::vector<std::string> fixed = {"sample_id", "split", "true_class", "predicted_class",
                                            "median_ita"};
    if (header.size() < fixed.size() ||
        !std::equal(fixed.begin(), fixed.end(), header.begin())) {
        throw ParseError(path.filename().string() +
                         ":1: header must start with sample_id,split,true_class,predicted_class,median_ita");
    }
    std::vector<metrics::MetricKind> metric_order;
    for (std::size_t i = fixed.size(); i < header.size(); ++i) {
        if (header[i].rfind("d_", 0) != 0) {
            throw ParseError(path.filename().string() + ":1: distance columns must be named d_<METRIC>");
        }
        try {
            metric_order.push_back(metrics::metric_from_string(header[i].substr(2)));
        } catch (const Error& e) {
            throw ParseError(path.filename().string() + ":1: " + e.what());
        }
    }

    std::vector<evaluation::PredictionRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::string context = path.filename().string() + ":" + std::to_string(line_no);
        auto f = data_fields(line, header.size(), context);
        evaluation::PredictionRecord r;
        r.sample_id = f[0];
        r.split = manifest::split_from_string(f[1], context);
        r.true_class = f[2];
        r.predicted_class = f[3];
        r.median_ita = util::parse_double(f[4], context);
        for (std::size_t i = 0; i < metric_order.size(); ++i) {
            r.distances[metric_order[i]] = util::parse_double(f[fixed.size() + i], context);
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_extraction_log(const std::filesystem::path& path,
                          const std::vector<ExtractionLogRow>& rows) {
    auto out = open_csv(path);
    out << "sample_id,status,reason,n_pixels\n";
    for (const auto& r : rows) {
        out << util::csv_escape(r.sample_id) << ',' << r.status << ',' << util::csv_escape(r.reason)
            << ',' << r.n_pixels << '\n';
    }
}

void write_report(const std::filesystem::path& path, const evaluation::FairnessReport& report) {
    json per_type = json::object();
    for (const auto& [type, score] : report.per_type) {
        per_type[std::to_string(type)] = {
            {"n", score.n}, {"accuracy", score.accuracy}, {"f1", score.f1}};
    }
    json per_metric = json::object();
    for (const auto& [kind, corr] : report.per_metric) {
        per_metric[metrics::to_string(kind)] = corr.rho; // NaN serializes as null
    }
    json trend = {
        {"acc_at_60", report.ita_trend.acc_at_60},
        {"acc_at_120", report.ita_trend.acc_at_120},
        {"drop_pct", report.ita_trend.drop_pct},
        {"intercept", report.ita_trend.intercept},
        {"slope", report.ita_trend.slope},
        {"separated", report.ita_trend.separated},
    };
    json j = {
        {"schema_version", 1},
        {"per_type", per_type},
        {"max_abs_gap_acc", report.max_abs_gap_acc},
        {"max_abs_gap_f1", report.max_abs_gap_f1},
        {"sum_abs_mean_gap_acc", report.sum_abs_mean_gap_acc},
        {"sum_abs_mean_gap_f1", report.sum_abs_mean_gap_f1},
        {"per_metric_spearman", per_metric},
        {"ita_trend", trend},
    };
    dump_json(path, j);
}

void write_plot_csvs(const std::filesystem::path& dir, const evaluation::FairnessReport& report) {
    {
        auto out = open_csv(dir / "per_type.csv");
        out << "type,n,accuracy,f1\n";
        for (const auto& [type, score] : report.per_type) {
            out << type << ',' << score.n << ',' << util::format_double(score.accuracy) << ','
                << util::format_double(score.f1) << '\n';
        }
    }
    {
        auto out = open_csv(dir / "per_metric_bins.csv");
        out << "metric,bin,lo,hi,train_count,test_count,test_accuracy\n";
        for (const auto& [kind, corr] : report.per_metric) {
            for (std::size_t b = 0; b < corr.train_counts.size(); ++b) {
                out << metrics::to_string(kind) << ',' << b << ','
                    << util::format_double(corr.edges[b]) << ','
                    << util::format_double(corr.edges[b + 1]) << ','
                    << util::format_double(corr.train_counts[b]) << ',' << corr.test_counts[b]
                    << ',' << util::format_double(corr.test_accuracy[b]) << '\n';
            }
        }
    }
    {
        auto out = open_csv(dir / "trend_curve.csv");
        out << "ita,p_correct\n";
        if (!report.ita_trend.separated) {
            for (int t = 55; t <= 130; ++t) {
                double z = report.ita_trend.intercept + report.ita_trend.slope * t;
                double p = 1.0 / (1.0 + std::exp(-z));
                out << t << ',' << util::format_double(p) << '\n';
            }
        }
    }
}

} // namespace tonekit::records
