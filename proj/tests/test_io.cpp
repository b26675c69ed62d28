#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/manifest.hpp"
#include "tonekit/records.hpp"
#include "tonekit/util.hpp"

using namespace tonekit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tonekit_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("format_double and parse_double round-trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 500; ++i) {
        double v = u(rng);
        CHECK(util::parse_double(util::format_double(v), "test") == v);
    }
    CHECK(util::format_double(0.1) == "0.1");
    CHECK(util::parse_double("-3.5e2", "test") == doctest::Approx(-350.0));
    CHECK_THROWS_AS(util::parse_double("abc", "test"), ParseError);
    CHECK_THROWS_AS(util::parse_double("1.5x", "test"), ParseError);
    CHECK_THROWS_AS(util::parse_double("", "test"), ParseError);
}

TEST_CASE("csv line splitting honors quotes and escapes") {
    CHECK(util::split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(util::split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(util::split_csv_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
    CHECK(util::split_csv_line("\"he said \"\"hi\"\"\",x") ==
          std::vector<std::string>{"he said \"hi\"", "x"});
    CHECK(util::split_csv_line("") == std::vector<std::string>{""});
    CHECK(util::split_csv_line("a,") == std::vector<std::string>{"a", ""});
}

TEST_CASE("csv escape round-trips through split") {
    std::vector<std::string> fields = {"plain", "with,comma", "with\"quote", "", "both,\""};
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += util::csv_escape(fields[i]);
    }
    CHECK(util::split_csv_line(line) == fields);
    CHECK(util::csv_escape("plain") == "plain");  // no gratuitous quoting
}

TEST_CASE("parallel_for visits every index once and propagates exceptions") {
    std::vector<int> hits(1000, 0);
    util::parallel_for(hits.size(), 4, [&](size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);

    util::parallel_for(0, 4, [&](size_t) { FAIL("must not run"); });

    CHECK_THROWS_AS(util::parallel_for(100, 4,
                                       [](size_t i) {
                                           if (i == 57) throw Error("boom");
                                       }),
                    Error);
}

TEST_CASE("csv manifest loads rows and resolves relative paths") {
    TempDir tmp;
    write_text(tmp.path / "m.csv",
               "sample_id,image_path,lesion_mask_path,label,split\n"
               "s1,images/s1.png,masks/s1.png,mel,train\n"
               "s2,/abs/s2.png,/abs/m2.png,nev,test\n");
    auto m = manifest::load_manifest(tmp.path / "m.csv");
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].sample_id == "s1");
    CHECK(m.rows[0].image_path == tmp.path / "images/s1.png");
    CHECK(m.rows[0].split == evaluation::Split::train);
    CHECK(m.rows[1].image_path == fs::path("/abs/s2.png"));
    CHECK(m.rows[1].split == evaluation::Split::test);
    CHECK(m.train_count() == 1);
}

TEST_CASE("jsonl manifest loads rows") {
    TempDir tmp;
    write_text(tmp.path / "m.jsonl",
               R"({"sample_id":"a","image_path":"i/a.png","lesion_mask_path":"k/a.png","label":"x","split":"train"})"
               "\n"
               R"({"sample_id":"b","image_path":"i/b.png","lesion_mask_path":"k/b.png","label":"y","split":"test"})"
               "\n");
    auto m = manifest::load_manifest(tmp.path / "m.jsonl");
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[1].sample_id == "b");
    CHECK(m.rows[0].lesion_mask_path == tmp.path / "k/a.png");
}

TEST_CASE("manifest schema violations carry line numbers") {
    TempDir tmp;
    const std::string header = "sample_id,image_path,lesion_mask_path,label,split\n";

    write_text(tmp.path / "dup.csv",
               header + "s1,a.png,b.png,x,train\ns1,c.png,d.png,y,test\n");
    CHECK_THROWS_WITH_AS(manifest::load_manifest(tmp.path / "dup.csv"),
                         doctest::Contains("dup.csv:3"), ParseError);

    write_text(tmp.path / "badsplit.csv", header + "s1,a.png,b.png,x,validation\n");
    CHECK_THROWS_AS(manifest::load_manifest(tmp.path / "badsplit.csv"), ParseError);

    write_text(tmp.path / "badid.csv", header + "a/b,a.png,b.png,x,train\n");
    CHECK_THROWS_AS(manifest::load_manifest(tmp.path / "badid.csv"), ParseError);

    write_text(tmp.path / "badhdr.csv", "id,path\ns1,a.png\n");
    CHECK_THROWS_AS(manifest::load_manifest(tmp.path / "badhdr.csv"), ParseError);

    write_text(tmp.path / "empty.csv", header);
    CHECK_THROWS_AS(manifest::load_manifest(tmp.path / "empty.csv"), ParseError);

    CHECK_THROWS_AS(manifest::load_manifest(tmp.path / "missing.csv"), Error);
}

TEST_CASE("split strings round-trip and reject unknown values") {
    CHECK(manifest::split_from_string("train", "t") == evaluation::Split::train);
    CHECK(manifest::split_from_string("test", "t") == evaluation::Split::test);
    CHECK(manifest::to_string(evaluation::Split::train) == "train");
    CHECK(manifest::to_string(evaluation::Split::test) == "test");
    CHECK_THROWS_AS(manifest::split_from_string("dev", "t"), ParseError);
}

TEST_CASE("histogram records round-trip through json") {
    TempDir tmp;
    records::HistogramRecord rec;
    rec.sample_id = "s42";
    rec.split = evaluation::Split::test;
    rec.label = "mel";
    rec.median_ita = 37.25;
    rec.n_pixels = 1234;
    rec.histogram.binning.theta_min = -20;
    rec.histogram.binning.theta_max = -16;
    rec.histogram.mass = {0.25, 0.5, 0.125, 0.125};

    auto p = tmp.path / "h.json";
    records::write_histogram(p, rec);
    auto back = records::read_histogram(p);
    CHECK(back.sample_id == rec.sample_id);
    CHECK(back.split == rec.split);
    CHECK(back.label == rec.label);
    CHECK(back.median_ita == rec.median_ita);
    CHECK(back.n_pixels == rec.n_pixels);
    CHECK(back.histogram.binning == rec.histogram.binning);
    CHECK(back.histogram.mass == rec.histogram.mass);

    // A second write is byte-identical: no timestamps or map ordering drift.
    auto bytes = read_text(p);
    records::write_histogram(p, rec);
    CHECK(read_text(p) == bytes);
}

TEST_CASE("histogram reader rejects inconsistent payloads") {
    TempDir tmp;
    auto p = tmp.path / "bad.json";
    write_text(p,
               R"({"sample_id":"x","split":"train","label":"l","median_ita":1.0,"n_pixels":9,)"
               R"("binning":{"theta_min":0,"theta_max":3,"width":1.0},"mass":[0.5,0.5]})");
    CHECK_THROWS_AS(records::read_histogram(p), ParseError);

    write_text(p, "not json at all");
    CHECK_THROWS_AS(records::read_histogram(p), ParseError);
}

TEST_CASE("reference files round-trip") {
    TempDir tmp;
    records::ReferenceFile ref;
    ref.n_train = 77;
    ref.distribution.binning.theta_min = 10;
    ref.distribution.binning.theta_max = 13;
    ref.distribution.mass = {0.2, 0.3, 0.5};
    auto p = tmp.path / "ref.json";
    records::write_reference(p, ref);
    auto back = records::read_reference(p);
    CHECK(back.n_train == 77);
    CHECK(back.distribution.binning == ref.distribution.binning);
    CHECK(back.distribution.mass == ref.distribution.mass);
}

TEST_CASE("distance csv round-trips exactly") {
    TempDir tmp;
    std::vector<records::DistanceRow> rows = {
        {"s1", metrics::MetricKind::WD, 1.5, 0.25},
        {"s1", metrics::MetricKind::FS, 0.7071067811865476, 0.9},
        {"s2", metrics::MetricKind::KL, 12.125, 1.0},
    };
    auto p = tmp.path / "d.csv";
    records::write_distances(p, rows);
    auto text = read_text(p);
    CHECK(text.substr(0, text.find('\n')) == "sample_id,metric,raw,normalized");

    auto back = records::read_distances(p);
    REQUIRE(back.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].sample_id == rows[i].sample_id);
        CHECK(back[i].metric == rows[i].metric);
        CHECK(back[i].raw == rows[i].raw);  // exact: shortest round-trip formatting
        CHECK(back[i].normalized == rows[i].normalized);
    }
}

TEST_CASE("weight csv round-trips exactly") {
    TempDir tmp;
    std::vector<records::WeightRow> rows = {
        {"s1", metrics::MetricKind::WD, 0.25, 1.75, 0.5, 2.0, 1.0},
        {"s2", metrics::MetricKind::AD, 0.5, 0.333333333333333314829616256247, 0.25, 0.8, 0.2},
    };
    auto p = tmp.path / "w.csv";
    records::write_weights(p, rows);
    auto text = read_text(p);
    CHECK(text.substr(0, text.find('\n')) == "sample_id,metric,distance,density,drw,carw,combined");
    auto back = records::read_weights(p);
    REQUIRE(back.size() == 2);
    CHECK(back[1].density == rows[1].density);
    CHECK(back[1].carw == rows[1].carw);
    CHECK(back[0].metric == metrics::MetricKind::WD);
}

TEST_CASE("prediction csv round-trips with per-metric columns") {
    TempDir tmp;
    evaluation::PredictionRecord a;
    a.sample_id = "s1";
    a.true_class = "mel";
    a.predicted_class = "nev";
    a.median_ita = 42.5;
    a.split = evaluation::Split::train;
    a.distances[metrics::MetricKind::WD] = 0.25;
    a.distances[metrics::MetricKind::FS] = 0.75;
    evaluation::PredictionRecord b = a;
    b.sample_id = "s2";
    b.predicted_class = "mel";
    b.split = evaluation::Split::test;

    auto p = tmp.path / "p.csv";
    std::vector<metrics::MetricKind> order = {metrics::MetricKind::FS, metrics::MetricKind::WD};
    records::write_predictions(p, {a, b}, order);
    auto text = read_text(p);
    CHECK(text.substr(0, text.find('\n')) ==
          "sample_id,split,true_class,predicted_class,median_ita,d_FS,d_WD");

    auto back = records::read_predictions(p);
    REQUIRE(back.size() == 2);
    CHECK(back[0].sample_id == "s1");
    CHECK(back[0].split == evaluation::Split::train);
    CHECK(back[0].distances.at(metrics::MetricKind::WD) == 0.25);
    CHECK(back[1].correct());

    // Writing a record that lacks a requested metric column must fail.
    evaluation::PredictionRecord c;
    c.sample_id = "s3";
    c.distances[metrics::MetricKind::WD] = 0.5;
    CHECK_THROWS_AS(records::write_predictions(tmp.path / "bad.csv", {c}, order), ShapeMismatch);
}

TEST_CASE("extraction log format") {
    TempDir tmp;
    std::vector<records::ExtractionLogRow> rows = {
        {"s1", "ok", "", 512},
        {"s2", "skipped", "empty_skin_region", 0},
    };
    auto p = tmp.path / "log.csv";
    records::write_extraction_log(p, rows);
    auto text = read_text(p);
    CHECK(text == "sample_id,status,reason,n_pixels\n"
                  "s1,ok,,512\n"
                  "s2,skipped,empty_skin_region,0\n");
}
