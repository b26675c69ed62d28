#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/evaluation.hpp"

using namespace tonekit;
using evaluation::F1Mode;
using evaluation::FitzpatrickThresholds;
using evaluation::PredictionRecord;
using evaluation::Split;

namespace {

PredictionRecord record(std::string id, std::string truth, std::string pred, double ita,
                        Split split = Split::test) {
    PredictionRecord r;
    r.sample_id = std::move(id);
    r.true_class = std::move(truth);
    r.predicted_class = std::move(pred);
    r.median_ita = ita;
    r.split = split;
    return r;
}

// Quadratic-time Spearman oracle: explicit average ranks, then Pearson.
double spearman_naive(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (size_t i = 0; i < v.size(); ++i) {
            size_t less = 0, equal = 0;
            for (size_t j = 0; j < v.size(); ++j) {
                less += v[j] < v[i];
                equal += v[j] == v[i];
            }
            r[i] = double(less) + 0.5 * double(equal + 1);
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / double(rx.size());
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / double(ry.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("fitzpatrick type anchors") {
    CHECK(evaluation::fitzpatrick_type(56.0) == 1);
    CHECK(evaluation::fitzpatrick_type(55.0) == 1);
    CHECK(evaluation::fitzpatrick_type(54.99) == 2);
    CHECK(evaluation::fitzpatrick_type(41.0) == 2);
    CHECK(evaluation::fitzpatrick_type(40.99) == 3);
    CHECK(evaluation::fitzpatrick_type(28.0) == 3);
    CHECK(evaluation::fitzpatrick_type(27.0) == 4);
    CHECK(evaluation::fitzpatrick_type(10.0) == 4);
    CHECK(evaluation::fitzpatrick_type(9.99) == 5);
    CHECK(evaluation::fitzpatrick_type(-30.0) == 5);
    CHECK(evaluation::fitzpatrick_type(-30.01) == 6);
    CHECK(evaluation::fitzpatrick_type(-90.0) == 6);
}

TEST_CASE("fitzpatrick type honors custom thresholds") {
    FitzpatrickThresholds custom;
    custom.cuts = {50.0, 30.0, 20.0, 0.0, -40.0};
    CHECK(custom.strictly_decreasing());
    CHECK(evaluation::fitzpatrick_type(52.0, custom) == 1);
    CHECK(evaluation::fitzpatrick_type(45.0, custom) == 2);
    CHECK(evaluation::fitzpatrick_type(-39.0, custom) == 5);
    CHECK(evaluation::fitzpatrick_type(-41.0, custom) == 6);

    FitzpatrickThresholds bad;
    bad.cuts = {50.0, 50.0, 20.0, 0.0, -40.0};
    CHECK_FALSE(bad.strictly_decreasing());
}

TEST_CASE("sturges bin counts") {
    CHECK(evaluation::sturges_bins(1) == 1);
    CHECK(evaluation::sturges_bins(2) == 2);
    CHECK(evaluation::sturges_bins(3) == 3);
    CHECK(evaluation::sturges_bins(4) == 3);
    CHECK(evaluation::sturges_bins(1024) == 11);
    CHECK(evaluation::sturges_bins(1025) == 12);
    CHECK(evaluation::sturges_bins(9013) == 15);
    CHECK_THROWS_AS(evaluation::sturges_bins(0), EmptySample);

    // Exhaustive agreement with the floating-point formula away from powers of two.
    for (size_t n = 2; n < 5000; ++n) {
        if ((n & (n - 1)) != 0) {
            int expect = int(std::ceil(std::log2(double(n)))) + 1;
            CHECK(evaluation::sturges_bins(n) == expect);
        }
    }
}

TEST_CASE("bin edges span the training range with equal widths") {
    std::vector<double> values = {2.0, 10.0, 4.0, 6.0};
    auto edges = evaluation::bin_edges(values, 4);
    REQUIRE(edges.size() == 5);
    CHECK(edges.front() == doctest::Approx(2.0));
    CHECK(edges.back() == doctest::Approx(10.0));
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        CHECK(edges[i + 1] - edges[i] == doctest::Approx(2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(evaluation::bin_edges({}, 3), EmptySample);
    CHECK_THROWS_AS(evaluation::bin_edges({5.0, 5.0}, 3), DegenerateRange);
    CHECK_THROWS_AS(evaluation::bin_edges(values, 0), Error);
}

TEST_CASE("assign bin clamps out-of-range values and owns interior edges") {
    std::vector<double> edges = {0.0, 1.0, 2.0, 3.0};
    CHECK(evaluation::assign_bin(edges, -5.0) == 0);
    CHECK(evaluation::assign_bin(edges, 0.0) == 0);
    CHECK(evaluation::assign_bin(edges, 0.5) == 0);
    CHECK(evaluation::assign_bin(edges, 1.0) == 1);  // interior edge opens the next bin
    CHECK(evaluation::assign_bin(edges, 2.999) == 2);
    CHECK(evaluation::assign_bin(edges, 3.0) == 2);  // max value stays in the last bin
    CHECK(evaluation::assign_bin(edges, 99.0) == 2);
}

TEST_CASE("spearman matches the quadratic oracle on random data with ties") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> coarse(0, 9);
    std::uniform_real_distribution<double> fine(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 3 + rng() % 40;
        std::vector<double> x(n), y(n);
        for (size_t i = 0; i < n; ++i) {
            // Coarse integer values give frequent ties; occasional real values do not.
            x[i] = (rng() % 3 == 0) ? fine(rng) : double(coarse(rng));
            y[i] = (rng() % 3 == 0) ? fine(rng) : double(coarse(rng));
        }
        double got = evaluation::spearman(x, y);
        double expect = spearman_naive(x, y);
        if (std::isnan(expect)) {
            CHECK(std::isnan(got));
        } else {
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("spearman endpoints and errors") {
    CHECK(evaluation::spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(evaluation::spearman({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
    CHECK(std::isnan(evaluation::spearman({1, 1, 1}, {1, 2, 3})));
    CHECK_THROWS_AS(evaluation::spearman({1.0}, {1.0}), TooFewBins);
    CHECK_THROWS_AS(evaluation::spearman({1.0, 2.0}, {1.0}), ShapeMismatch);
}

TEST_CASE("density accuracy spearman excludes empty bins pairwise") {
    double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(evaluation::density_accuracy_spearman({5, 3, 2, 1}, {0.2, nan, 0.6, 0.8}) ==
          doctest::Approx(-1.0));
    CHECK_THROWS_AS(evaluation::density_accuracy_spearman({5, 3, 2}, {0.2, nan, nan}), TooFewBins);
    CHECK_THROWS_AS(evaluation::density_accuracy_spearman({5, 3}, {0.2}), ShapeMismatch);
}

TEST_CASE("f1 score matches frozen reference values") {
    std::vector<std::string> t1 = {"a", "a", "b", "b", "c"};
    std::vector<std::string> p1 = {"a", "b", "b", "c", "c"};
    CHECK(evaluation::f1_score(t1, p1, F1Mode::macro) == doctest::Approx(11.0 / 18.0).epsilon(1e-12));
    CHECK(evaluation::f1_score(t1, p1, F1Mode::weighted) == doctest::Approx(0.6).epsilon(1e-12));

    // Labels only seen in predictions still enter the macro average.
    std::vector<std::string> t2 = {"a", "a"};
    std::vector<std::string> p2 = {"a", "b"};
    CHECK(evaluation::f1_score(t2, p2, F1Mode::macro) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(evaluation::f1_score(t2, p2, F1Mode::weighted) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    CHECK(evaluation::f1_score(t1, t1, F1Mode::macro) == doctest::Approx(1.0));
    CHECK_THROWS_AS(evaluation::f1_score(t1, p2, F1Mode::macro), ShapeMismatch);
}

TEST_CASE("group report computes per-type scores and gap summaries") {
    // Type 1 (ita 60): 2/2 correct. Type 3 (ita 30): 1/2. Type 5 (ita 0): 0/1.
    std::vector<PredictionRecord> records = {
        record("a", "x", "x", 60.0),
        record("b", "x", "x", 61.0),
        record("c", "x", "x", 30.0),
        record("d", "x", "y", 31.0),
        record("e", "x", "y", 0.0),
        record("f", "x", "x", 45.0, Split::train),  // train rows are excluded
    };
    auto report = evaluation::group_report(records);
    REQUIRE(report.per_type.size() == 3);
    CHECK(report.per_type[1].n == 2);
    CHECK(report.per_type[1].accuracy == doctest::Approx(1.0));
    CHECK(report.per_type[3].accuracy == doctest::Approx(0.5));
    CHECK(report.per_type[5].accuracy == doctest::Approx(0.0));

    // Max gap from the best type; sum of deviations from the unweighted mean.
    CHECK(report.max_abs_gap_acc == doctest::Approx(1.0));
    double mean = (1.0 + 0.5 + 0.0) / 3.0;
    CHECK(report.sum_abs_mean_gap_acc ==
          doctest::Approx(std::abs(mean - 1.0) + std::abs(mean - 0.5) + std::abs(mean - 0.0)));

    CHECK_THROWS_AS(evaluation::group_report({record("a", "x", "x", 60.0, Split::train)}), Error);
}

TEST_CASE("full report freezes bin edges on the train split") {
    using metrics::MetricKind;
    std::vector<PredictionRecord> records;
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        auto r = record("t" + std::to_string(i), "x", u(rng) < 0.7 ? "x" : "y", 50.0 + i % 20,
                        i % 2 == 0 ? Split::train : Split::test);
        r.distances[MetricKind::WD] = u(rng) * 0.5;  // train range [0, 0.5)
        records.push_back(r);
    }
    // One test record far outside the train range must clamp, not extend, the bins.
    auto outlier = record("out", "x", "x", 50.0);
    outlier.distances[MetricKind::WD] = 5.0;
    records.push_back(outlier);

    auto report = evaluation::full_report(records);
    REQUIRE(report.per_metric.count(MetricKind::WD) == 1);
    const auto& corr = report.per_metric[MetricKind::WD];
    CHECK(corr.edges.front() >= 0.0);
    CHECK(corr.edges.back() <= 0.5);
    CHECK(corr.edges.size() == size_t(evaluation::sturges_bins(20)) + 1);
    double train_total = std::accumulate(corr.train_counts.begin(), corr.train_counts.end(), 0.0);
    CHECK(train_total == doctest::Approx(20.0));
    size_t test_total = 0;
    for (auto c : corr.test_counts) test_total += c;
    CHECK(test_total == 21);  // 20 test records plus the outlier
    CHECK(report.per_metric.count(MetricKind::KL) == 0);  // absent metrics are skipped
}

TEST_CASE("logistic trend flags separation on degenerate inputs") {
    std::vector<PredictionRecord> few;
    for (int i = 0; i < 9; ++i) {
        few.push_back(record("f" + std::to_string(i), "x", i % 2 ? "x" : "y", 60.0 + i));
    }
    CHECK(evaluation::logistic_ita_trend(few).separated);  // fewer than 10 usable records

    std::vector<PredictionRecord> all_correct;
    for (int i = 0; i < 30; ++i) {
        all_correct.push_back(record("c" + std::to_string(i), "x", "x", 56.0 + i));
    }
    CHECK(evaluation::logistic_ita_trend(all_correct).separated);

    std::vector<PredictionRecord> perfectly_split;
    for (int i = 0; i < 30; ++i) {
        // Correct iff ITA below 70: a separating threshold.
        double ita = 56.0 + i;
        perfectly_split.push_back(
            record("p" + std::to_string(i), "x", ita < 70.0 ? "x" : "y", ita));
    }
    CHECK(evaluation::logistic_ita_trend(perfectly_split).separated);
}

TEST_CASE("logistic trend ignores records outside type 1") {
    // Type-1 records carry no signal; a spurious trend hides in lower types.
    std::vector<PredictionRecord> records;
    std::mt19937_64 rng(57);
    for (int i = 0; i < 200; ++i) {
        double ita = 56.0 + (i % 40);
        records.push_back(record("a" + std::to_string(i), "x", rng() % 2 ? "x" : "y", ita));
    }
    for (int i = 0; i < 100; ++i) {
        records.push_back(record("b" + std::to_string(i), "x", "y", 20.0));
    }
    auto trend = evaluation::logistic_ita_trend(records);
    REQUIRE_FALSE(trend.separated);
    CHECK(std::abs(trend.slope) < 0.05);
    CHECK(trend.acc_at_60 == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("logistic trend recovers a planted sigmoid") {
    // Correctness drawn from sigma(3 - 0.03 ita); the fit must land close.
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 4000; ++i) {
        double ita = 56.0 + u(rng) * 70.0;
        double p = 1.0 / (1.0 + std::exp(-(3.0 - 0.03 * ita)));
        records.push_back(record("s" + std::to_string(i), "x", u(rng) < p ? "x" : "y", ita));
    }
    auto trend = evaluation::logistic_ita_trend(records);
    REQUIRE_FALSE(trend.separated);
    double p60 = 1.0 / (1.0 + std::exp(-(3.0 - 0.03 * 60.0)));
    double p120 = 1.0 / (1.0 + std::exp(-(3.0 - 0.03 * 120.0)));
    CHECK(trend.acc_at_60 == doctest::Approx(p60).epsilon(0.05));
    CHECK(trend.acc_at_120 == doctest::Approx(p120).epsilon(0.15));
    CHECK(trend.drop_pct == doctest::Approx((p60 - p120) / p60).epsilon(0.15));
    CHECK(trend.slope < 0.0);
}
