#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "freqcl/errors.hpp"
#include "freqcl/metrics.hpp"
#include "freqcl/rng.hpp"

using namespace freqcl;

namespace {

std::vector<ScoreSample> make_samples(const std::vector<double>& normals,
                                      const std::vector<double>& anomalies) {
    std::vector<ScoreSample> s;
    for (double v : normals) s.push_back({v, false});
    for (double v : anomalies) s.push_back({v, true});
    return s;
}

// Independent oracle: count anomaly>normal pairs plus half the ties.
double auc_brute_force(const std::vector<ScoreSample>& samples) {
    double wins = 0.0;
    std::size_t n_a = 0, n_n = 0;
    for (const auto& a : samples) {
        if (!a.is_anomaly) continue;
        ++n_a;
        for (const auto& n : samples) {
            if (n.is_anomaly) continue;
            if (a.score > n.score)
                wins += 1.0;
            else if (a.score == n.score)
                wins += 0.5;
        }
    }
    for (const auto& n : samples) n_n += n.is_anomaly ? 0 : 1;
    return wins / (static_cast<double>(n_a) * static_cast<double>(n_n));
}

double trapezoid_area(const std::vector<RocPoint>& points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].fpr - points[i - 1].fpr) * 0.5 *
                (points[i].tpr + points[i - 1].tpr);
    return area;
}

std::vector<ScoreSample> random_samples(Rng& rng) {
    const int n = static_cast<int>(rng.uniform_int(4, 200));
    std::vector<ScoreSample> s;
    bool has_a = false, has_n = false;
    for (int i = 0; i < n; ++i) {
        // coarse quantization forces ties
        const double score = std::floor(rng.uniform(0.0, 20.0)) / 4.0;
        const bool anomaly = rng.uniform() < 0.5;
        has_a |= anomaly;
        has_n |= !anomaly;
        s.push_back({score, anomaly});
    }
    if (!has_a) s.push_back({1.0, true});
    if (!has_n) s.push_back({0.0, false});
    return s;
}

}  // namespace

TEST_CASE("auc basics") {
    CHECK(auc(make_samples({0.1, 0.2}, {0.3, 0.4})) == 1.0);
    CHECK(auc(make_samples({1, 3}, {2, 4})) == 0.75);
    CHECK(auc(make_samples({5, 5, 5}, {5, 5})) == 0.5);
    CHECK(auc(make_samples({2, 4}, {1, 3})) == 0.25);
}

TEST_CASE("auc rejects single-class input") {
    CHECK_THROWS_AS(auc(make_samples({1, 2}, {})), DataError);
    CHECK_THROWS_AS(auc(make_samples({}, {1, 2})), DataError);
}

TEST_CASE("auc equals brute-force Mann-Whitney on random score sets") {
    Rng rng(20240901);
    for (int trial = 0; trial < 100; ++trial) {
        const auto samples = random_samples(rng);
        CHECK(auc(samples) == doctest::Approx(auc_brute_force(samples)).epsilon(1e-12));
    }
}

TEST_CASE("roc trapezoid equals auc on random score sets") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto samples = random_samples(rng);
        CHECK(trapezoid_area(roc_points(samples)) ==
              doctest::Approx(auc(samples)).epsilon(1e-12));
    }
}

TEST_CASE("roc endpoints and tie handling") {
    const auto points = roc_points(make_samples({0.0}, {1.0}));
    REQUIRE(points.size() == 3);
    CHECK(points[0].fpr == 0.0);
    CHECK(points[0].tpr == 0.0);
    CHECK(std::isinf(points[0].threshold));
    CHECK(points[1].fpr == 0.0);
    CHECK(points[1].tpr == 1.0);
    CHECK(points[2].fpr == 1.0);
    CHECK(points[2].tpr == 1.0);

    const auto tied = roc_points(make_samples({3, 3}, {3, 3}));
    REQUIRE(tied.size() == 2);
    CHECK(tied[1].fpr == 1.0);
    CHECK(tied[1].tpr == 1.0);
    CHECK(trapezoid_area(tied) == 0.5);
}

TEST_CASE("pauc cases") {
    const MetricConfig p01{0.1, false};
    CHECK(pauc(make_samples({0.1, 0.2}, {0.3, 0.4}), p01) == 1.0);
    CHECK(pauc(make_samples({1, 3}, {2, 4}), p01) == 0.5);
    CHECK(pauc(make_samples({2, 4}, {1, 3}), p01) == 0.0);  // inverted scores
}

TEST_CASE("pauc at p=1 reduces to auc") {
    Rng rng(4242);
    const MetricConfig p1{1.0, false};
    for (int trial = 0; trial < 50; ++trial) {
        const auto samples = random_samples(rng);
        CHECK(pauc(samples, p1) == doctest::Approx(auc(samples)).epsilon(1e-12));
    }
}

TEST_CASE("pauc mcclish maps chance to 0.5 and perfect to 1") {
    const MetricConfig cfg{0.1, true};
    CHECK(pauc(make_samples({0.1, 0.2}, {0.3, 0.4}), cfg) == doctest::Approx(1.0));
    // all tied scores trace the chance diagonal: raw area p^2/2
    CHECK(pauc(make_samples({1, 1, 1}, {1, 1, 1}), cfg) == doctest::Approx(0.5));
}

TEST_CASE("auc invariant under strictly increasing transforms") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto samples = random_samples(rng);
        const double base = auc(samples);
        for (auto& s : samples) s.score = std::exp(s.score);
        CHECK(auc(samples) == base);
    }
}

TEST_CASE("auc label-flip symmetry") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        auto samples = random_samples(rng);
        const double base = auc(samples);
        for (auto& s : samples) {
            s.score = -s.score;
            s.is_anomaly = !s.is_anomaly;
        }
        CHECK(auc(samples) == base);
    }
}

TEST_CASE("report aggregates per-class metrics") {
    std::vector<ScoredClip> scored;
    // class A: perfect separation -> auc 1.0
    scored.push_back({"a1", "m/secA", 0.1, Label::normal});
    scored.push_back({"a2", "m/secA", 0.9, Label::anomaly});
    // class B: {1,3} normals vs {2,4} anomalies -> auc 0.75
    scored.push_back({"b1", "m/secB", 1.0, Label::normal});
    scored.push_back({"b2", "m/secB", 3.0, Label::normal});
    scored.push_back({"b3", "m/secB", 2.0, Label::anomaly});
    scored.push_back({"b4", "m/secB", 4.0, Label::anomaly});
    // class C: anomalies only -> skipped with a warning
    scored.push_back({"c1", "m/secC", 0.5, Label::anomaly});

    const Report r = report(scored, MetricConfig{0.1, false});
    REQUIRE(r.classes.size() == 2);
    CHECK(r.classes[0].class_key == "m/secA");
    CHECK(r.classes[0].auc == 1.0);
    CHECK(r.classes[1].auc == 0.75);
    CHECK(r.mean_auc == doctest::Approx((1.0 + 0.75) / 2.0));
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("m/secC") != std::string::npos);

    // per-class values match auc() run per class
    CHECK(r.classes[1].auc == auc(make_samples({1, 3}, {2, 4})));
}

TEST_CASE("report csv includes the average row") {
    std::vector<ScoredClip> scored;
    scored.push_back({"a1", "k", 0.1, Label::normal});
    scored.push_back({"a2", "k", 0.9, Label::anomaly});
    const Report r = report(scored, MetricConfig{0.1, false});
    write_report_csv(r, "report_test.csv");

    std::ifstream in("report_test.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "class,auc,pauc");
    std::getline(in, line);
    CHECK(line.rfind("k,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("average,", 0) == 0);
}
