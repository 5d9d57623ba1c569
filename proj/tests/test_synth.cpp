#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "freqcl/errors.hpp"
#include "freqcl/features.hpp"
#include "freqcl/rng.hpp"
#include "freqcl/synth.hpp"

namespace fs = std::filesystem;
using namespace freqcl;

namespace {

SynthConfig quick_config() {
    SynthConfig cfg;
    cfg.clip_seconds = 2.0;  // keeps spectral tests fast
    cfg.seed = 99;
    return cfg;
}

// Fraction of STFT power at or above cutoff_hz.
double high_band_fraction(const Clip& clip, double cutoff_hz) {
    FeatureConfig feat;
    feat.frame = 1024;
    feat.hop = 512;
    const Spectrogram power = stft_power(clip, feat);
    const double hz_per_bin = static_cast<double>(clip.sample_rate) / feat.frame;
    double total = 0.0, high = 0.0;
    for (int k = 0; k < power.rows; ++k) {
        double band = 0.0;
        for (int t = 0; t < power.cols; ++t) band += power.at(k, t);
        total += band;
        if (k * hz_per_bin >= cutoff_hz) high += band;
    }
    return high / total;
}

double band_energy(const Clip& clip, double cutoff_hz) {
    FeatureConfig feat;
    feat.frame = 1024;
    feat.hop = 512;
    const Spectrogram power = stft_power(clip, feat);
    const double hz_per_bin = static_cast<double>(clip.sample_rate) / feat.frame;
    double high = 0.0;
    for (int k = 0; k < power.rows; ++k) {
        if (k * hz_per_bin < cutoff_hz) continue;
        for (int t = 0; t < power.cols; ++t) high += power.at(k, t);
    }
    return high;
}

// Dominant frequency via a windowed FFT of the clip head.
double peak_frequency(const Clip& clip) {
    const std::size_t n = 16384;
    std::vector<double> re(n, 0.0), im(n, 0.0);
    for (std::size_t i = 0; i < n && i < clip.samples.size(); ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
        re[i] = clip.samples[i] * w;
    }
    fft_complex(re, im);
    std::size_t argmax = 1;
    double best = 0.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double p = re[k] * re[k] + im[k] * im[k];
        if (p > best) {
            best = p;
            argmax = k;
        }
    }
    return static_cast<double>(argmax) * clip.sample_rate / static_cast<double>(n);
}

}  // namespace

TEST_CASE("gen_normal is deterministic and in range") {
    const SynthConfig cfg = quick_config();
    const Clip a = gen_normal(0, 7, cfg);
    const Clip b = gen_normal(0, 7, cfg);
    REQUIRE(a.samples == b.samples);
    CHECK(a.samples.size() == 32000);
    CHECK(a.label == Label::normal);
    double peak = 0.0;
    for (double v : a.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(0.9).epsilon(1e-9));

    const Clip c = gen_normal(0, 8, cfg);
    CHECK(a.samples != c.samples);
}

TEST_CASE("normal clips keep almost all energy below the burst band") {
    const SynthConfig cfg = quick_config();
    for (int section = 0; section < cfg.sections; ++section)
        for (int index : {0, 1, 5}) {
            const Clip clip = gen_normal(section, index, cfg);
            REQUIRE(high_band_fraction(clip, cfg.burst_lo) < 0.05);
        }
}

TEST_CASE("sections have disjoint fundamental estimates") {
    const SynthConfig cfg = quick_config();
    std::vector<double> sec0, sec1;
    for (int i = 0; i < 5; ++i) {
        sec0.push_back(peak_frequency(gen_normal(0, i, cfg)));
        sec1.push_back(peak_frequency(gen_normal(1, i, cfg)));
    }
    const double max0 = *std::max_element(sec0.begin(), sec0.end());
    const double min1 = *std::min_element(sec1.begin(), sec1.end());
    CHECK(max0 < min1);
    CHECK(max0 <= 95.0);   // range 60-90 plus bin width
    CHECK(min1 >= 105.0);  // range 110-150 minus bin width
}

TEST_CASE("anomalies at least double the high-band energy of their matched normal") {
    const SynthConfig cfg = quick_config();
    for (int section = 0; section < cfg.sections; ++section)
        for (int index : {0, 3}) {
            const Clip normal = gen_normal(section, index, cfg);
            const Clip anomaly = gen_anomaly(section, index, cfg);
            REQUIRE(band_energy(anomaly, cfg.burst_lo) >=
                    2.0 * band_energy(normal, cfg.burst_lo));
            REQUIRE(high_band_fraction(anomaly, cfg.burst_lo) >
                    high_band_fraction(normal, cfg.burst_lo));
        }
}

TEST_CASE("zero bursts reproduce the matched normal exactly") {
    SynthConfig cfg = quick_config();
    cfg.bursts_min = 0;
    cfg.bursts_max = 0;
    const Clip normal = gen_normal(1, 4, cfg);
    const Clip anomaly = gen_anomaly(1, 4, cfg);
    REQUIRE(anomaly.samples == normal.samples);
    CHECK(anomaly.label == Label::anomaly);
}

TEST_CASE("gen_corpus writes the documented layout with correct counts") {
    const fs::path root = fs::temp_directory_path() / "freqcl_synth_corpus";
    fs::remove_all(root);

    SynthConfig cfg = quick_config();
    cfg.train_clips = 4;
    cfg.test_normal = 2;
    cfg.test_anomaly = 2;
    const DatasetManifest manifest = gen_corpus(cfg, root.string());

    CHECK(manifest.entries.size() ==
          static_cast<std::size_t>(cfg.sections * (4 + 2 + 2)));
    CHECK(manifest.warnings.empty());
    CHECK(manifest.split("train").size() == static_cast<std::size_t>(cfg.sections * 4));
    CHECK(manifest.split("test").size() == static_cast<std::size_t>(cfg.sections * 4));

    std::size_t anomalies = 0, sources = 0, targets = 0;
    for (const auto& e : manifest.entries) {
        if (e.label == Label::anomaly) ++anomalies;
        if (e.domain == "source") ++sources;
        if (e.domain == "target") ++targets;
        REQUIRE(e.machine_type == cfg.machine_type);
    }
    CHECK(anomalies == static_cast<std::size_t>(cfg.sections * 2));
    CHECK(sources + targets == manifest.entries.size());
    CHECK(targets > 0);  // two domains by default

    // deterministic regeneration produces identical bytes
    const fs::path root2 = fs::temp_directory_path() / "freqcl_synth_corpus2";
    fs::remove_all(root2);
    gen_corpus(cfg, root2.string());
    for (const auto& e : manifest.entries) {
        std::ifstream a(root / e.path, std::ios::binary);
        std::ifstream b(root2 / e.path, std::ios::binary);
        const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                                  std::istreambuf_iterator<char>());
        const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                                  std::istreambuf_iterator<char>());
        REQUIRE(!bytes_a.empty());
        REQUIRE(bytes_a == bytes_b);
    }

    fs::remove_all(root);
    fs::remove_all(root2);
}

TEST_CASE("synth config validation") {
    SynthConfig cfg = quick_config();
    cfg.burst_lo = 1000.0;  // below the top harmonic
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = quick_config();
    cfg.f0_ranges = {{60.0, 90.0}, {80.0, 120.0}, {180.0, 220.0}};  // overlap
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = quick_config();
    cfg.bursts_min = 4;
    cfg.bursts_max = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = quick_config();
    cfg.sections = 5;  // derived ranges must stay valid
    CHECK_NOTHROW(cfg.validate());
}
