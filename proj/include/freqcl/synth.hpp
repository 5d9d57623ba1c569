#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freqcl/dataset.hpp"

namespace freqcl {

// Deterministic machine-sound corpus: normal clips are low-frequency
// harmonic stacks plus low-passed noise; anomalies add short band-limited
// chirp bursts well above every harmonic.
struct SynthConfig {
    int sections = 3;
    int train_clips = 20;    // per section, all normal
    int test_normal = 10;    // per section
    int test_anomaly = 10;   // per section
    int harmonics = 6;
    double noise_level = 0.05;
    double burst_lo = 4000.0;  // anomaly band, Hz
    double burst_hi = 7000.0;
    int bursts_min = 16;
    int bursts_max = 32;
    bool two_domains = true;  // odd indices become "target" with louder noise
    int sample_rate = 16000;
    double clip_seconds = 10.0;
    std::uint64_t seed = 0;
    std::string machine_type = "synthfan";
    std::vector<std::pair<double, double>> f0_ranges;  // empty -> defaults

    void validate() const;  // throws ConfigError
    std::vector<std::pair<double, double>> resolved_f0_ranges() const;
};

// Deterministic per (seed, section, index).
Clip gen_normal(int section, int index, const SynthConfig& cfg);

// gen_normal base plus band-limited bursts; bursts_min == bursts_max == 0
// reproduces the matched normal clip exactly.
Clip gen_anomaly(int section, int index, const SynthConfig& cfg);

// Writes the corpus under the dataset layout and returns a fresh scan.
DatasetManifest gen_corpus(const SynthConfig& cfg, const std::string& root);

}  // namespace freqcl
