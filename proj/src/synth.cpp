#include "freqcl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "freqcl/errors.hpp"
#include "freqcl/rng.hpp"
#include "freqcl/wav.hpp"

namespace fs = std::filesystem;

namespace freqcl {

std::vector<std::pair<double, double>> SynthConfig::resolved_f0_ranges() const {
    if (!f0_ranges.empty()) return f0_ranges;
    std::vector<std::pair<double, double>> ranges = {{60.0, 90.0}, {110.0, 150.0}, {180.0, 220.0}};
    for (int k = 3; k < sections; ++k) {
        const double lo = 220.0 + 70.0 * (k - 2);
        ranges.emplace_back(lo, lo + 30.0);
    }
    ranges.resize(sections);
    return ranges;
}

void SynthConfig::validate() const {
    if (sections < 1) throw ConfigError("synth.sections must be >= 1");
    if (train_clips < 0 || test_normal < 0 || test_anomaly < 0)
        throw ConfigError("synth clip counts must be >= 0");
    if (harmonics < 1) throw ConfigError("synth.harmonics must be >= 1");
    if (noise_level < 0.0) throw ConfigError("synth.noise_level must be >= 0");
    if (!(burst_lo > 0.0 && burst_lo < burst_hi && burst_hi <= sample_rate / 2.0))
        throw ConfigError("synth burst band must satisfy 0 < lo < hi <= Nyquist");
    if (bursts_min < 0 || bursts_min > bursts_max)
        throw ConfigError("synth burst count range invalid");
    if (sample_rate < 1000) throw ConfigError("synth.sample_rate too small");
    if (clip_seconds <= 0.0) throw ConfigError("synth clip_seconds must be positive");

    const auto ranges = resolved_f0_ranges();
    if (static_cast<int>(ranges.size()) != sections)
        throw ConfigError("synth f0 ranges must match section count");
    double prev_hi = 0.0;
    double max_harmonic = 0.0;
    for (const auto& [lo, hi] : ranges) {
        if (!(lo > 0.0 && lo < hi)) throw ConfigError("synth f0 range invalid");
        if (lo <= prev_hi) throw ConfigError("synth f0 ranges must be disjoint and increasing");
        prev_hi = hi;
        max_harmonic = std::max(max_harmonic, hi * harmonics);
    }
    if (max_harmonic >= burst_lo)
        throw ConfigError("synth burst band must lie above every harmonic (max harmonic " +
                          std::to_string(max_harmonic) + " Hz)");
}

namespace {

constexpr std::uint64_t kNormalStream = 1;
constexpr std::uint64_t kBurstStream = 2;

double domain_noise_level(int index, const SynthConfig& cfg) {
    const bool target = cfg.two_domains && (index % 2 == 1);
    return target ? cfg.noise_level * 1.5 : cfg.noise_level;
}

void peak_normalize(std::vector<double>& samples, double peak) {
    double max_abs = 0.0;
    for (double v : samples) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs <= 0.0) return;
    const double gain = peak / max_abs;
    for (double& v : samples) v *= gain;
}

std::vector<double> base_waveform(int section, int index, const SynthConfig& cfg) {
    const auto n = static_cast<std::size_t>(std::llround(cfg.clip_seconds * cfg.sample_rate));
    const auto [f0_lo, f0_hi] = cfg.resolved_f0_ranges()[section];

    Rng rng(mix_seed(cfg.seed, kNormalStream, static_cast<std::uint64_t>(section),
                     static_cast<std::uint64_t>(index)));
    const double f0 = rng.uniform(f0_lo, f0_hi);  // per-clip detune

    // Clips within a section differ only by the f0 draw, phases, and the
    // noise realization; harmonic amplitudes follow a fixed 1/h profile.
    std::vector<double> amp(cfg.harmonics), phase(cfg.harmonics);
    for (int h = 0; h < cfg.harmonics; ++h) {
        amp[h] = 1.0 / (h + 1);
        phase[h] = rng.uniform(0.0, 2.0 * kPi);
    }

    const double noise = domain_noise_level(index, cfg);
    std::vector<double> samples(n, 0.0);
    // Three cascaded one-pole stages keep the rumble well below the burst
    // band, so the high band of a normal clip is genuinely quiet.
    double lp1 = 0.0, lp2 = 0.0, lp3 = 0.0;
    const double beta = 0.95;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate;
        double v = 0.0;
        for (int h = 0; h < cfg.harmonics; ++h)
            v += amp[h] * std::sin(2.0 * kPi * (h + 1) * f0 * t + phase[h]);
        lp1 = beta * lp1 + (1.0 - beta) * rng.normal();
        lp2 = beta * lp2 + (1.0 - beta) * lp1;
        lp3 = beta * lp3 + (1.0 - beta) * lp2;
        samples[i] = v + noise * 14.0 * lp3;  // x14 offsets the cascade attenuation
    }
    return samples;
}

void add_bursts(std::vector<double>& samples, int section, int index, const SynthConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, kBurstStream, static_cast<std::uint64_t>(section),
                     static_cast<std::uint64_t>(index)));
    const int bursts = static_cast<int>(rng.uniform_int(cfg.bursts_min, cfg.bursts_max));
    const auto n = static_cast<std::int64_t>(samples.size());

    const double band = cfg.burst_hi - cfg.burst_lo;
    std::vector<double> burst;
    for (int b = 0; b < bursts; ++b) {
        const double dur = rng.uniform(0.05, 0.2);  // 50-200 ms
        const auto len = std::min<std::int64_t>(
            n, std::max<std::int64_t>(1, std::llround(dur * cfg.sample_rate)));
        const std::int64_t start = rng.uniform_int(0, n - len);
        // Bursts ride on the already-normalized base inside its 0.1 headroom,
        // so an anomaly is a pure energy addition with no gain change.
        const double amp = rng.uniform(0.04, 0.09);
        const bool is_chirp = rng.uniform() < 0.5;

        burst.assign(len, 0.0);
        if (is_chirp) {
            // Wide linear sweep covering most of the band.
            const double f_start = rng.uniform(cfg.burst_lo, cfg.burst_lo + 0.3 * band);
            const double f_end = rng.uniform(cfg.burst_hi - 0.3 * band, cfg.burst_hi);
            const double rate =
                (f_end - f_start) / (static_cast<double>(len) / cfg.sample_rate);
            for (std::int64_t i = 0; i < len; ++i) {
                const double tb = static_cast<double>(i) / cfg.sample_rate;
                burst[i] = std::sin(2.0 * kPi * (f_start * tb + 0.5 * rate * tb * tb));
            }
        } else {
            // Band-limited click: dense random tones across the band.
            constexpr int kTones = 16;
            double freqs[kTones], phases[kTones];
            for (int tone = 0; tone < kTones; ++tone) {
                freqs[tone] = cfg.burst_lo + band * (tone + rng.uniform()) / kTones;
                phases[tone] = rng.uniform(0.0, 2.0 * kPi);
            }
            for (std::int64_t i = 0; i < len; ++i) {
                const double tb = static_cast<double>(i) / cfg.sample_rate;
                double v = 0.0;
                for (int tone = 0; tone < kTones; ++tone)
                    v += std::sin(2.0 * kPi * freqs[tone] * tb + phases[tone]);
                burst[i] = v;
            }
        }

        double peak = 0.0;
        for (std::int64_t i = 0; i < len; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(len);
            burst[i] *= 0.5 * (1.0 - std::cos(2.0 * kPi * u));  // Hann envelope
            peak = std::max(peak, std::abs(burst[i]));
        }
        if (peak <= 0.0) continue;
        for (std::int64_t i = 0; i < len; ++i) samples[start + i] += burst[i] * (amp / peak);
    }
}

Clip finish_clip(std::vector<double> samples, int section, const SynthConfig& cfg, Label label,
                 int index) {
    Clip clip;
    clip.samples = std::move(samples);
    clip.sample_rate = cfg.sample_rate;
    clip.machine_type = cfg.machine_type;
    char sec[16];
    std::snprintf(sec, sizeof(sec), "sec%02d", section);
    clip.section = sec;
    clip.domain = cfg.two_domains ? (index % 2 == 1 ? "target" : "source") : "source";
    clip.label = label;
    return clip;
}

}  // namespace

Clip gen_normal(int section, int index, const SynthConfig& cfg) {
    cfg.validate();
    if (section < 0 || section >= cfg.sections) throw ConfigError("section out of range");
    std::vector<double> samples = base_waveform(section, index, cfg);
    peak_normalize(samples, 0.9);
    return finish_clip(std::move(samples), section, cfg, Label::normal, index);
}

Clip gen_anomaly(int section, int index, const SynthConfig& cfg) {
    cfg.validate();
    if (section < 0 || section >= cfg.sections) throw ConfigError("section out of range");
    std::vector<double> samples = base_waveform(section, index, cfg);
    peak_normalize(samples, 0.9);
    add_bursts(samples, section, index, cfg);
    return finish_clip(std::move(samples), section, cfg, Label::anomaly, index);
}

DatasetManifest gen_corpus(const SynthConfig& cfg, const std::string& root) {
    cfg.validate();
    const fs::path base = fs::path(root) / cfg.machine_type;
    std::error_code ec;
    fs::create_directories(base / "train", ec);
    fs::create_directories(base / "test", ec);
    if (ec) throw DataError("cannot create corpus directories under " + root);

    auto write_clip = [&](const Clip& clip, const std::string& split, int index) {
        char name[96];
        std::snprintf(name, sizeof(name), "%s_%s_%s_%04d.wav", clip.section.c_str(),
                      clip.domain.c_str(), to_string(clip.label).c_str(), index);
        write_wav_pcm16((base / split / name).string(), clip.samples, clip.sample_rate);
    };

    // Test indices live in separate ranges so every generated clip is a pure
    // function of (seed, section, index).
    for (int s = 0; s < cfg.sections; ++s) {
        for (int i = 0; i < cfg.train_clips; ++i) write_clip(gen_normal(s, i, cfg), "train", i);
        for (int i = 0; i < cfg.test_normal; ++i)
            write_clip(gen_normal(s, 1000 + i, cfg), "test", 1000 + i);
        for (int i = 0; i < cfg.test_anomaly; ++i)
            write_clip(gen_anomaly(s, 2000 + i, cfg), "test", 2000 + i);
    }
    return scan_manifest(root);
}

}  // namespace freqcl
