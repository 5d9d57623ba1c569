#pragma once

#include <string>
#include <vector>

#include "freqcl/dataset.hpp"
#include "freqcl/spectrogram.hpp"

namespace freqcl {

struct FeatureConfig {
    int frame = 1024;  // STFT frame size W
    int hop = 512;     // hop H
    int mels = 128;    // mel bands M
    double fmin = 0.0;
    double fmax = 8000.0;
    double log_floor = 1e-10;

    void validate(int sample_rate) const;  // throws ConfigError
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// In-place complex FFT (radix-2, size must be a power of two).
void fft_complex(std::vector<double>& re, std::vector<double>& im);

// Power spectrogram: reflective center padding by frame/2 on both ends,
// periodic Hann window, |DFT|^2 per bin. rows = frame/2+1, cols = 1 +
// floor(len/hop). Non-power-of-two frames fall back to a direct DFT.
Spectrogram stft_power(const Clip& clip, const FeatureConfig& cfg);

// Triangular mel filterbank, centers equally spaced on the mel scale, each
// filter scaled by 2/(f_right - f_left). rows = mels, cols = frame/2+1.
// Throws ConfigError naming the first empty filter.
Spectrogram mel_filterbank(const FeatureConfig& cfg, int sample_rate);

// ln(max(filterbank x power, log_floor)); shape mels x frames.
Spectrogram log_mel(const Clip& clip, const FeatureConfig& cfg);
Spectrogram log_mel(const Clip& clip, const FeatureConfig& cfg, const Spectrogram& filterbank);

// Row-major CSV, one row of T values per mel band.
void export_spectrogram_csv(const Spectrogram& s, const std::string& path);
// Binary 8-bit PGM, min-max scaled, row 0 = highest mel band.
void export_spectrogram_pgm(const Spectrogram& s, const std::string& path);

// One feature-extracted clip with the metadata the trainer and scorer need.
struct FeatureItem {
    std::string clip_id;
    std::string class_key;
    std::string domain;
    Label label = Label::unknown;
    Spectrogram logmel;
};

std::vector<FeatureItem> extract_features(const DatasetManifest& manifest,
                                          const std::string& split, const FeatureConfig& cfg,
                                          int sample_rate, double clip_seconds, int threads = 1);

}  // namespace freqcl
