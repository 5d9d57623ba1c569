#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "freqcl/rng.hpp"
#include "freqcl/spectrogram.hpp"

namespace freqcl {

struct NormStats {
    double mean = 0.0;
    double std = 1.0;
};

// Grand mean / population std over all entries of all spectrograms.
// std below 1e-8 is replaced by 1. Throws DataError on an empty collection.
NormStats fit_pre_norm(const std::vector<Spectrogram>& training);
NormStats fit_pre_norm(const std::vector<const Spectrogram*>& training);

Spectrogram pre_normalize(const Spectrogram& x, const NormStats& stats);

// FIFO buffer of past (pre-normalized) inputs that supplies mixing
// counterparts. Single-writer: owned by the training thread.
class MemoryBank {
  public:
    explicit MemoryBank(std::size_t capacity);

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Spectrogram& at(std::size_t i) const { return buffer_[i]; }

    void push(Spectrogram x);

  private:
    std::size_t capacity_;
    std::deque<Spectrogram> buffer_;
};

struct MixupConfig {
    double alpha = 0.4;  // mixing-ratio upper bound, in (0, 1]
    void validate() const;
};

struct RrcConfig {
    double scale_lo = 0.6;
    double scale_hi = 1.0;
    double aspect_lo = 0.75;
    double aspect_hi = 4.0 / 3.0;
    void validate() const;
};

struct AugmentConfig {
    MixupConfig mixup;
    RrcConfig rrc;
    std::size_t bank_capacity = 512;
};

// Elementwise ln((1-lambda) exp(x_i) + lambda exp(x_k)), shift-stabilized.
// lambda == 0 and equal entries return the input bits untouched.
Spectrogram log_mixup_exp(const Spectrogram& x_i, const Spectrogram& x_k, double lambda);

// Uniform draw from [0, alpha).
double draw_lambda(Rng& rng, const MixupConfig& cfg);

// Mixes x with a uniformly chosen bank element, then pushes the unmixed x.
// An empty bank returns x unchanged (and still pushes it).
Spectrogram bank_mix(const Spectrogram& x, MemoryBank& bank, Rng& rng, const MixupConfig& cfg);

// Crop of relative area in scale_range with aspect ratio in aspect_range,
// resized back to the input shape with corner-aligned bilinear interpolation.
Spectrogram random_resize_crop(const Spectrogram& x, Rng& rng, const RrcConfig& cfg);

// Standardizes a spectrogram by its own mean and population std
// (std below 1e-8 treated as 1).
Spectrogram post_normalize(const Spectrogram& x);

struct ViewPair {
    Spectrogram a;
    Spectrogram b;
};

// One pass of pre-normalize -> bank_mix -> random_resize_crop ->
// post_normalize.
Spectrogram augment_view(const Spectrogram& raw, const NormStats& stats, MemoryBank& bank,
                         Rng& rng, const AugmentConfig& cfg);

// Two independent augment_view passes over the same raw spectrogram.
ViewPair make_views(const Spectrogram& raw, const NormStats& stats, MemoryBank& bank, Rng& rng,
                    const AugmentConfig& cfg);

}  // namespace freqcl
