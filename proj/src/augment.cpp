#include "freqcl/augment.hpp"

#include <algorithm>
#include <cmath>

#include "freqcl/errors.hpp"

namespace freqcl {

namespace {

constexpr double kStdGuard = 1e-8;

}  // namespace

NormStats fit_pre_norm(const std::vector<const Spectrogram*>& training) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Spectrogram* s : training) {
        for (double v : s->values) sum += v;
        count += s->size();
    }
    if (count == 0) throw DataError("fit_pre_norm: empty training collection");

    const double mean = sum / static_cast<double>(count);
    double dev = 0.0;
    for (const Spectrogram* s : training)
        for (double v : s->values) dev += (v - mean) * (v - mean);
    double std = std::sqrt(dev / static_cast<double>(count));
    if (std < kStdGuard) std = 1.0;
    return NormStats{mean, std};
}

NormStats fit_pre_norm(const std::vector<Spectrogram>& training) {
    std::vector<const Spectrogram*> ptrs;
    ptrs.reserve(training.size());
    for (const auto& s : training) ptrs.push_back(&s);
    return fit_pre_norm(ptrs);
}

Spectrogram pre_normalize(const Spectrogram& x, const NormStats& stats) {
    Spectrogram out = x;
    for (double& v : out.values) v = (v - stats.mean) / stats.std;
    return out;
}

MemoryBank::MemoryBank(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("bank.capacity must be >= 1");
}

void MemoryBank::push(Spectrogram x) {
    buffer_.push_back(std::move(x));
    while (buffer_.size() > capacity_) buffer_.pop_front();
}

void MixupConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("mixup.alpha must be in (0, 1]");
}

void RrcConfig::validate() const {
    if (!(scale_lo > 0.0 && scale_lo <= scale_hi && scale_hi <= 1.0))
        throw ConfigError("rrc scale range must satisfy 0 < lo <= hi <= 1");
    if (!(aspect_lo > 0.0 && aspect_lo <= aspect_hi))
        throw ConfigError("rrc aspect range must satisfy 0 < lo <= hi");
}

Spectrogram log_mixup_exp(const Spectrogram& x_i, const Spectrogram& x_k, double lambda) {
    if (!x_i.same_shape(x_k)) throw ConfigError("log_mixup_exp: shape mismatch");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("log_mixup_exp: lambda not in [0, 1)");
    if (lambda == 0.0) return x_i;

    Spectrogram out = x_i;
    for (std::size_t e = 0; e < out.values.size(); ++e) {
        const double a = x_i.values[e];
        const double b = x_k.values[e];
        if (a == b) continue;  // exact fixed point
        const double m = std::max(a, b);
        out.values[e] = m + std::log((1.0 - lambda) * std::exp(a - m) + lambda * std::exp(b - m));
    }
    return out;
}

double draw_lambda(Rng& rng, const MixupConfig& cfg) {
    cfg.validate();
    return rng.uniform() * cfg.alpha;
}

Spectrogram bank_mix(const Spectrogram& x, MemoryBank& bank, Rng& rng, const MixupConfig& cfg) {
    if (bank.size() == 0) {
        bank.push(x);
        return x;
    }
    const auto pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(bank.size()) - 1));
    const double lambda = draw_lambda(rng, cfg);
    Spectrogram mixed = log_mixup_exp(x, bank.at(pick), lambda);
    bank.push(x);  // past inputs stay unmixed
    return mixed;
}

namespace {

// Corner-aligned source coordinate: never leaves [0, in_len-1], is exactly
// the identity when out_len == in_len, and is affine in the output index.
inline double src_coord(int out_idx, int in_len, int out_len) {
    if (out_len <= 1 || in_len <= 1) return 0.0;
    return static_cast<double>(out_idx) * (in_len - 1) / static_cast<double>(out_len - 1);
}

}  // namespace

Spectrogram random_resize_crop(const Spectrogram& x, Rng& rng, const RrcConfig& cfg) {
    cfg.validate();
    if (x.rows < 2 || x.cols < 2) throw ConfigError("random_resize_crop needs a >= 2x2 input");

    const double s = rng.uniform(cfg.scale_lo, cfg.scale_hi);
    const double a = rng.uniform(cfg.aspect_lo, cfg.aspect_hi);
    const int crop_h = std::clamp(
        static_cast<int>(std::lround(x.rows * std::sqrt(s * a))), 1, x.rows);
    const int crop_w = std::clamp(
        static_cast<int>(std::lround(x.cols * std::sqrt(s / a))), 1, x.cols);
    const int top = static_cast<int>(rng.uniform_int(0, x.rows - crop_h));
    const int left = static_cast<int>(rng.uniform_int(0, x.cols - crop_w));

    Spectrogram out(x.rows, x.cols);
    out.clip_id = x.clip_id;
    for (int r = 0; r < x.rows; ++r) {
        const double sy = src_coord(r, crop_h, x.rows);
        const int y0 = static_cast<int>(sy);
        const double fy = sy - y0;
        const int y1 = std::min(y0 + 1, crop_h - 1);
        for (int c = 0; c < x.cols; ++c) {
            const double sx = src_coord(c, crop_w, x.cols);
            const int x0 = static_cast<int>(sx);
            const double fx = sx - x0;
            const int x1 = std::min(x0 + 1, crop_w - 1);

            const double v00 = x.at(top + y0, left + x0);
            if (fy == 0.0 && fx == 0.0) {
                out.at(r, c) = v00;  // keep identity crops bit-exact
                continue;
            }
            const double v01 = x.at(top + y0, left + x1);
            const double v10 = x.at(top + y1, left + x0);
            const double v11 = x.at(top + y1, left + x1);
            out.at(r, c) = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                           fy * ((1.0 - fx) * v10 + fx * v11);
        }
    }
    return out;
}

Spectrogram post_normalize(const Spectrogram& x) {
    if (x.size() < 2) throw ConfigError("post_normalize needs at least 2 entries");
    const double mean = grand_mean(x);
    double std = grand_std(x);
    if (std < kStdGuard) std = 1.0;
    Spectrogram out = x;
    for (double& v : out.values) v = (v - mean) / std;
    return out;
}

Spectrogram augment_view(const Spectrogram& raw, const NormStats& stats, MemoryBank& bank,
                         Rng& rng, const AugmentConfig& cfg) {
    const Spectrogram pre = pre_normalize(raw, stats);
    const Spectrogram mixed = bank_mix(pre, bank, rng, cfg.mixup);
    const Spectrogram cropped = random_resize_crop(mixed, rng, cfg.rrc);
    return post_normalize(cropped);
}

ViewPair make_views(const Spectrogram& raw, const NormStats& stats, MemoryBank& bank, Rng& rng,
                    const AugmentConfig& cfg) {
    ViewPair pair;
    pair.a = augment_view(raw, stats, bank, rng, cfg);
    pair.b = augment_view(raw, stats, bank, rng, cfg);
    return pair;
}

}  // namespace freqcl
