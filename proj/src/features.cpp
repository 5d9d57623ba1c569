#include "freqcl/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "freqcl/errors.hpp"
#include "freqcl/parallel.hpp"
#include "freqcl/rng.hpp"

namespace freqcl {

void FeatureConfig::validate(int sample_rate) const {
    if (frame < 2) throw ConfigError("feature.frame must be >= 2");
    if (hop < 1 || hop > frame) throw ConfigError("feature.hop must satisfy 1 <= hop <= frame");
    if (mels < 1) throw ConfigError("feature.mels must be >= 1");
    if (fmin < 0.0 || fmin >= fmax) throw ConfigError("feature band must satisfy 0 <= fmin < fmax");
    if (fmax > sample_rate / 2.0)
        throw ConfigError("feature.fmax exceeds Nyquist for sample rate " +
                          std::to_string(sample_rate));
    if (log_floor <= 0.0) throw ConfigError("feature.log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void fft_complex(std::vector<double>& re, std::vector<double>& im) {
    const std::size_t n = re.size();
    if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
        throw ConfigError("fft size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }

    // Twiddles from cos/sin directly (no recurrence) so rounding stays flat.
    std::vector<double> tw_re(n / 2), tw_im(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        tw_re[k] = std::cos(ang);
        tw_im[k] = std::sin(ang);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const double wr = tw_re[k * stride];
                const double wi = tw_im[k * stride];
                const std::size_t a = i + k;
                const std::size_t b = i + k + len / 2;
                const double xr = re[b] * wr - im[b] * wi;
                const double xi = re[b] * wi + im[b] * wr;
                re[b] = re[a] - xr;
                im[b] = im[a] - xi;
                re[a] += xr;
                im[a] += xi;
            }
        }
    }
}

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// |DFT|^2 of one windowed frame into power[0..frame/2].
void frame_power(const std::vector<double>& windowed, std::vector<double>& power,
                 std::vector<double>& re, std::vector<double>& im) {
    const int frame = static_cast<int>(windowed.size());
    const int bins = frame / 2 + 1;
    if (is_pow2(frame)) {
        re.assign(windowed.begin(), windowed.end());
        im.assign(frame, 0.0);
        fft_complex(re, im);
        for (int k = 0; k < bins; ++k) power[k] = re[k] * re[k] + im[k] * im[k];
        return;
    }
    for (int k = 0; k < bins; ++k) {
        double sr = 0.0, si = 0.0;
        for (int t = 0; t < frame; ++t) {
            const double ang = -2.0 * kPi * k * t / frame;
            sr += windowed[t] * std::cos(ang);
            si += windowed[t] * std::sin(ang);
        }
        power[k] = sr * sr + si * si;
    }
}

}  // namespace

Spectrogram stft_power(const Clip& clip, const FeatureConfig& cfg) {
    cfg.validate(clip.sample_rate);
    const auto len = static_cast<long>(clip.samples.size());
    if (len < 1) throw ConfigError("stft_power requires a non-empty clip");

    const int frame = cfg.frame;
    const int hop = cfg.hop;
    const int pad = frame / 2;
    const int bins = frame / 2 + 1;
    const int frames = 1 + static_cast<int>(len / hop);

    // Reflective padding (edge sample not repeated); clips shorter than the
    // pad fall back to zeros outside the mirrored range.
    std::vector<double> padded(static_cast<std::size_t>(len) + 2 * pad, 0.0);
    for (long i = 0; i < static_cast<long>(padded.size()); ++i) {
        long src = i - pad;
        if (src < 0) src = -src;
        if (src >= len) src = 2 * (len - 1) - src;
        if (src >= 0 && src < len) padded[i] = clip.samples[src];
    }

    std::vector<double> window(frame);
    for (int i = 0; i < frame; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / frame));  // periodic Hann

    Spectrogram out(bins, frames);
    out.clip_id = clip.id;
    std::vector<double> windowed(frame), power(bins), re, im;
    for (int t = 0; t < frames; ++t) {
        const std::size_t start = static_cast<std::size_t>(t) * hop;
        for (int i = 0; i < frame; ++i) windowed[i] = padded[start + i] * window[i];
        frame_power(windowed, power, re, im);
        for (int k = 0; k < bins; ++k) out.at(k, t) = power[k];
    }
    return out;
}

Spectrogram mel_filterbank(const FeatureConfig& cfg, int sample_rate) {
    cfg.validate(sample_rate);
    const int bins = cfg.frame / 2 + 1;
    const int mels = cfg.mels;

    // mels+2 nodes equally spaced on the mel scale; node j is the center of
    // filter j and the edge of its neighbors.
    std::vector<double> node_hz(mels + 2);
    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(cfg.fmax);
    for (int j = 0; j < mels + 2; ++j)
        node_hz[j] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * j / (mels + 1));

    Spectrogram fb(mels, bins);
    for (int m = 0; m < mels; ++m) {
        const double left = node_hz[m];
        const double center = node_hz[m + 1];
        const double right = node_hz[m + 2];
        const double norm = 2.0 / (right - left);
        double row_sum = 0.0;
        for (int k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / cfg.frame;
            const double up = (f - left) / (center - left);
            const double down = (right - f) / (right - center);
            const double w = std::max(0.0, std::min(up, down));
            fb.at(m, k) = w * norm;
            row_sum += w;
        }
        if (row_sum <= 0.0)
            throw ConfigError("mel filter " + std::to_string(m) +
                              " is empty; reduce feature.mels or increase feature.frame");
    }
    return fb;
}

Spectrogram log_mel(const Clip& clip, const FeatureConfig& cfg) {
    return log_mel(clip, cfg, mel_filterbank(cfg, clip.sample_rate));
}

Spectrogram log_mel(const Clip& clip, const FeatureConfig& cfg, const Spectrogram& filterbank) {
    const Spectrogram power = stft_power(clip, cfg);
    const int bins = power.rows;
    const int frames = power.cols;
    if (filterbank.cols != bins) throw ConfigError("filterbank does not match stft bin count");

    Spectrogram out(filterbank.rows, frames);
    out.clip_id = clip.id;
    for (int m = 0; m < filterbank.rows; ++m) {
        for (int t = 0; t < frames; ++t) {
            double acc = 0.0;
            for (int k = 0; k < bins; ++k) acc += filterbank.at(m, k) * power.at(k, t);
            out.at(m, t) = std::log(std::max(acc, cfg.log_floor));
        }
    }
    return out;
}

void export_spectrogram_csv(const Spectrogram& s, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    char buf[40];
    for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", s.at(r, c));
            out << buf << (c + 1 == s.cols ? '\n' : ',');
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

void export_spectrogram_pgm(const Spectrogram& s, const std::string& path) {
    const auto [mn_it, mx_it] = std::minmax_element(s.values.begin(), s.values.end());
    const double mn = *mn_it;
    const double span = *mx_it - mn;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "P5\n" << s.cols << ' ' << s.rows << "\n255\n";
    for (int r = s.rows - 1; r >= 0; --r) {  // highest band on top
        for (int c = 0; c < s.cols; ++c) {
            const double v = span > 0.0 ? (s.at(r, c) - mn) / span : 0.0;
            out.put(static_cast<char>(std::lround(v * 255.0)));
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<FeatureItem> extract_features(const DatasetManifest& manifest,
                                          const std::string& split, const FeatureConfig& cfg,
                                          int sample_rate, double clip_seconds, int threads) {
    const auto entries = manifest.split(split);
    if (entries.empty()) throw DataError("no entries in split '" + split + "'");
    const Spectrogram fb = mel_filterbank(cfg, sample_rate);

    std::vector<FeatureItem> items(entries.size());
    parallel_for(entries.size(), threads, [&](std::size_t i) {
        const ManifestEntry& e = entries[i];
        const Clip clip = load_clip(manifest.root, e, sample_rate, clip_seconds);
        items[i] = FeatureItem{clip.id, e.class_key(), e.domain, e.label, log_mel(clip, cfg, fb)};
    });
    return items;
}

}  // namespace freqcl
