#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace freqcl {

// Row-major real matrix. Used both for STFT power spectra (rows = DFT bins)
// and log-mel features (rows = mel bands, cols = frames).
struct Spectrogram {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    std::string clip_id;

    Spectrogram() = default;
    Spectrogram(int r, int c, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return values.size(); }
    bool same_shape(const Spectrogram& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

inline double grand_mean(const Spectrogram& s) {
    double acc = 0.0;
    for (double v : s.values) acc += v;
    return s.values.empty() ? 0.0 : acc / static_cast<double>(s.values.size());
}

// Population standard deviation over all entries.
inline double grand_std(const Spectrogram& s) {
    if (s.values.empty()) return 0.0;
    const double m = grand_mean(s);
    double acc = 0.0;
    for (double v : s.values) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(s.values.size()));
}

}  // namespace freqcl
