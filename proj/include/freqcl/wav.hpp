#pragma once

#include <string>
#include <vector>

namespace freqcl {

struct WavData {
    std::vector<double> samples;  // channel 0, scaled to [-1, 1]
    int sample_rate = 0;
};

// RIFF/WAVE reader for 16-bit PCM and 32-bit IEEE float. Multi-channel files
// contribute channel 0 only. int16 samples are scaled by 1/32768.
// Throws FormatError naming the offending chunk, or UnsupportedCodecError.
WavData read_wav(const std::string& path);

// 16-bit PCM mono writer. Samples are clamped to [-1, 1] and quantized with
// round(x * 32768), saturating at int16 range.
void write_wav_pcm16(const std::string& path, const std::vector<double>& samples,
                     int sample_rate);

}  // namespace freqcl
