#include "freqcl/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "freqcl/errors.hpp"

namespace freqcl {

namespace {

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open wav file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0)
        throw FormatError("malformed wav header (RIFF chunk): " + path);
    if (std::memcmp(p + 8, "WAVE", 4) != 0)
        throw FormatError("malformed wav header (WAVE id): " + path);

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
    std::uint32_t sample_rate = 0;
    std::size_t data_offset = 0, data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= n) {
        const char* id = bytes.data() + pos;
        const std::uint32_t chunk_size = read_u32(p + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_size > n)
            throw FormatError(std::string("truncated wav chunk '") + std::string(id, 4) +
                              "': " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw FormatError("malformed wav chunk 'fmt ': " + path);
            format = read_u16(p + body);
            channels = read_u16(p + body + 2);
            sample_rate = read_u32(p + body + 4);
            block_align = read_u16(p + body + 12);
            bits = read_u16(p + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_offset = body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (!have_fmt) throw FormatError("missing wav chunk 'fmt ': " + path);
    if (data_offset == 0) throw FormatError("missing wav chunk 'data': " + path);
    if (channels == 0 || sample_rate == 0 || block_align == 0)
        throw FormatError("malformed wav chunk 'fmt ' (zero field): " + path);

    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool float32 = format == kFormatIeeeFloat && bits == 32;
    if (!pcm16 && !float32)
        throw UnsupportedCodecError("unsupported wav encoding (format=" + std::to_string(format) +
                                    ", bits=" + std::to_string(bits) + "): " + path);

    const std::size_t bytes_per_sample = bits / 8;
    if (block_align != bytes_per_sample * channels)
        throw FormatError("malformed wav chunk 'fmt ' (block align): " + path);

    const std::size_t frames = data_size / block_align;
    WavData out;
    out.sample_rate = static_cast<int>(sample_rate);
    out.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* s = p + data_offset + i * block_align;  // channel 0
        if (pcm16) {
            const auto raw = static_cast<std::int16_t>(read_u16(s));
            out.samples[i] = static_cast<double>(raw) / 32768.0;
        } else {
            float v;
            std::uint32_t u = read_u32(s);
            std::memcpy(&v, &u, 4);
            if (!std::isfinite(v))
                throw FormatError("malformed wav chunk 'data' (non-finite sample): " + path);
            out.samples[i] = std::clamp(static_cast<double>(v), -1.0, 1.0);
        }
    }
    return out;
}

void write_wav_pcm16(const std::string& path, const std::vector<double>& samples,
                     int sample_rate) {
    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
    std::string out;
    out.reserve(44 + data_size);
    out.append("RIFF");
    put_u32(out, 36 + data_size);
    out.append("WAVE");
    out.append("fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(sample_rate));
    put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out.append("data");
    put_u32(out, data_size);
    for (double x : samples) {
        const double clamped = std::clamp(x, -1.0, 1.0);
        const long q = std::lround(clamped * 32768.0);
        const auto v = static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
        put_u16(out, static_cast<std::uint16_t>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

}  // namespace freqcl
