#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "freqcl/rng.hpp"
#include "freqcl/spectrogram.hpp"
#include "freqcl/tensor.hpp"

namespace freqcl {

// Fixed encoder graph: [conv 3x3 stride 2, pad 1 -> ReLU] per block,
// global average pooling, linear projection, L2 normalization. The dot
// product of two embeddings is then their cosine similarity.
struct EncoderConfig {
    int input_mels = 128;
    int input_frames = 313;
    std::vector<int> widths = {16, 32, 64};
    int embed_dim = 64;

    void validate() const {
        if (input_mels < 1 || input_frames < 1) throw ConfigError("encoder input shape invalid");
        if (widths.empty()) throw ConfigError("encoder needs at least one block");
        for (int w : widths)
            if (w < 1) throw ConfigError("encoder widths must be >= 1");
        if (embed_dim < 2) throw ConfigError("encoder.dim must be >= 2");
    }

    // ceil(x/2) per stride-2 block
    static int halved(int v) { return (v + 1) / 2; }
};

namespace detail {

struct BlockDims {
    int in_c, in_h, in_w;
    int out_c, out_h, out_w;
};

inline std::vector<BlockDims> block_dims(const EncoderConfig& cfg) {
    std::vector<BlockDims> dims;
    int c = 1, h = cfg.input_mels, w = cfg.input_frames;
    for (int width : cfg.widths) {
        BlockDims d{c, h, w, width, EncoderConfig::halved(h), EncoderConfig::halved(w)};
        dims.push_back(d);
        c = width;
        h = d.out_h;
        w = d.out_w;
    }
    return dims;
}

}  // namespace detail

// Glorot-uniform weights, zero biases, deterministic per seed.
template <typename S>
Params<S> init_params(const EncoderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Params<S> params;
    Rng rng(mix_seed(seed, 0x656e636full));  // dedicated init stream

    const auto dims = detail::block_dims(cfg);
    for (std::size_t b = 0; b < dims.size(); ++b) {
        const auto& d = dims[b];
        Tensor<S> kernel({d.out_c, d.in_c, 3, 3});
        const double fan_in = static_cast<double>(d.in_c) * 9.0;
        const double fan_out = static_cast<double>(d.out_c) * 9.0;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& v : kernel.data) v = static_cast<S>(rng.uniform(-bound, bound));
        params.add("conv" + std::to_string(b) + "/kernel", std::move(kernel));
        params.add("conv" + std::to_string(b) + "/bias", Tensor<S>({d.out_c}));
    }

    const int last_c = dims.back().out_c;
    Tensor<S> proj({cfg.embed_dim, last_c});
    const double bound = std::sqrt(6.0 / (static_cast<double>(last_c) + cfg.embed_dim));
    for (auto& v : proj.data) v = static_cast<S>(rng.uniform(-bound, bound));
    params.add("proj/weight", std::move(proj));
    params.add("proj/bias", Tensor<S>({cfg.embed_dim}));
    return params;
}

// Activations kept for the backward pass.
template <typename S>
struct ForwardCache {
    Tensor<S> input;                   // [1, M, T]
    std::vector<Tensor<S>> pre_act;    // conv outputs before ReLU
    std::vector<Tensor<S>> post_act;   // after ReLU
    std::vector<S> pooled;             // [C_last]
    std::vector<S> proj_out;           // [D], before normalization
    double proj_norm = 0.0;
    std::vector<S> embedding;          // [D], unit norm
};

namespace detail {

template <typename S>
void conv3x3_s2(const S* in, int in_c, int in_h, int in_w, const S* kernel, const S* bias,
                S* out, int out_c, int out_h, int out_w) {
    for (int o = 0; o < out_c; ++o) {
        const std::size_t out_base = static_cast<std::size_t>(o) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                S acc = bias[o];
                for (int i = 0; i < in_c; ++i) {
                    const S* in_plane = in + static_cast<std::size_t>(i) * in_h * in_w;
                    const S* k = kernel + ((static_cast<std::size_t>(o) * in_c + i) * 9);
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = 2 * y + ky - 1;
                        if (iy < 0 || iy >= in_h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = 2 * x + kx - 1;
                            if (ix < 0 || ix >= in_w) continue;
                            acc += k[ky * 3 + kx] * in_plane[iy * in_w + ix];
                        }
                    }
                }
                out[out_base + static_cast<std::size_t>(y) * out_w + x] = acc;
            }
        }
    }
}

template <typename S>
void conv3x3_s2_backward(const S* in, int in_c, int in_h, int in_w, const S* kernel,
                         const S* d_out, int out_c, int out_h, int out_w, S* d_kernel,
                         S* d_bias, S* d_in) {
    for (int o = 0; o < out_c; ++o) {
        const std::size_t out_base = static_cast<std::size_t>(o) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                const S g = d_out[out_base + static_cast<std::size_t>(y) * out_w + x];
                if (g == S{0}) continue;
                d_bias[o] += g;
                for (int i = 0; i < in_c; ++i) {
                    const S* in_plane = in + static_cast<std::size_t>(i) * in_h * in_w;
                    const std::size_t k_base = (static_cast<std::size_t>(o) * in_c + i) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = 2 * y + ky - 1;
                        if (iy < 0 || iy >= in_h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = 2 * x + kx - 1;
                            if (ix < 0 || ix >= in_w) continue;
                            d_kernel[k_base + ky * 3 + kx] += g * in_plane[iy * in_w + ix];
                            if (d_in)
                                d_in[static_cast<std::size_t>(i) * in_h * in_w + iy * in_w + ix] +=
                                    g * kernel[k_base + ky * 3 + kx];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace detail

template <typename S>
Tensor<S> to_tensor(const Spectrogram& x) {
    Tensor<S> t({1, x.rows, x.cols});
    for (std::size_t i = 0; i < x.values.size(); ++i) t.data[i] = static_cast<S>(x.values[i]);
    return t;
}

// Forward pass; the cache is optional and only needed for backward().
template <typename S>
std::vector<S> encode(const EncoderConfig& cfg, const Params<S>& params, const Tensor<S>& x,
                      ForwardCache<S>* cache = nullptr) {
    cfg.validate();
    if (x.shape != std::vector<int>{1, cfg.input_mels, cfg.input_frames})
        throw ConfigError("encode: input shape does not match encoder config");

    const auto dims = detail::block_dims(cfg);
    Tensor<S> current = x;
    if (cache) {
        cache->input = x;
        cache->pre_act.clear();
        cache->post_act.clear();
    }

    for (std::size_t b = 0; b < dims.size(); ++b) {
        const auto& d = dims[b];
        const auto& kernel = params.find("conv" + std::to_string(b) + "/kernel");
        const auto& bias = params.find("conv" + std::to_string(b) + "/bias");
        Tensor<S> out({d.out_c, d.out_h, d.out_w});
        detail::conv3x3_s2(current.data.data(), d.in_c, d.in_h, d.in_w, kernel.data.data(),
                           bias.data.data(), out.data.data(), d.out_c, d.out_h, d.out_w);
        if (cache) cache->pre_act.push_back(out);
        for (auto& v : out.data) v = std::max(v, S{0});
        if (cache) cache->post_act.push_back(out);
        current = std::move(out);
    }

    const auto& last = dims.back();
    const std::size_t spatial = static_cast<std::size_t>(last.out_h) * last.out_w;
    std::vector<S> pooled(last.out_c);
    for (int c = 0; c < last.out_c; ++c) {
        double acc = 0.0;
        const S* plane = current.data.data() + static_cast<std::size_t>(c) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) acc += plane[i];
        pooled[c] = static_cast<S>(acc / static_cast<double>(spatial));
    }

    const auto& w = params.find("proj/weight");
    const auto& pb = params.find("proj/bias");
    std::vector<S> proj(cfg.embed_dim);
    for (int dgt = 0; dgt < cfg.embed_dim; ++dgt) {
        double acc = pb.data[dgt];
        const S* row = w.data.data() + static_cast<std::size_t>(dgt) * last.out_c;
        for (int c = 0; c < last.out_c; ++c) acc += static_cast<double>(row[c]) * pooled[c];
        proj[dgt] = static_cast<S>(acc);
    }

    double norm_sq = 0.0;
    for (S v : proj) norm_sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(norm_sq);
    std::vector<S> embedding(cfg.embed_dim, S{0});
    if (norm < 1e-30) {
        embedding[0] = S{1};  // degenerate all-zero projection
    } else {
        for (int i = 0; i < cfg.embed_dim; ++i)
            embedding[i] = static_cast<S>(proj[i] / norm);
    }

    if (cache) {
        cache->pooled = pooled;
        cache->proj_out = proj;
        cache->proj_norm = norm;
        cache->embedding = embedding;
    }
    return embedding;
}

template <typename S>
std::vector<S> encode(const EncoderConfig& cfg, const Params<S>& params, const Spectrogram& x,
                      ForwardCache<S>* cache = nullptr) {
    return encode(cfg, params, to_tensor<S>(x), cache);
}

// Reverse-mode gradients of upstream . embedding with respect to every
// parameter tensor, including the L2-normalization Jacobian.
template <typename S>
Params<S> backward(const EncoderConfig& cfg, const Params<S>& params,
                   const ForwardCache<S>& cache, const std::vector<S>& upstream) {
    cfg.validate();
    if (static_cast<int>(upstream.size()) != cfg.embed_dim)
        throw ConfigError("backward: upstream gradient has wrong dimension");

    Params<S> grads = Params<S>::zeros_like(params);
    const auto dims = detail::block_dims(cfg);
    const auto& last = dims.back();
    const std::size_t spatial = static_cast<std::size_t>(last.out_h) * last.out_w;

    // d/dz of upstream . (z / |z|)
    std::vector<S> d_proj(cfg.embed_dim, S{0});
    if (cache.proj_norm >= 1e-30) {
        double dot = 0.0;
        for (int i = 0; i < cfg.embed_dim; ++i)
            dot += static_cast<double>(upstream[i]) * cache.embedding[i];
        for (int i = 0; i < cfg.embed_dim; ++i)
            d_proj[i] = static_cast<S>((upstream[i] - dot * cache.embedding[i]) / cache.proj_norm);
    }

    auto& d_w = grads.find("proj/weight");
    auto& d_pb = grads.find("proj/bias");
    const auto& w = params.find("proj/weight");
    std::vector<S> d_pooled(last.out_c, S{0});
    for (int d = 0; d < cfg.embed_dim; ++d) {
        d_pb.data[d] += d_proj[d];
        for (int c = 0; c < last.out_c; ++c) {
            d_w.data[static_cast<std::size_t>(d) * last.out_c + c] += d_proj[d] * cache.pooled[c];
            d_pooled[c] += w.data[static_cast<std::size_t>(d) * last.out_c + c] * d_proj[d];
        }
    }

    Tensor<S> d_act({last.out_c, last.out_h, last.out_w});
    for (int c = 0; c < last.out_c; ++c) {
        const S g = static_cast<S>(d_pooled[c] / static_cast<double>(spatial));
        S* plane = d_act.data.data() + static_cast<std::size_t>(c) * spatial;
        for (std::size_t i = 0; i < spatial; ++i) plane[i] = g;
    }

    for (int b = static_cast<int>(dims.size()) - 1; b >= 0; --b) {
        const auto& d = dims[b];
        // ReLU mask from the cached pre-activation
        const auto& pre = cache.pre_act[b];
        for (std::size_t i = 0; i < d_act.data.size(); ++i)
            if (pre.data[i] <= S{0}) d_act.data[i] = S{0};

        const auto& kernel = params.find("conv" + std::to_string(b) + "/kernel");
        auto& d_kernel = grads.find("conv" + std::to_string(b) + "/kernel");
        auto& d_bias = grads.find("conv" + std::to_string(b) + "/bias");
        const S* in_data =
            b == 0 ? cache.input.data.data() : cache.post_act[b - 1].data.data();

        Tensor<S> d_in({d.in_c, d.in_h, d.in_w});
        detail::conv3x3_s2_backward(in_data, d.in_c, d.in_h, d.in_w, kernel.data.data(),
                                    d_act.data.data(), d.out_c, d.out_h, d.out_w,
                                    d_kernel.data.data(), d_bias.data.data(),
                                    b == 0 ? nullptr : d_in.data.data());
        d_act = std::move(d_in);
    }
    return grads;
}

}  // namespace freqcl
