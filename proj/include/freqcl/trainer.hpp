#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "freqcl/augment.hpp"
#include "freqcl/dataset.hpp"
#include "freqcl/encoder.hpp"
#include "freqcl/features.hpp"
#include "freqcl/tensor.hpp"

namespace freqcl {

// FIFO of past key embeddings serving as negatives. Keys are stored as
// pushed and never re-encoded.
template <typename S>
class NegativeQueue {
  public:
    explicit NegativeQueue(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ConfigError("queue_n must be >= 1");
    }

    std::size_t size() const { return keys_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::vector<S>& key(std::size_t i) const { return keys_[i]; }

    void push(std::vector<S> key) {
        double norm_sq = 0.0;
        for (S v : key) norm_sq += static_cast<double>(v) * static_cast<double>(v);
        if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-6)
            throw NumericError("negative queue key is not unit-norm");
        keys_.push_back(std::move(key));
        while (keys_.size() > capacity_) keys_.pop_front();
    }

  private:
    std::size_t capacity_;
    std::deque<std::vector<S>> keys_;
};

// Loss from raw similarity values; the positive is part of the denominator.
double info_nce_loss_from_sims(double sim_pos, const std::vector<double>& sim_negs, double tau);

template <typename S>
struct InfoNceResult {
    double loss = 0.0;
    std::vector<S> grad_q;       // d loss / d q
    std::vector<S> grad_k_pos;   // d loss / d k_pos (discarded by the trainer)
};

template <typename S>
InfoNceResult<S> info_nce(const std::vector<S>& q, const std::vector<S>& k_pos,
                          const NegativeQueue<S>& queue, double tau) {
    if (tau <= 0.0) throw ConfigError("tau must be positive");
    if (q.size() != k_pos.size()) throw ConfigError("info_nce: dimension mismatch");

    const std::size_t n = queue.size();
    auto dot = [&](const std::vector<S>& a, const std::vector<S>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        return acc;
    };

    const double sim_pos = dot(q, k_pos);
    std::vector<double> sims(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (queue.key(i).size() != q.size()) throw ConfigError("info_nce: key dimension mismatch");
        sims[i] = dot(q, queue.key(i));
    }

    // softmax over {positive} U queue, shift-stabilized
    double max_logit = sim_pos / tau;
    for (double s : sims) max_logit = std::max(max_logit, s / tau);
    double denom = std::exp(sim_pos / tau - max_logit);
    for (double s : sims) denom += std::exp(s / tau - max_logit);

    InfoNceResult<S> out;
    out.loss = -(sim_pos / tau - max_logit) + std::log(denom);

    const double p_pos = std::exp(sim_pos / tau - max_logit) / denom;
    std::vector<double> grad_q(q.size(), 0.0);
    for (std::size_t d = 0; d < q.size(); ++d)
        grad_q[d] = (p_pos - 1.0) * static_cast<double>(k_pos[d]) / tau;
    for (std::size_t i = 0; i < n; ++i) {
        const double p_i = std::exp(sims[i] / tau - max_logit) / denom;
        const auto& k = queue.key(i);
        for (std::size_t d = 0; d < q.size(); ++d)
            grad_q[d] += p_i * static_cast<double>(k[d]) / tau;
    }

    out.grad_q.resize(q.size());
    out.grad_k_pos.resize(q.size());
    for (std::size_t d = 0; d < q.size(); ++d) {
        out.grad_q[d] = static_cast<S>(grad_q[d]);
        out.grad_k_pos[d] = static_cast<S>((p_pos - 1.0) * static_cast<double>(q[d]) / tau);
    }
    return out;
}

// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise.
template <typename S>
void momentum_update(Params<S>& theta_k, const Params<S>& theta_q, double m) {
    if (!(m >= 0.0 && m < 1.0)) throw ConfigError("momentum m must be in [0, 1)");
    if (!theta_k.same_layout(theta_q)) throw ConfigError("momentum_update: layout mismatch");
    const S mm = static_cast<S>(m);
    const S one_minus = static_cast<S>(1.0 - m);
    for (std::size_t i = 0; i < theta_k.items.size(); ++i) {
        auto& dst = theta_k.items[i].tensor.data;
        const auto& src = theta_q.items[i].tensor.data;
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] = mm * dst[e] + one_minus * src[e];
    }
}

template <typename S>
struct AdamState {
    Params<S> m;
    Params<S> v;
    long t = 0;

    static AdamState init(const Params<S>& ref) {
        return AdamState{Params<S>::zeros_like(ref), Params<S>::zeros_like(ref), 0};
    }
};

// Standard Adam with bias correction. Throws NumericError naming the tensor
// if a gradient is non-finite.
template <typename S>
void adam_step(Params<S>& params, const Params<S>& grads, AdamState<S>& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (!params.same_layout(grads)) throw ConfigError("adam_step: layout mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.items.size(); ++i) {
        auto& p = params.items[i].tensor.data;
        const auto& g = grads.items[i].tensor.data;
        auto& m = state.m.items[i].tensor.data;
        auto& v = state.v.items[i].tensor.data;
        for (std::size_t e = 0; e < p.size(); ++e) {
            const double ge = static_cast<double>(g[e]);
            if (!std::isfinite(ge))
                throw NumericError("non-finite gradient in tensor " + params.items[i].name);
            const double me = beta1 * static_cast<double>(m[e]) + (1.0 - beta1) * ge;
            const double ve = beta2 * static_cast<double>(v[e]) + (1.0 - beta2) * ge * ge;
            m[e] = static_cast<S>(me);
            v[e] = static_cast<S>(ve);
            const double m_hat = me / bc1;
            const double v_hat = ve / bc2;
            p[e] = static_cast<S>(static_cast<double>(p[e]) -
                                  lr * m_hat / (std::sqrt(v_hat) + eps));
        }
    }
}

enum class PairMode { instance, class_conditional };

PairMode parse_pair_mode(const std::string& text);  // throws ConfigError
std::string to_string(PairMode mode);

struct TrainConfig {
    PairMode mode = PairMode::instance;
    double momentum = 0.99;
    double temperature = 0.07;
    int queue_capacity = 1024;
    double learning_rate = 0.0009;
    int batch_size = 32;
    int epochs = 150;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

struct PairBatch {
    std::vector<Spectrogram> anchors;
    std::vector<Spectrogram> positives;
    std::vector<std::string> class_keys;
    int fallback_pairs = 0;  // positives that had to reuse the anchor's domain
};

// Draws batch_size anchors uniformly from the slice and builds augmented
// anchor/positive views. In instance mode both views come from the anchor
// clip; in class_conditional mode the positive comes from a same-class clip,
// preferring a different domain when one exists.
PairBatch sample_pairs(const std::vector<FeatureItem>& slice, PairMode mode,
                       const NormStats& stats, MemoryBank& bank, Rng& rng,
                       const AugmentConfig& aug, int batch_size);

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    std::size_t queue_fill = 0;
    long fallback_pairs = 0;
};

struct TrainResult {
    Params<float> params;  // final theta_q
    NormStats stats;
    std::vector<EpochStats> log;
    long skipped_steps = 0;  // steps skipped while the queue was empty
};

// Full training loop over the manifest's train split. The key encoder is
// updated only through momentum_update; its keys enter the negative queue
// after each step.
TrainResult train(const DatasetManifest& manifest, const FeatureConfig& feature_cfg,
                  const AugmentConfig& augment_cfg, const EncoderConfig& encoder_cfg,
                  const TrainConfig& train_cfg, int sample_rate, double clip_seconds);

// CSV: epoch,mean_loss,queue_fill,fallback_pairs
void write_train_log_csv(const std::vector<EpochStats>& log, const std::string& path);

// Checkpoint with the encoder tensors plus norm/mean and norm/std.
void save_trained_checkpoint(const Params<float>& params, const NormStats& stats,
                             const std::string& path);
struct LoadedCheckpoint {
    Params<float> params;
    NormStats stats;
};
LoadedCheckpoint load_trained_checkpoint(const std::string& path, const EncoderConfig& cfg);

}  // namespace freqcl
