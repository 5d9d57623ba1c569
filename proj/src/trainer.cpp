#include "freqcl/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "freqcl/checkpoint.hpp"
#include "freqcl/parallel.hpp"

namespace freqcl {

double info_nce_loss_from_sims(double sim_pos, const std::vector<double>& sim_negs, double tau) {
    if (tau <= 0.0) throw ConfigError("tau must be positive");
    double max_logit = sim_pos / tau;
    for (double s : sim_negs) max_logit = std::max(max_logit, s / tau);
    double denom = std::exp(sim_pos / tau - max_logit);
    for (double s : sim_negs) denom += std::exp(s / tau - max_logit);
    return -(sim_pos / tau - max_logit) + std::log(denom);
}

PairMode parse_pair_mode(const std::string& text) {
    if (text == "instance") return PairMode::instance;
    if (text == "class_conditional") return PairMode::class_conditional;
    throw ConfigError("mode must be 'instance' or 'class_conditional', got '" + text + "'");
}

std::string to_string(PairMode mode) {
    return mode == PairMode::instance ? "instance" : "class_conditional";
}

void TrainConfig::validate() const {
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("m must be in [0, 1)");
    if (temperature <= 0.0) throw ConfigError("tau must be positive");
    if (queue_capacity < 1) throw ConfigError("queue_n must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("lr must be positive");
    if (batch_size < 1) throw ConfigError("batch must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

PairBatch sample_pairs(const std::vector<FeatureItem>& slice, PairMode mode,
                       const NormStats& stats, MemoryBank& bank, Rng& rng,
                       const AugmentConfig& aug, int batch_size) {
    if (slice.empty()) throw DataError("sample_pairs: empty slice");
    if (batch_size < 1) throw ConfigError("batch must be >= 1");

    PairBatch batch;
    batch.anchors.reserve(batch_size);
    batch.positives.reserve(batch_size);
    batch.class_keys.reserve(batch_size);

    for (int b = 0; b < batch_size; ++b) {
        const auto anchor_idx = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(slice.size()) - 1));
        const FeatureItem& anchor = slice[anchor_idx];

        if (mode == PairMode::instance) {
            ViewPair views = make_views(anchor.logmel, stats, bank, rng, aug);
            batch.anchors.push_back(std::move(views.a));
            batch.positives.push_back(std::move(views.b));
        } else {
            // Same class key, preferring a clip from a different domain.
            std::vector<std::size_t> other_domain, same_domain;
            for (std::size_t i = 0; i < slice.size(); ++i) {
                if (slice[i].class_key != anchor.class_key) continue;
                if (slice[i].domain != anchor.domain)
                    other_domain.push_back(i);
                else if (i != anchor_idx)
                    same_domain.push_back(i);
            }
            std::size_t pos_idx = anchor_idx;
            if (!other_domain.empty()) {
                pos_idx = other_domain[static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(other_domain.size()) - 1))];
            } else {
                ++batch.fallback_pairs;
                if (!same_domain.empty())
                    pos_idx = same_domain[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<std::int64_t>(same_domain.size()) - 1))];
            }
            batch.anchors.push_back(augment_view(anchor.logmel, stats, bank, rng, aug));
            batch.positives.push_back(augment_view(slice[pos_idx].logmel, stats, bank, rng, aug));
        }
        batch.class_keys.push_back(anchor.class_key);
    }
    return batch;
}

TrainResult train(const DatasetManifest& manifest, const FeatureConfig& feature_cfg,
                  const AugmentConfig& augment_cfg, const EncoderConfig& encoder_cfg,
                  const TrainConfig& train_cfg, int sample_rate, double clip_seconds) {
    train_cfg.validate();
    encoder_cfg.validate();

    const std::vector<FeatureItem> items = extract_features(
        manifest, "train", feature_cfg, sample_rate, clip_seconds, train_cfg.threads);

    std::vector<const Spectrogram*> raw;
    raw.reserve(items.size());
    for (const auto& it : items) raw.push_back(&it.logmel);
    const NormStats stats = fit_pre_norm(raw);

    Params<float> theta_q = init_params<float>(encoder_cfg, train_cfg.seed);
    Params<float> theta_k = theta_q;  // key encoder starts as a copy
    AdamState<float> adam = AdamState<float>::init(theta_q);
    MemoryBank bank(augment_cfg.bank_capacity);
    NegativeQueue<float> queue(static_cast<std::size_t>(train_cfg.queue_capacity));
    Rng rng(mix_seed(train_cfg.seed, 0x747261696eull));

    const int steps_per_epoch =
        static_cast<int>((items.size() + train_cfg.batch_size - 1) / train_cfg.batch_size);

    TrainResult result;
    result.stats = stats;

    for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        int loss_count = 0;
        long fallback = 0;

        for (int step = 0; step < steps_per_epoch; ++step) {
            PairBatch batch = sample_pairs(items, train_cfg.mode, stats, bank, rng, augment_cfg,
                                           train_cfg.batch_size);
            fallback += batch.fallback_pairs;
            const std::size_t batch_n = batch.anchors.size();

            // Keys come from the momentum encoder and receive no gradient.
            std::vector<std::vector<float>> keys(batch_n);
            parallel_for(batch_n, train_cfg.threads, [&](std::size_t i) {
                keys[i] = encode(encoder_cfg, theta_k, batch.positives[i]);
            });

            if (queue.size() == 0) {
                // No negatives yet: enqueue and skip the update so a -log(1)
                // no-op loss never reaches the Adam state.
                for (auto& k : keys) queue.push(std::move(k));
                ++result.skipped_steps;
                continue;
            }

            std::vector<double> losses(batch_n, 0.0);
            std::vector<Params<float>> item_grads(batch_n);
            parallel_for(batch_n, train_cfg.threads, [&](std::size_t i) {
                ForwardCache<float> cache;
                const std::vector<float> q =
                    encode(encoder_cfg, theta_q, batch.anchors[i], &cache);
                InfoNceResult<float> nce =
                    info_nce(q, keys[i], queue, train_cfg.temperature);
                losses[i] = nce.loss;
                for (auto& g : nce.grad_q) g /= static_cast<float>(batch_n);
                item_grads[i] = backward(encoder_cfg, theta_q, cache, nce.grad_q);
            });

            Params<float> grads = Params<float>::zeros_like(theta_q);
            double batch_loss = 0.0;
            for (std::size_t i = 0; i < batch_n; ++i) {
                accumulate(grads, item_grads[i]);
                batch_loss += losses[i];
            }
            batch_loss /= static_cast<double>(batch_n);
            if (!std::isfinite(batch_loss))
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                                   ", step " + std::to_string(step));

            adam_step(theta_q, grads, adam, train_cfg.learning_rate);
            momentum_update(theta_k, theta_q, train_cfg.momentum);
            for (auto& k : keys) queue.push(std::move(k));

            loss_sum += batch_loss;
            ++loss_count;
        }

        EpochStats es;
        es.epoch = epoch;
        es.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
        es.queue_fill = queue.size();
        es.fallback_pairs = fallback;
        result.log.push_back(es);
    }

    result.params = std::move(theta_q);
    return result;
}

void write_train_log_csv(const std::vector<EpochStats>& log, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "epoch,mean_loss,queue_fill,fallback_pairs\n";
    char buf[40];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.mean_loss);
        out << e.epoch << ',' << buf << ',' << e.queue_fill << ',' << e.fallback_pairs << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

void save_trained_checkpoint(const Params<float>& params, const NormStats& stats,
                             const std::string& path) {
    std::vector<NamedTensor<float>> tensors = params.items;
    Tensor<float> mean({1}), std_dev({1});
    mean.data[0] = static_cast<float>(stats.mean);
    std_dev.data[0] = static_cast<float>(stats.std);
    tensors.push_back({"norm/mean", std::move(mean)});
    tensors.push_back({"norm/std", std::move(std_dev)});
    write_tensor_file(path, tensors);
}

LoadedCheckpoint load_trained_checkpoint(const std::string& path, const EncoderConfig& cfg) {
    LoadedCheckpoint out;
    bool have_mean = false, have_std = false;
    for (auto& nt : read_tensor_file(path)) {
        if (nt.name == "norm/mean") {
            if (nt.tensor.size() != 1) throw FormatError("norm/mean must hold one value: " + path);
            out.stats.mean = nt.tensor.data[0];
            have_mean = true;
        } else if (nt.name == "norm/std") {
            if (nt.tensor.size() != 1) throw FormatError("norm/std must hold one value: " + path);
            out.stats.std = nt.tensor.data[0];
            have_std = true;
        } else {
            out.params.add(std::move(nt.name), std::move(nt.tensor));
        }
    }
    if (!have_mean || !have_std)
        throw FormatError("checkpoint is missing normalization stats: " + path);
    validate_checkpoint_shapes(out.params, cfg);
    return out;
}

}  // namespace freqcl
