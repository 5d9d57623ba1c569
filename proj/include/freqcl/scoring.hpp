#pragma once

#include <map>
#include <string>
#include <vector>

#include "freqcl/augment.hpp"
#include "freqcl/encoder.hpp"
#include "freqcl/features.hpp"

namespace freqcl {

// Per-class embeddings of the training (normal) clips.
struct Gallery {
    std::map<std::string, std::vector<std::vector<float>>> entries;
};

struct ScoredClip {
    std::string clip_id;
    std::string class_key;
    double score = 0.0;
    Label label = Label::unknown;
};

// Deterministic inference path: pre-normalize + post-normalize only, no
// stochastic augmentation.
std::vector<float> embed_clip(const EncoderConfig& cfg, const Params<float>& params,
                              const NormStats& stats, const Spectrogram& raw_logmel);

Gallery build_gallery(const EncoderConfig& cfg, const Params<float>& params,
                      const NormStats& stats, const std::vector<FeatureItem>& train_items,
                      int threads = 1);

// Mean cosine distance (1 - e.g) over the k nearest gallery entries;
// effective k = min(k, |gallery|). Throws DataError on an empty gallery.
double anomaly_score(const std::vector<float>& embedding,
                     const std::vector<std::vector<float>>& gallery_entries, int k);

struct ScoreResult {
    std::vector<ScoredClip> scored;
    std::vector<std::string> errors;  // per-clip failures (e.g. missing class key)
};

ScoreResult score_split(const EncoderConfig& cfg, const Params<float>& params,
                        const NormStats& stats, const Gallery& gallery,
                        const std::vector<FeatureItem>& test_items, int k, int threads = 1);

// CSV: clip_id,class_key,score,label
void write_scores_csv(const std::vector<ScoredClip>& scored, const std::string& path);
std::vector<ScoredClip> read_scores_csv(const std::string& path);

// Gallery cache in the checkpoint container with tensor names
// gallery/<class_key>/<index>.
void save_gallery(const Gallery& gallery, const std::string& path);
Gallery load_gallery(const std::string& path);

}  // namespace freqcl
