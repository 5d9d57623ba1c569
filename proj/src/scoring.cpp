#include "freqcl/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "freqcl/checkpoint.hpp"
#include "freqcl/parallel.hpp"

namespace freqcl {

std::vector<float> embed_clip(const EncoderConfig& cfg, const Params<float>& params,
                              const NormStats& stats, const Spectrogram& raw_logmel) {
    const Spectrogram view = post_normalize(pre_normalize(raw_logmel, stats));
    return encode(cfg, params, view);
}

Gallery build_gallery(const EncoderConfig& cfg, const Params<float>& params,
                      const NormStats& stats, const std::vector<FeatureItem>& train_items,
                      int threads) {
    if (train_items.empty()) throw DataError("build_gallery: empty train split");
    std::vector<std::vector<float>> embeddings(train_items.size());
    parallel_for(train_items.size(), threads, [&](std::size_t i) {
        embeddings[i] = embed_clip(cfg, params, stats, train_items[i].logmel);
    });
    Gallery gallery;
    for (std::size_t i = 0; i < train_items.size(); ++i)
        gallery.entries[train_items[i].class_key].push_back(std::move(embeddings[i]));
    return gallery;
}

double anomaly_score(const std::vector<float>& embedding,
                     const std::vector<std::vector<float>>& gallery_entries, int k) {
    if (gallery_entries.empty()) throw DataError("anomaly_score: empty gallery");
    if (k < 1) throw ConfigError("k must be >= 1");

    std::vector<double> distances;
    distances.reserve(gallery_entries.size());
    for (const auto& g : gallery_entries) {
        double dot = 0.0;
        for (std::size_t d = 0; d < embedding.size(); ++d)
            dot += static_cast<double>(embedding[d]) * static_cast<double>(g[d]);
        distances.push_back(1.0 - dot);
    }
    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                    distances.size());
    std::partial_sort(distances.begin(), distances.begin() + k_eff, distances.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < k_eff; ++i) acc += distances[i];
    return std::max(acc / static_cast<double>(k_eff), 0.0);
}

ScoreResult score_split(const EncoderConfig& cfg, const Params<float>& params,
                        const NormStats& stats, const Gallery& gallery,
                        const std::vector<FeatureItem>& test_items, int k, int threads) {
    ScoreResult result;
    std::vector<std::vector<float>> embeddings(test_items.size());
    parallel_for(test_items.size(), threads, [&](std::size_t i) {
        embeddings[i] = embed_clip(cfg, params, stats, test_items[i].logmel);
    });
    for (std::size_t i = 0; i < test_items.size(); ++i) {
        const auto& item = test_items[i];
        const auto it = gallery.entries.find(item.class_key);
        if (it == gallery.entries.end()) {
            result.errors.push_back(item.clip_id + ": no gallery for class " + item.class_key);
            continue;
        }
        result.scored.push_back(
            {item.clip_id, item.class_key, anomaly_score(embeddings[i], it->second, k),
             item.label});
    }
    return result;
}

void write_scores_csv(const std::vector<ScoredClip>& scored, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "clip_id,class_key,score,label\n";
    char buf[40];
    for (const auto& s : scored) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.score);
        out << s.clip_id << ',' << s.class_key << ',' << buf << ',' << to_string(s.label) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<ScoredClip> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scores file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "clip_id,class_key,score,label")
        throw FormatError("bad scores CSV header: " + path);
    std::vector<ScoredClip> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, key, score_text, label_text;
        if (!std::getline(ss, id, ',') || !std::getline(ss, key, ',') ||
            !std::getline(ss, score_text, ',') || !std::getline(ss, label_text))
            throw FormatError("bad scores CSV row: " + line);
        ScoredClip s;
        s.clip_id = id;
        s.class_key = key;
        try {
            s.score = std::stod(score_text);
        } catch (const std::exception&) {
            throw FormatError("bad score value in row: " + line);
        }
        s.label = parse_label(label_text);
        out.push_back(std::move(s));
    }
    return out;
}

void save_gallery(const Gallery& gallery, const std::string& path) {
    std::vector<NamedTensor<float>> tensors;
    for (const auto& [key, embeddings] : gallery.entries) {
        for (std::size_t i = 0; i < embeddings.size(); ++i) {
            Tensor<float> t({static_cast<int>(embeddings[i].size())});
            t.data = embeddings[i];
            tensors.push_back({"gallery/" + key + "/" + std::to_string(i), std::move(t)});
        }
    }
    write_tensor_file(path, tensors);
}

Gallery load_gallery(const std::string& path) {
    Gallery gallery;
    for (auto& nt : read_tensor_file(path)) {
        if (nt.name.rfind("gallery/", 0) != 0)
            throw FormatError("unexpected tensor in gallery cache: " + nt.name);
        const std::size_t last_slash = nt.name.rfind('/');
        const std::string key = nt.name.substr(8, last_slash - 8);
        if (key.empty()) throw FormatError("bad gallery tensor name: " + nt.name);
        gallery.entries[key].push_back(std::move(nt.tensor.data));
    }
    return gallery;
}

}  // namespace freqcl
