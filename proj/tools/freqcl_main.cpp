// freqcl: contrastive anomaly-sound-detection pipeline at desk scale.
// Subcommands cover corpus synthesis, training, scoring, evaluation, and
// spectrogram/ROC export. Exit codes: 0 ok, 2 usage/config, 3 data, 4 numeric.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "freqcl/checkpoint.hpp"
#include "freqcl/errors.hpp"
#include "freqcl/metrics.hpp"
#include "freqcl/run_config.hpp"
#include "freqcl/scoring.hpp"
#include "freqcl/synth.hpp"
#include "freqcl/trainer.hpp"
#include "freqcl/wav.hpp"

namespace fs = std::filesystem;
using namespace freqcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string config_path;
    std::optional<long> seed;
    std::string dump_config_path;
    int threads = 1;
};

RunConfig build_config(const CommonOpts& opts,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    RunConfig cfg = RunConfig::defaults();
    if (!opts.config_path.empty()) cfg.load_file(opts.config_path);
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
    if (!opts.dump_config_path.empty()) {
        std::ofstream out(opts.dump_config_path, std::ios::trunc);
        if (!out) throw ConfigError("cannot write config dump: " + opts.dump_config_path);
        out << cfg.dump();
    }
    return cfg;
}

void require_writable_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("output directory is not writable: " + dir);
    const fs::path probe = fs::path(dir) / ".freqcl_write_probe";
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory is not writable: " + dir);
    f.close();
    fs::remove(probe, ec);
}

void require_writable_file(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
    }
    std::ofstream f(path, std::ios::app);
    if (!f) throw ConfigError("output path is not writable: " + path);
}

std::string sanitized(const std::string& class_key) {
    std::string s = class_key;
    for (char& c : s)
        if (c == '/') c = '_';
    return s;
}

int cmd_synth(const CommonOpts& common, const std::string& out_dir) {
    const RunConfig cfg = build_config(common);
    require_writable_dir(out_dir);
    const DatasetManifest manifest = gen_corpus(cfg.synth_config(), out_dir);
    const std::string csv = (fs::path(out_dir) / "manifest.csv").string();
    write_manifest_csv(manifest, csv);
    std::cout << "wrote " << manifest.entries.size() << " clips\n";
    std::cout << "manifest: " << csv << "\n";
    return kExitOk;
}

int cmd_train(const CommonOpts& common, const std::string& data_dir,
              const std::string& checkpoint_path,
              const std::vector<std::pair<std::string, std::string>>& overrides) {
    const RunConfig cfg = build_config(common, overrides);
    require_writable_file(checkpoint_path);

    const DatasetManifest manifest = scan_manifest(data_dir);
    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";

    TrainConfig train_cfg = cfg.train_config();
    train_cfg.threads = common.threads;
    const TrainResult result = train(manifest, cfg.feature_config(), cfg.augment_config(),
                                     cfg.encoder_config(), train_cfg, cfg.sample_rate(),
                                     cfg.clip_seconds());

    save_trained_checkpoint(result.params, result.stats, checkpoint_path);
    const std::string log_path =
        (fs::path(checkpoint_path).parent_path() / "train_log.csv").string();
    write_train_log_csv(result.log, log_path.empty() ? "train_log.csv" : log_path);

    if (!result.log.empty())
        std::printf("epochs: %zu  first loss: %.6f  last loss: %.6f\n", result.log.size(),
                    result.log.front().mean_loss, result.log.back().mean_loss);
    std::cout << "checkpoint: " << checkpoint_path << "\n";
    return kExitOk;
}

int cmd_score(const CommonOpts& common, const std::string& data_dir,
              const std::string& checkpoint_path, const std::string& out_csv,
              std::optional<int> k_override, const std::string& gallery_cache) {
    const RunConfig cfg = build_config(common);
    require_writable_file(out_csv);
    const int k = k_override.value_or(cfg.knn_k());
    if (k < 1) throw ConfigError("--k must be >= 1");

    const EncoderConfig encoder_cfg = cfg.encoder_config();
    const LoadedCheckpoint ckpt = load_trained_checkpoint(checkpoint_path, encoder_cfg);

    const DatasetManifest manifest = scan_manifest(data_dir);
    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";

    Gallery gallery;
    if (!gallery_cache.empty() && fs::exists(gallery_cache)) {
        gallery = load_gallery(gallery_cache);
    } else {
        const auto train_items = extract_features(manifest, "train", cfg.feature_config(),
                                                  cfg.sample_rate(), cfg.clip_seconds(),
                                                  common.threads);
        gallery = build_gallery(encoder_cfg, ckpt.params, ckpt.stats, train_items,
                                common.threads);
        if (!gallery_cache.empty()) save_gallery(gallery, gallery_cache);
    }

    const auto test_items = extract_features(manifest, "test", cfg.feature_config(),
                                             cfg.sample_rate(), cfg.clip_seconds(),
                                             common.threads);
    const ScoreResult result =
        score_split(encoder_cfg, ckpt.params, ckpt.stats, gallery, test_items, k, common.threads);
    for (const auto& e : result.errors) std::cerr << "warning: " << e << "\n";
    write_scores_csv(result.scored, out_csv);
    std::cout << "scored " << result.scored.size() << " clips -> " << out_csv << "\n";
    return kExitOk;
}

int cmd_eval(const CommonOpts& common, const std::string& scores_path,
             const std::string& report_path, const std::string& roc_dir,
             std::optional<double> p_override, bool mcclish) {
    const RunConfig cfg = build_config(common);
    MetricConfig metric_cfg = cfg.metric_config();
    if (p_override) metric_cfg.p = *p_override;
    if (mcclish) metric_cfg.mcclish = true;
    metric_cfg.validate();

    const std::vector<ScoredClip> scored = read_scores_csv(scores_path);
    const Report r = report(scored, metric_cfg);
    std::cout << format_report_table(r);
    if (!report_path.empty()) {
        require_writable_file(report_path);
        write_report_csv(r, report_path);
        std::cout << "report: " << report_path << "\n";
    }
    if (!roc_dir.empty()) {
        require_writable_dir(roc_dir);
        std::map<std::string, std::vector<ScoredClip>> by_class;
        for (const auto& s : scored)
            if (s.label != Label::unknown) by_class[s.class_key].push_back(s);
        for (const auto& [key, clips] : by_class) {
            const auto samples = to_samples(clips);
            bool has_both = false, has_anomaly = false, has_normal = false;
            for (const auto& s : samples) (s.is_anomaly ? has_anomaly : has_normal) = true;
            has_both = has_anomaly && has_normal;
            if (!has_both) continue;
            write_roc_csv(roc_points(samples),
                          (fs::path(roc_dir) / ("roc_" + sanitized(key) + ".csv")).string());
        }
        std::cout << "roc curves: " << roc_dir << "\n";
    }
    return kExitOk;
}

int cmd_export(const CommonOpts& common, const std::string& clip_path,
               const std::string& scores_path, const std::string& format,
               const std::string& out_path) {
    const RunConfig cfg = build_config(common);
    require_writable_file(out_path);

    if (!clip_path.empty()) {
        WavData wav = read_wav(clip_path);
        Clip clip;
        clip.id = clip_path;
        clip.samples = std::move(wav.samples);
        clip.sample_rate = wav.sample_rate;
        if (clip.sample_rate != cfg.sample_rate())
            throw DataError("clip sample rate does not match audio.sample_rate");
        clip = fit_length(std::move(clip), cfg.clip_seconds());
        const Spectrogram s = log_mel(clip, cfg.feature_config());
        if (format == "pgm")
            export_spectrogram_pgm(s, out_path);
        else
            export_spectrogram_csv(s, out_path);
        std::cout << "spectrogram " << s.rows << "x" << s.cols << " -> " << out_path << "\n";
        return kExitOk;
    }

    if (format != "csv") throw ConfigError("--scores export supports --format csv only");
    const auto samples = to_samples(read_scores_csv(scores_path));
    write_roc_csv(roc_points(samples), out_path);
    std::cout << "roc points -> " << out_path << "\n";
    return kExitOk;
}

void add_common(CLI::App* cmd, CommonOpts& common, bool with_threads = true) {
    cmd->add_option("--config", common.config_path, "run config file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "override the config seed");
    cmd->add_option("--dump-config", common.dump_config_path,
                    "write the effective config to this path");
    if (with_threads)
        cmd->add_option("--threads", common.threads, "worker threads (1 = deterministic)")
            ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"freqcl: contrastive anomaly-sound-detection pipeline"};
    app.require_subcommand(1);
    app.footer("Recognized config keys:\n" + RunConfig::describe_keys());

    CommonOpts synth_common, train_common, score_common, eval_common, export_common;

    auto* synth = app.add_subcommand("synth", "generate the synthetic corpus");
    std::string synth_out;
    synth->add_option("--out", synth_out, "corpus output directory")->required();
    add_common(synth, synth_common, false);

    auto* train_cmd = app.add_subcommand("train", "train the encoder on a dataset");
    std::string train_data, train_ckpt;
    std::optional<std::string> mode_flag;
    std::optional<long> epochs_flag, batch_flag;
    train_cmd->add_option("--data", train_data, "dataset root")->required();
    train_cmd->add_option("--out-checkpoint", train_ckpt, "checkpoint output path")->required();
    train_cmd->add_option("--mode", mode_flag, "pairing mode: instance | class_conditional");
    train_cmd->add_option("--epochs", epochs_flag, "override epochs");
    train_cmd->add_option("--batch", batch_flag, "override batch size");
    add_common(train_cmd, train_common);

    auto* score = app.add_subcommand("score", "score a test split against the train gallery");
    std::string score_data, score_ckpt, score_out, score_gallery;
    std::optional<int> score_k;
    score->add_option("--data", score_data, "dataset root")->required();
    score->add_option("--checkpoint", score_ckpt, "trained checkpoint")->required();
    score->add_option("--out", score_out, "scores CSV output path")->required();
    score->add_option("--k", score_k, "neighbor count (overrides knn.k)");
    score->add_option("--gallery-cache", score_gallery,
                      "gallery cache path (loaded if present, else written)");
    add_common(score, score_common);

    auto* eval = app.add_subcommand("eval", "compute AUC/pAUC from a scores CSV");
    std::string eval_scores, eval_report, eval_roc_dir;
    std::optional<double> eval_p;
    bool eval_mcclish = false;
    eval->add_option("--scores", eval_scores, "scores CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--out-report", eval_report, "report CSV output path");
    eval->add_option("--roc-dir", eval_roc_dir, "directory for per-class ROC CSVs");
    eval->add_option("--p", eval_p, "partial-AUC FPR bound (overrides metric.p)");
    eval->add_flag("--mcclish", eval_mcclish, "McClish standardization");
    add_common(eval, eval_common, false);

    auto* exp = app.add_subcommand("export", "export a spectrogram or ROC points");
    std::string export_clip, export_scores, export_format = "csv", export_out;
    auto* clip_opt = exp->add_option("--clip", export_clip, "WAV file to featurize")
                         ->check(CLI::ExistingFile);
    auto* scores_opt =
        exp->add_option("--scores", export_scores, "scores CSV to turn into ROC points")
            ->check(CLI::ExistingFile);
    clip_opt->excludes(scores_opt);
    exp->add_option("--format", export_format, "output format: pgm | csv")
        ->check(CLI::IsMember({"pgm", "csv"}));
    exp->add_option("--out", export_out, "output path")->required();
    add_common(exp, export_common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_common, synth_out);
        if (train_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> overrides;
            if (mode_flag) overrides.emplace_back("mode", *mode_flag);
            if (epochs_flag) overrides.emplace_back("epochs", std::to_string(*epochs_flag));
            if (batch_flag) overrides.emplace_back("batch", std::to_string(*batch_flag));
            return cmd_train(train_common, train_data, train_ckpt, overrides);
        }
        if (score->parsed())
            return cmd_score(score_common, score_data, score_ckpt, score_out, score_k,
                             score_gallery);
        if (eval->parsed())
            return cmd_eval(eval_common, eval_scores, eval_report, eval_roc_dir, eval_p,
                            eval_mcclish);
        if (exp->parsed()) {
            if (export_clip.empty() && export_scores.empty())
                throw ConfigError("export needs --clip or --scores");
            return cmd_export(export_common, export_clip, export_scores, export_format,
                              export_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {  // DataError, FormatError, filesystem
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
