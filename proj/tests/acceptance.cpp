// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 8 and 9 drive the installed CLI end to end on the
// synthetic corpus; everything else exercises the library directly.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "freqcl/augment.hpp"
#include "freqcl/checkpoint.hpp"
#include "freqcl/errors.hpp"
#include "freqcl/features.hpp"
#include "freqcl/metrics.hpp"
#include "freqcl/rng.hpp"
#include "freqcl/scoring.hpp"
#include "freqcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace freqcl;

namespace {

const char* kCli = FREQCL_CLI_PATH;

struct Check {
    bool ok = true;
    std::string reason;

    void expect(bool condition, const std::string& why) {
        if (!condition && ok) {
            ok = false;
            reason = why;
        }
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// ---- criterion 1: feature shape ------------------------------------------

void criterion_feature_shape(Check& c) {
    Clip clip;
    clip.sample_rate = 16000;
    clip.samples.resize(160000);
    for (std::size_t i = 0; i < clip.samples.size(); ++i)
        clip.samples[i] = 0.5 * std::sin(2.0 * kPi * 220.0 * i / 16000.0);
    const Spectrogram s = log_mel(clip, FeatureConfig{});
    c.expect(s.rows == 128, "mel rows != 128");
    c.expect(s.cols == 313, "frames != 313");
}

// ---- criterion 2: log-mixup-exp suite -------------------------------------

void criterion_mixup(Check& c) {
    Rng rng(1001);
    Spectrogram xi(4, 4), xk(4, 4);
    for (double& v : xi.values) v = rng.uniform(-5.0, 5.0);
    for (double& v : xk.values) v = rng.uniform(-5.0, 5.0);

    c.expect(log_mixup_exp(xi, xk, 0.0).values == xi.values, "lambda=0 not bitwise identity");
    c.expect(log_mixup_exp(xi, xi, 0.37).values == xi.values, "x_i == x_k not a fixed point");

    Spectrogram a(1, 1), b(1, 1);
    a.values = {0.0};
    b.values = {std::log(3.0)};
    const double mixed = log_mixup_exp(a, b, 0.25).values[0];
    c.expect(std::abs(mixed - std::log(1.5)) <= 1e-12, "ln 1.5 case off");

    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        const double va = rng.uniform(-10.0, 10.0);
        const double vb = rng.uniform(-10.0, 10.0);
        a.values = {va};
        b.values = {vb};
        const double lo = rng.uniform(0.0, 0.45);
        const double hi = lo + rng.uniform(0.01, 0.5);
        const double m_lo = log_mixup_exp(a, b, lo).values[0];
        const double m_hi = log_mixup_exp(a, b, hi).values[0];
        c.expect(m_lo >= std::min(va, vb) - 1e-12 && m_lo <= std::max(va, vb) + 1e-12,
                 "mix left the [min, max] envelope");
        if (vb > va)
            c.expect(m_hi > m_lo, "mix not strictly increasing in lambda");
        else if (vb < va)
            c.expect(m_hi < m_lo, "mix not strictly decreasing in lambda");
    }
}

// ---- criterion 3: momentum update suite ------------------------------------

void criterion_momentum(Check& c) {
    EncoderConfig cfg;
    cfg.input_mels = 8;
    cfg.input_frames = 8;
    cfg.widths = {4};
    cfg.embed_dim = 4;

    for (const double m : {0.0, 0.5, 0.99, 0.999}) {
        Params<float> theta_k = init_params<float>(cfg, 11);
        const Params<float> theta_q = init_params<float>(cfg, 12);
        const Params<float> before = theta_k;
        momentum_update(theta_k, theta_q, m);
        for (std::size_t i = 0; i < theta_k.items.size() && c.ok; ++i) {
            const auto& got = theta_k.items[i].tensor.data;
            const auto& k0 = before.items[i].tensor.data;
            const auto& q = theta_q.items[i].tensor.data;
            for (std::size_t e = 0; e < got.size(); ++e) {
                const double want =
                    m * static_cast<double>(k0[e]) + (1.0 - m) * static_cast<double>(q[e]);
                if (std::abs(got[e] - want) > 1e-7) {
                    c.expect(false, "momentum arithmetic off at m=" + std::to_string(m));
                    break;
                }
            }
        }
    }

    // theta_k must match the pure momentum recurrence while Adam runs.
    Params<float> theta_q = init_params<float>(cfg, 13);
    Params<float> theta_k = theta_q;
    Params<float> replay = theta_q;
    AdamState<float> adam = AdamState<float>::init(theta_q);
    Rng rng(14);
    for (int step = 0; step < 10; ++step) {
        Params<float> g = Params<float>::zeros_like(theta_q);
        for (auto& item : g.items)
            for (auto& v : item.tensor.data) v = static_cast<float>(rng.uniform(-0.1, 0.1));
        adam_step(theta_q, g, adam, 0.0009);
        momentum_update(theta_k, theta_q, 0.99);
        momentum_update(replay, theta_q, 0.99);
    }
    for (std::size_t i = 0; i < theta_k.items.size(); ++i)
        c.expect(theta_k.items[i].tensor.data == replay.items[i].tensor.data,
                 "theta_k was touched by something other than the momentum recurrence");
}

// ---- criterion 4: InfoNCE suite --------------------------------------------

void criterion_info_nce(Check& c) {
    for (const int n : {1, 8, 64}) {
        NegativeQueue<double> queue(n);
        for (int i = 0; i < n; ++i) queue.push(std::vector<double>{1.0, 0.0});
        const std::vector<double> q{0.3, 0.0};
        const std::vector<double> k_pos{1.0, 0.0};
        const auto r = info_nce(q, k_pos, queue, 0.07);
        c.expect(std::abs(r.loss - std::log(n + 1.0)) <= 1e-9,
                 "uniform-similarity loss != ln(n+1) at n=" + std::to_string(n));
    }

    Rng rng(15);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        const double sim_pos = rng.uniform(-1.0, 1.0);
        std::vector<double> sims(static_cast<std::size_t>(rng.uniform_int(1, 12)));
        for (double& s : sims) s = rng.uniform(-1.0, 1.0);
        const double tau = rng.uniform(0.05, 1.0);
        const double shift = rng.uniform(-3.0, 3.0);
        const double base = info_nce_loss_from_sims(sim_pos, sims, tau);
        std::vector<double> shifted = sims;
        for (double& s : shifted) s += shift;
        const double moved = info_nce_loss_from_sims(sim_pos + shift, shifted, tau);
        c.expect(std::abs(moved - base) <= 1e-9, "loss not shift-invariant");
    }

    auto random_unit = [&rng](int dim) {
        std::vector<double> v(dim);
        double norm_sq = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm_sq += x * x;
        }
        for (double& x : v) x /= std::sqrt(norm_sq);
        return v;
    };
    const double h = 1e-6;
    for (int trial = 0; trial < 20 && c.ok; ++trial) {
        NegativeQueue<double> queue(8);
        for (int i = 0; i < 8; ++i) queue.push(random_unit(6));
        const std::vector<double> k_pos = random_unit(6);
        std::vector<double> q = random_unit(6);
        const auto r = info_nce(q, k_pos, queue, 0.07);
        for (int d = 0; d < 6; ++d) {
            const double saved = q[d];
            q[d] = saved + h;
            const double plus = info_nce(q, k_pos, queue, 0.07).loss;
            q[d] = saved - h;
            const double minus = info_nce(q, k_pos, queue, 0.07).loss;
            q[d] = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            const double scale = std::max({std::abs(numeric), std::abs(r.grad_q[d]), 1e-10});
            c.expect(std::abs(numeric - r.grad_q[d]) / scale <= 1e-6,
                     "q-gradient does not match finite differences");
        }
    }
}

// ---- criterion 5: encoder gradient check -----------------------------------

void criterion_encoder_gradients(Check& c) {
    EncoderConfig cfg;
    cfg.input_mels = 8;
    cfg.input_frames = 8;
    cfg.widths = {4, 6};
    cfg.embed_dim = 4;

    Params<double> p = init_params<double>(cfg, 12);
    Rng rng(6);
    Spectrogram x(cfg.input_mels, cfg.input_frames);
    for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
    std::vector<double> upstream(cfg.embed_dim);
    for (double& v : upstream) v = rng.uniform(-1.0, 1.0);

    ForwardCache<double> cache;
    encode(cfg, p, x, &cache);
    const Params<double> grads = backward(cfg, p, cache, upstream);

    auto loss_at = [&] {
        const auto e = encode(cfg, p, x);
        double acc = 0.0;
        for (int i = 0; i < cfg.embed_dim; ++i) acc += upstream[i] * e[i];
        return acc;
    };

    const double h = 1e-5;
    for (int trial = 0; trial < 50 && c.ok; ++trial) {
        const auto ti =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(p.items.size()) - 1));
        auto& tensor = p.items[ti].tensor;
        const auto ei = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<long>(tensor.data.size()) - 1));
        const double saved = tensor.data[ei];
        tensor.data[ei] = saved + h;
        const double plus = loss_at();
        tensor.data[ei] = saved - h;
        const double minus = loss_at();
        tensor.data[ei] = saved;
        const double numeric = (plus - minus) / (2.0 * h);
        const double analytic = grads.items[ti].tensor.data[ei];
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        c.expect(std::abs(numeric - analytic) / scale <= 1e-4,
                 "encoder gradient off at " + p.items[ti].name);
    }
}

// ---- criterion 6: metric oracles -------------------------------------------

double auc_brute_force(const std::vector<ScoreSample>& samples) {
    double wins = 0.0;
    std::size_t n_a = 0, n_n = 0;
    for (const auto& a : samples) {
        if (!a.is_anomaly) continue;
        ++n_a;
        for (const auto& n : samples) {
            if (n.is_anomaly) continue;
            if (a.score > n.score)
                wins += 1.0;
            else if (a.score == n.score)
                wins += 0.5;
        }
    }
    for (const auto& n : samples) n_n += n.is_anomaly ? 0 : 1;
    return wins / (static_cast<double>(n_a) * static_cast<double>(n_n));
}

void criterion_metrics(Check& c) {
    Rng rng(16);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        std::vector<ScoreSample> samples;
        const int n = static_cast<int>(rng.uniform_int(4, 200));
        for (int i = 0; i < n; ++i)
            samples.push_back({std::floor(rng.uniform(0.0, 24.0)) / 4.0, rng.uniform() < 0.5});
        samples.push_back({0.25, true});
        samples.push_back({0.5, false});

        const double a = auc(samples);
        c.expect(std::abs(a - auc_brute_force(samples)) <= 1e-12, "auc != brute force pairs");

        const auto points = roc_points(samples);
        double trap = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i)
            trap += (points[i].fpr - points[i - 1].fpr) * 0.5 *
                    (points[i].tpr + points[i - 1].tpr);
        c.expect(std::abs(trap - a) <= 1e-12, "trapezoid of ROC != auc");
        c.expect(std::abs(pauc(samples, MetricConfig{1.0, false}) - a) <= 1e-12,
                 "pauc(p=1) != auc");
    }

    std::vector<ScoreSample> derived = {{1.0, false}, {3.0, false}, {2.0, true}, {4.0, true}};
    c.expect(auc(derived) == 0.75, "derived case auc != 0.75");
    c.expect(pauc(derived, MetricConfig{0.1, false}) == 0.5, "derived case pauc != 0.5");
}

// ---- criterion 7: augmentation safety ---------------------------------------

void criterion_augment_safety(Check& c) {
    Rng rng(17);
    Spectrogram xi(4, 4), xk(4, 4);
    for (double& v : xi.values) v = 700.0 + rng.uniform(-2.0, 2.0);
    for (double& v : xk.values) v = 700.0 + rng.uniform(-2.0, 2.0);
    const double lambda = 0.31;
    const Spectrogram mixed = log_mixup_exp(xi, xk, lambda);
    for (std::size_t i = 0; i < mixed.values.size(); ++i) {
        const double a = xi.values[i], b = xk.values[i];
        const double m = std::max(a, b);
        const double want =
            m + std::log((1.0 - lambda) * std::exp(a - m) + lambda * std::exp(b - m));
        c.expect(std::isfinite(mixed.values[i]), "overflow-range mix not finite");
        c.expect(std::abs(mixed.values[i] - want) <= 1e-9 * std::max(1.0, std::abs(want)),
                 "overflow-range mix differs from the shifted oracle");
    }

    Spectrogram x(16, 16);
    for (double& v : x.values) v = rng.uniform(-4.0, 9.0);
    const Spectrogram z = post_normalize(x);
    c.expect(std::abs(grand_mean(z)) <= 1e-6, "post_normalize mean not ~0");
    c.expect(std::abs(grand_std(z) - 1.0) <= 1e-6, "post_normalize std not ~1");

    const RrcConfig identity{1.0, 1.0, 1.0, 1.0};
    const Spectrogram cropped = random_resize_crop(x, rng, identity);
    c.expect(cropped.values == x.values, "RRC identity config not bitwise identity");
}

// ---- criteria 8 and 9: end-to-end experiment + determinism ------------------

struct E2EArtifacts {
    std::string corpus, checkpoint, train_log, scores, report;
};

void write_e2e_config(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    out << "seed = 2024\n"
           "synth.sections = 3\n"
           "synth.train_clips = 20\n"
           "synth.test_normal = 20\n"
           "synth.test_anomaly = 20\n"
           "mode = instance\n"
           "epochs = 30\n"
           "batch = 16\n"
           "encoder.widths = 8,16,32\n"
           "encoder.dim = 32\n"
           "bank.capacity = 128\n"
           "queue_n = 512\n"
           "knn.k = 1\n";
}

bool run_e2e(const fs::path& dir, const std::string& cfg_path, E2EArtifacts& art,
             std::string& why) {
    art.corpus = (dir / "corpus").string();
    art.checkpoint = (dir / "model.ckpt").string();
    art.train_log = (dir / "train_log.csv").string();
    art.scores = (dir / "scores.csv").string();
    art.report = (dir / "report.csv").string();

    if (run_cli("synth --config " + cfg_path + " --out " + art.corpus) != 0) {
        why = "synth failed";
        return false;
    }
    if (run_cli("train --config " + cfg_path + " --data " + art.corpus +
                " --out-checkpoint " + art.checkpoint + " --threads 1") != 0) {
        why = "train failed";
        return false;
    }
    if (run_cli("score --config " + cfg_path + " --data " + art.corpus + " --checkpoint " +
                art.checkpoint + " --out " + art.scores + " --k 1 --threads 1") != 0) {
        why = "score failed";
        return false;
    }
    if (run_cli("eval --scores " + art.scores + " --out-report " + art.report + " --p 0.1") !=
        0) {
        why = "eval failed";
        return false;
    }
    return true;
}

void criterion_end_to_end(Check& c, const fs::path& work, E2EArtifacts& art,
                          std::string& cfg_path) {
    fs::create_directories(work);
    cfg_path = (work / "run.cfg").string();
    write_e2e_config(cfg_path);

    std::string why;
    if (!run_e2e(work / "run1", cfg_path, art, why)) {
        c.expect(false, why);
        return;
    }

    // per-section thresholds from the report
    std::ifstream report_in(art.report);
    std::string line;
    std::getline(report_in, line);
    int sections_seen = 0;
    while (std::getline(report_in, line)) {
        std::stringstream ss(line);
        std::string cls, auc_text, pauc_text;
        std::getline(ss, cls, ',');
        std::getline(ss, auc_text, ',');
        std::getline(ss, pauc_text);
        if (cls == "average") continue;
        ++sections_seen;
        const double a = std::stod(auc_text);
        const double p = std::stod(pauc_text);
        c.expect(a >= 0.85, cls + " auc " + auc_text + " < 0.85");
        c.expect(p >= 0.55, cls + " pauc " + pauc_text + " < 0.55");
    }
    c.expect(sections_seen == 3, "report does not cover 3 sections");

    // final-epoch mean loss below the first epoch's
    std::ifstream log_in(art.train_log);
    std::getline(log_in, line);
    double first_loss = 0.0, last_loss = 0.0;
    int rows = 0;
    while (std::getline(log_in, line)) {
        std::stringstream ss(line);
        std::string epoch, loss;
        std::getline(ss, epoch, ',');
        std::getline(ss, loss, ',');
        const double v = std::stod(loss);
        if (rows == 0) first_loss = v;
        last_loss = v;
        ++rows;
    }
    c.expect(rows == 30, "train log does not have 30 epochs");
    c.expect(last_loss < first_loss, "final-epoch loss not below first-epoch loss");
}

void criterion_determinism(Check& c, const fs::path& work, const E2EArtifacts& first,
                           const std::string& cfg_path) {
    E2EArtifacts second;
    std::string why;
    if (!run_e2e(work / "run2", cfg_path, second, why)) {
        c.expect(false, why);
        return;
    }
    c.expect(slurp(first.checkpoint) == slurp(second.checkpoint),
             "checkpoints differ between reruns");
    c.expect(slurp(first.scores) == slurp(second.scores), "score CSVs differ between reruns");
    c.expect(slurp(first.report) == slurp(second.report), "reports differ between reruns");
    c.expect(!slurp(first.checkpoint).empty(), "checkpoint file empty");
}

// ---- criterion 10: checkpoint round trip ------------------------------------

void criterion_checkpoint(Check& c, const fs::path& work) {
    fs::create_directories(work);
    EncoderConfig cfg;
    cfg.input_mels = 8;
    cfg.input_frames = 8;
    cfg.widths = {4};
    cfg.embed_dim = 4;
    const Params<float> p = init_params<float>(cfg, 77);

    const fs::path path = work / "roundtrip.ckpt";
    save_checkpoint(p, path.string());
    const Params<float> loaded = load_checkpoint(path.string());
    c.expect(loaded.items.size() == p.items.size(), "tensor count changed in round trip");
    for (std::size_t i = 0; i < p.items.size() && c.ok; ++i) {
        c.expect(loaded.items[i].name == p.items[i].name, "tensor name changed");
        c.expect(loaded.items[i].tensor.data == p.items[i].tensor.data,
                 "tensor payload not bitwise equal");
    }

    const std::string bytes = slurp(path);
    auto write_bytes = [&](const std::string& b, const fs::path& where) {
        std::ofstream out(where, std::ios::binary | std::ios::trunc);
        out.write(b.data(), static_cast<std::streamsize>(b.size()));
    };

    std::string bad_magic = bytes;
    bad_magic[0] = 'Z';
    write_bytes(bad_magic, work / "bad_magic.ckpt");
    bool threw = false;
    try {
        load_checkpoint((work / "bad_magic.ckpt").string());
    } catch (const FormatError&) {
        threw = true;
    }
    c.expect(threw, "bad magic accepted");

    write_bytes(bytes.substr(0, bytes.size() - 5), work / "truncated.ckpt");
    threw = false;
    try {
        load_checkpoint((work / "truncated.ckpt").string());
    } catch (const FormatError&) {
        threw = true;
    }
    c.expect(threw, "truncated payload accepted");
}

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "freqcl_acceptance";
    fs::remove_all(work);

    struct Criterion {
        int number;
        std::string title;
        std::function<void(Check&)> fn;
    };

    E2EArtifacts e2e;
    std::string e2e_cfg;
    const std::vector<Criterion> criteria = {
        {1, "feature shape 128x313 for 10 s at 16 kHz", criterion_feature_shape},
        {2, "log-mixup-exp identity, fixed point, bounds, monotonicity", criterion_mixup},
        {3, "momentum update exactness; theta_k untouched by Adam", criterion_momentum},
        {4, "InfoNCE ln(n+1), shift invariance, gradient check", criterion_info_nce},
        {5, "encoder gradients vs central finite differences", criterion_encoder_gradients},
        {6, "AUC/pAUC against brute-force oracles", criterion_metrics},
        {7, "augmentation numeric safety", criterion_augment_safety},
        {8, "end-to-end synthetic experiment (AUC >= 0.85, pAUC >= 0.55, loss decreases)",
         [&](Check& c) { criterion_end_to_end(c, work, e2e, e2e_cfg); }},
        {9, "byte-identical rerun of the end-to-end experiment",
         [&](Check& c) { criterion_determinism(c, work, e2e, e2e_cfg); }},
        {10, "checkpoint round trip and corruption rejection",
         [&](Check& c) { criterion_checkpoint(c, work / "ckpt"); }},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Check check;
        try {
            criterion.fn(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        if (check.ok) {
            std::printf("[PASS] criterion %d: %s\n", criterion.number, criterion.title.c_str());
        } else {
            std::printf("[FAIL] criterion %d: %s -- %s\n", criterion.number,
                        criterion.title.c_str(), check.reason.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }

    fs::remove_all(work);
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
