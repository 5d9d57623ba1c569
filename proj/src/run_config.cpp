#include "freqcl/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "freqcl/errors.hpp"

namespace freqcl {

namespace {

enum class KeyType { integer, real, boolean, text };

struct KeySpec {
    const char* key;
    KeyType type;
    const char* default_value;
    const char* doc;
};

// All recognized run-config keys. Defaults mirror the struct defaults.
const KeySpec kKeys[] = {
    {"seed", KeyType::integer, "0", "master RNG seed (FREQCL_SEED env is the lowest-precedence source)"},
    {"audio.sample_rate", KeyType::integer, "16000", "expected WAV sample rate; other rates are rejected"},
    {"audio.clip_seconds", KeyType::real, "10", "fixed clip length; shorter clips are zero-padded, longer truncated"},
    {"feature.frame", KeyType::integer, "1024", "STFT frame size"},
    {"feature.hop", KeyType::integer, "512", "STFT hop"},
    {"feature.mels", KeyType::integer, "128", "mel band count"},
    {"feature.fmin", KeyType::real, "0", "mel filterbank lower edge, Hz"},
    {"feature.fmax", KeyType::real, "8000", "mel filterbank upper edge, Hz"},
    {"feature.log_floor", KeyType::real, "1e-10", "power floor before the log"},
    {"mixup.alpha", KeyType::real, "0.4", "mixing-ratio upper bound for log-mixup-exp"},
    {"bank.capacity", KeyType::integer, "512", "memory bank FIFO capacity"},
    {"rrc.scale_lo", KeyType::real, "0.6", "random-resize-crop area fraction, lower"},
    {"rrc.scale_hi", KeyType::real, "1.0", "random-resize-crop area fraction, upper"},
    {"rrc.aspect_lo", KeyType::real, "0.75", "random-resize-crop aspect multiplier, lower"},
    {"rrc.aspect_hi", KeyType::real, "1.3333333333333333", "random-resize-crop aspect multiplier, upper"},
    {"mode", KeyType::text, "instance", "pairing mode: instance | class_conditional"},
    {"m", KeyType::real, "0.99", "momentum coefficient for the key encoder"},
    {"tau", KeyType::real, "0.07", "InfoNCE temperature"},
    {"queue_n", KeyType::integer, "1024", "negative key queue length"},
    {"lr", KeyType::real, "0.0009", "Adam learning rate"},
    {"batch", KeyType::integer, "32", "batch size"},
    {"epochs", KeyType::integer, "150", "training epochs"},
    {"encoder.widths", KeyType::text, "16,32,64", "conv block widths, comma-separated"},
    {"encoder.dim", KeyType::integer, "64", "embedding dimension"},
    {"knn.k", KeyType::integer, "1", "neighbor count for anomaly scoring"},
    {"metric.p", KeyType::real, "0.1", "partial-AUC FPR bound"},
    {"metric.mcclish", KeyType::boolean, "false", "McClish standardization of pAUC"},
    {"synth.sections", KeyType::integer, "3", "synthetic corpus section count"},
    {"synth.train_clips", KeyType::integer, "20", "training clips per section"},
    {"synth.test_normal", KeyType::integer, "10", "normal test clips per section"},
    {"synth.test_anomaly", KeyType::integer, "10", "anomaly test clips per section"},
    {"synth.harmonics", KeyType::integer, "6", "harmonics per normal clip"},
    {"synth.noise_level", KeyType::real, "0.05", "low-passed noise level"},
    {"synth.burst_lo", KeyType::real, "4000", "anomaly burst band lower edge, Hz"},
    {"synth.burst_hi", KeyType::real, "7000", "anomaly burst band upper edge, Hz"},
    {"synth.bursts_min", KeyType::integer, "16", "min bursts per anomaly clip"},
    {"synth.bursts_max", KeyType::integer, "32", "max bursts per anomaly clip"},
    {"synth.domains", KeyType::boolean, "true", "emit source/target domains (different noise levels)"},
};

const KeySpec* find_spec(const std::string& key) {
    for (const auto& spec : kKeys)
        if (key == spec.key) return &spec;
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    for (const auto& spec : kKeys) cfg.values_[spec.key] = spec.default_value;
    if (const char* env = std::getenv("FREQCL_SEED")) cfg.set("seed", env);
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    RunConfig cfg = defaults();
    cfg.load_file(path);
    return cfg;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const KeySpec* spec = find_spec(key);
    if (!spec) throw ConfigError("unknown config key '" + key + "'");
    switch (spec->type) {
        case KeyType::integer: parse_int(key, value); break;
        case KeyType::real: parse_double(key, value); break;
        case KeyType::boolean: parse_bool(key, value); break;
        case KeyType::text: break;
    }
    if (key == "mode") parse_pair_mode(value);
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

long RunConfig::get_int(const std::string& key) const { return parse_int(key, get(key)); }
double RunConfig::get_double(const std::string& key) const { return parse_double(key, get(key)); }
bool RunConfig::get_bool(const std::string& key) const { return parse_bool(key, get(key)); }

std::string RunConfig::dump() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
    return out;
}

FeatureConfig RunConfig::feature_config() const {
    FeatureConfig cfg;
    cfg.frame = static_cast<int>(get_int("feature.frame"));
    cfg.hop = static_cast<int>(get_int("feature.hop"));
    cfg.mels = static_cast<int>(get_int("feature.mels"));
    cfg.fmin = get_double("feature.fmin");
    cfg.fmax = get_double("feature.fmax");
    cfg.log_floor = get_double("feature.log_floor");
    cfg.validate(sample_rate());
    return cfg;
}

AugmentConfig RunConfig::augment_config() const {
    AugmentConfig cfg;
    cfg.mixup.alpha = get_double("mixup.alpha");
    cfg.rrc.scale_lo = get_double("rrc.scale_lo");
    cfg.rrc.scale_hi = get_double("rrc.scale_hi");
    cfg.rrc.aspect_lo = get_double("rrc.aspect_lo");
    cfg.rrc.aspect_hi = get_double("rrc.aspect_hi");
    const long capacity = get_int("bank.capacity");
    if (capacity < 1) throw ConfigError("bank.capacity must be >= 1");
    cfg.bank_capacity = static_cast<std::size_t>(capacity);
    cfg.mixup.validate();
    cfg.rrc.validate();
    return cfg;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig cfg;
    cfg.mode = parse_pair_mode(get("mode"));
    cfg.momentum = get_double("m");
    cfg.temperature = get_double("tau");
    cfg.queue_capacity = static_cast<int>(get_int("queue_n"));
    cfg.learning_rate = get_double("lr");
    cfg.batch_size = static_cast<int>(get_int("batch"));
    cfg.epochs = static_cast<int>(get_int("epochs"));
    cfg.seed = seed();
    cfg.validate();
    return cfg;
}

EncoderConfig RunConfig::encoder_config() const {
    EncoderConfig cfg;
    const FeatureConfig feat = feature_config();
    cfg.input_mels = feat.mels;
    const auto clip_len = static_cast<long>(std::llround(clip_seconds() * sample_rate()));
    cfg.input_frames = 1 + static_cast<int>(clip_len / feat.hop);
    cfg.widths.clear();
    std::stringstream ss(get("encoder.widths"));
    std::string token;
    while (std::getline(ss, token, ',')) {
        const std::string t = trim(token);
        if (t.empty()) throw ConfigError("encoder.widths has an empty entry");
        cfg.widths.push_back(static_cast<int>(parse_int("encoder.widths", t)));
    }
    cfg.embed_dim = static_cast<int>(get_int("encoder.dim"));
    cfg.validate();
    return cfg;
}

SynthConfig RunConfig::synth_config() const {
    SynthConfig cfg;
    cfg.sections = static_cast<int>(get_int("synth.sections"));
    cfg.train_clips = static_cast<int>(get_int("synth.train_clips"));
    cfg.test_normal = static_cast<int>(get_int("synth.test_normal"));
    cfg.test_anomaly = static_cast<int>(get_int("synth.test_anomaly"));
    cfg.harmonics = static_cast<int>(get_int("synth.harmonics"));
    cfg.noise_level = get_double("synth.noise_level");
    cfg.burst_lo = get_double("synth.burst_lo");
    cfg.burst_hi = get_double("synth.burst_hi");
    cfg.bursts_min = static_cast<int>(get_int("synth.bursts_min"));
    cfg.bursts_max = static_cast<int>(get_int("synth.bursts_max"));
    cfg.two_domains = get_bool("synth.domains");
    cfg.sample_rate = sample_rate();
    cfg.clip_seconds = clip_seconds();
    cfg.seed = seed();
    cfg.validate();
    return cfg;
}

MetricConfig RunConfig::metric_config() const {
    MetricConfig cfg;
    cfg.p = get_double("metric.p");
    cfg.mcclish = get_bool("metric.mcclish");
    cfg.validate();
    return cfg;
}

int RunConfig::sample_rate() const {
    const long rate = get_int("audio.sample_rate");
    if (rate < 1) throw ConfigError("audio.sample_rate must be positive");
    return static_cast<int>(rate);
}

double RunConfig::clip_seconds() const {
    const double seconds = get_double("audio.clip_seconds");
    if (seconds <= 0.0) throw ConfigError("audio.clip_seconds must be positive");
    return seconds;
}

std::uint64_t RunConfig::seed() const {
    return static_cast<std::uint64_t>(get_int("seed"));
}

int RunConfig::knn_k() const {
    const long k = get_int("knn.k");
    if (k < 1) throw ConfigError("knn.k must be >= 1");
    return static_cast<int>(k);
}

std::string RunConfig::describe_keys() {
    std::string out;
    for (const auto& spec : kKeys) {
        out += "  ";
        out += spec.key;
        out += " (default ";
        out += spec.default_value;
        out += ") -- ";
        out += spec.doc;
        out += "\n";
    }
    return out;
}

}  // namespace freqcl
