#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "freqcl/augment.hpp"
#include "freqcl/encoder.hpp"
#include "freqcl/features.hpp"
#include "freqcl/metrics.hpp"
#include "freqcl/synth.hpp"
#include "freqcl/trainer.hpp"

namespace freqcl {

// Merged `key = value` settings. Precedence, lowest first: built-in defaults,
// FREQCL_SEED (seed only), config file, CLI flag overrides. Unknown keys and
// out-of-range values are rejected at set() time.
class RunConfig {
  public:
    static RunConfig defaults();  // includes the FREQCL_SEED env fallback
    static RunConfig from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);  // throws ConfigError
    void load_file(const std::string& path);

    const std::string& get(const std::string& key) const;
    long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    // Sorted `key = value` lines; reparses to identical settings.
    std::string dump() const;

    // Typed views (cross-field validation happens here).
    FeatureConfig feature_config() const;
    AugmentConfig augment_config() const;
    TrainConfig train_config() const;
    EncoderConfig encoder_config() const;  // input shape derived from feature/audio keys
    SynthConfig synth_config() const;
    MetricConfig metric_config() const;

    int sample_rate() const;
    double clip_seconds() const;
    std::uint64_t seed() const;
    int knn_k() const;

    // One "key -- description" line per recognized key, for --help output.
    static std::string describe_keys();

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace freqcl
