#pragma once

#include <string>
#include <vector>

namespace freqcl {

enum class Label { normal, anomaly, unknown };

std::string to_string(Label label);
Label parse_label(const std::string& text);  // throws FormatError

struct Clip {
    std::string id;  // relative path within the dataset root
    std::vector<double> samples;
    int sample_rate = 0;
    std::string machine_type;
    std::string section;
    std::string domain = "na";  // "source" | "target" | "na"
    Label label = Label::unknown;
};

struct ManifestEntry {
    std::string path;  // relative to root, '/'-separated
    std::string machine_type;
    std::string section;
    std::string domain;
    Label label = Label::unknown;
    std::string split;  // "train" | "test", taken from the path

    std::string class_key() const { return machine_type + "/" + section; }
};

struct DatasetManifest {
    std::string root;
    std::vector<ManifestEntry> entries;  // sorted by path
    std::vector<std::string> warnings;

    std::vector<ManifestEntry> split(const std::string& name) const;
};

// Walks `<root>/<machine_type>/<split>/<section>_<domain>_<label>_<id>.wav`.
// Files that do not match the grammar are skipped with a per-file warning.
// Throws DataError if no entry survives.
DatasetManifest scan_manifest(const std::string& root);

// CSV columns: path,machine_type,section,domain,label
void write_manifest_csv(const DatasetManifest& manifest, const std::string& path);

// Pads with zeros or truncates at the end so that the clip holds exactly
// round(seconds * sample_rate) samples.
Clip fit_length(Clip clip, double seconds);

// read_wav + sample-rate check + fit_length + metadata from the entry.
// Clips whose header rate differs from expected_rate are rejected (DataError).
Clip load_clip(const std::string& root, const ManifestEntry& entry, int expected_rate,
               double seconds);

}  // namespace freqcl
