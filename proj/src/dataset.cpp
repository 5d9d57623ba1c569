#include "freqcl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "freqcl/errors.hpp"
#include "freqcl/wav.hpp"

namespace fs = std::filesystem;

namespace freqcl {

std::string to_string(Label label) {
    switch (label) {
        case Label::normal: return "normal";
        case Label::anomaly: return "anomaly";
        case Label::unknown: return "unknown";
    }
    return "unknown";
}

Label parse_label(const std::string& text) {
    if (text == "normal") return Label::normal;
    if (text == "anomaly") return Label::anomaly;
    if (text == "unknown") return Label::unknown;
    throw FormatError("unrecognized label: " + text);
}

std::vector<ManifestEntry> DatasetManifest::split(const std::string& name) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
        if (e.split == name) out.push_back(e);
    return out;
}

namespace {

// <section>_<domain>_<label>_<id>; id may itself contain underscores.
bool parse_stem(const std::string& stem, ManifestEntry& entry, std::string& reason) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t us = stem.find('_', start);
        if (us == std::string::npos) {
            reason = "expected <section>_<domain>_<label>_<id>";
            return false;
        }
        parts.push_back(stem.substr(start, us - start));
        start = us + 1;
    }
    parts.push_back(stem.substr(start));
    for (const auto& part : parts)
        if (part.empty()) {
            reason = "empty name component";
            return false;
        }

    entry.section = parts[0];
    entry.domain = parts[1];
    if (entry.domain != "source" && entry.domain != "target" && entry.domain != "na") {
        reason = "unrecognized domain '" + entry.domain + "'";
        return false;
    }
    try {
        entry.label = parse_label(parts[2]);
    } catch (const FormatError&) {
        reason = "unrecognized label '" + parts[2] + "'";
        return false;
    }
    return true;
}

}  // namespace

DatasetManifest scan_manifest(const std::string& root) {
    if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root);

    DatasetManifest manifest;
    manifest.root = root;

    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator();
         ++it) {
        if (!it->is_regular_file() || it->path().extension() != ".wav") continue;
        const std::string rel = fs::relative(it->path(), root).generic_string();

        std::vector<std::string> components;
        std::size_t start = 0;
        while (true) {
            const std::size_t slash = rel.find('/', start);
            if (slash == std::string::npos) {
                components.push_back(rel.substr(start));
                break;
            }
            components.push_back(rel.substr(start, slash - start));
            start = slash + 1;
        }
        if (components.size() != 3) {
            manifest.warnings.push_back(rel + ": expected <machine_type>/<split>/<file>.wav");
            continue;
        }

        ManifestEntry entry;
        entry.path = rel;
        entry.machine_type = components[0];
        entry.split = components[1];
        if (entry.split != "train" && entry.split != "test") {
            manifest.warnings.push_back(rel + ": unrecognized split '" + entry.split + "'");
            continue;
        }

        std::string reason;
        const std::string stem = it->path().stem().string();
        if (!parse_stem(stem, entry, reason)) {
            manifest.warnings.push_back(rel + ": " + reason);
            continue;
        }
        if (entry.split == "train" && entry.label != Label::normal) {
            manifest.warnings.push_back(rel + ": train entries must be labeled normal");
            continue;
        }
        manifest.entries.push_back(std::move(entry));
    }

    std::sort(manifest.entries.begin(), manifest.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });

    if (manifest.entries.empty())
        throw DataError("empty dataset under " + root + " (" +
                        std::to_string(manifest.warnings.size()) + " files skipped)");
    return manifest;
}

void write_manifest_csv(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "path,machine_type,section,domain,label\n";
    for (const auto& e : manifest.entries)
        out << e.path << ',' << e.machine_type << ',' << e.section << ',' << e.domain << ','
            << to_string(e.label) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

Clip fit_length(Clip clip, double seconds) {
    if (seconds <= 0.0) throw ConfigError("clip seconds must be positive");
    const auto target = static_cast<std::size_t>(std::llround(seconds * clip.sample_rate));
    clip.samples.resize(target, 0.0);
    return clip;
}

Clip load_clip(const std::string& root, const ManifestEntry& entry, int expected_rate,
               double seconds) {
    WavData wav = read_wav((fs::path(root) / entry.path).string());
    if (wav.sample_rate != expected_rate)
        throw DataError(entry.path + ": sample rate " + std::to_string(wav.sample_rate) +
                        " != expected " + std::to_string(expected_rate) + " (no resampling)");
    Clip clip;
    clip.id = entry.path;
    clip.samples = std::move(wav.samples);
    clip.sample_rate = wav.sample_rate;
    clip.machine_type = entry.machine_type;
    clip.section = entry.section;
    clip.domain = entry.domain;
    clip.label = entry.label;
    return fit_length(std::move(clip), seconds);
}

}  // namespace freqcl
