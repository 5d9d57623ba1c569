#include "freqcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "freqcl/errors.hpp"

namespace freqcl {

void MetricConfig::validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("metric.p must be in (0, 1]");
}

namespace {

struct ClassCounts {
    std::size_t anomalies = 0;
    std::size_t normals = 0;
};

ClassCounts count_classes(const std::vector<ScoreSample>& samples) {
    ClassCounts c;
    for (const auto& s : samples) {
        if (!std::isfinite(s.score)) throw DataError("non-finite score in metric input");
        (s.is_anomaly ? c.anomalies : c.normals) += 1;
    }
    if (c.anomalies == 0 || c.normals == 0)
        throw DataError("metrics need at least one normal and one anomaly");
    return c;
}

}  // namespace

double auc(const std::vector<ScoreSample>& samples) {
    const ClassCounts counts = count_classes(samples);

    std::vector<ScoreSample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoreSample& a, const ScoreSample& b) { return a.score < b.score; });

    // Rank-sum with midranks for ties: U = R_anomaly - n_a(n_a+1)/2.
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (sorted[k].is_anomaly) rank_sum += midrank;
        i = j;
    }
    const double n_a = static_cast<double>(counts.anomalies);
    const double n_n = static_cast<double>(counts.normals);
    const double u = rank_sum - n_a * (n_a + 1.0) / 2.0;
    return u / (n_a * n_n);
}

std::vector<RocPoint> roc_points(const std::vector<ScoreSample>& samples) {
    const ClassCounts counts = count_classes(samples);

    std::vector<ScoreSample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoreSample& a, const ScoreSample& b) { return a.score > b.score; });

    std::vector<RocPoint> points;
    points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    std::size_t tp = 0, fp = 0, i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) ++j;
        for (std::size_t k = i; k < j; ++k) (sorted[k].is_anomaly ? tp : fp) += 1;
        points.push_back({sorted[i].score,
                          static_cast<double>(fp) / static_cast<double>(counts.normals),
                          static_cast<double>(tp) / static_cast<double>(counts.anomalies)});
        i = j;
    }
    return points;
}

double pauc(const std::vector<ScoreSample>& samples, const MetricConfig& cfg) {
    cfg.validate();
    const std::vector<RocPoint> points = roc_points(samples);

    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double f0 = points[i - 1].fpr, t0 = points[i - 1].tpr;
        const double f1 = points[i].fpr, t1 = points[i].tpr;
        if (f1 <= f0) continue;  // vertical step
        if (f1 <= cfg.p) {
            area += (f1 - f0) * 0.5 * (t0 + t1);
        } else if (f0 < cfg.p) {
            const double t_at_p = t0 + (t1 - t0) * (cfg.p - f0) / (f1 - f0);
            area += (cfg.p - f0) * 0.5 * (t0 + t_at_p);
            break;
        } else {
            break;
        }
    }

    if (!cfg.mcclish) return area / cfg.p;
    const double min_area = cfg.p * cfg.p / 2.0;
    return 0.5 * (1.0 + (area - min_area) / (cfg.p - min_area));
}

void write_roc_csv(const std::vector<RocPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "threshold,fpr,tpr\n";
    char buf[3][40];
    for (const auto& pt : points) {
        std::snprintf(buf[0], sizeof(buf[0]), "%.17g", pt.threshold);
        std::snprintf(buf[1], sizeof(buf[1]), "%.17g", pt.fpr);
        std::snprintf(buf[2], sizeof(buf[2]), "%.17g", pt.tpr);
        out << buf[0] << ',' << buf[1] << ',' << buf[2] << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<ScoreSample> to_samples(const std::vector<ScoredClip>& scored) {
    std::vector<ScoreSample> samples;
    samples.reserve(scored.size());
    for (const auto& s : scored) {
        if (s.label == Label::unknown) continue;
        samples.push_back({s.score, s.label == Label::anomaly});
    }
    return samples;
}

Report report(const std::vector<ScoredClip>& scored, const MetricConfig& cfg) {
    cfg.validate();
    if (scored.empty()) throw DataError("report: no scored clips");

    std::map<std::string, std::vector<ScoredClip>> by_class;
    std::size_t unknown = 0;
    for (const auto& s : scored) {
        if (s.label == Label::unknown) {
            ++unknown;
            continue;
        }
        by_class[s.class_key].push_back(s);
    }

    Report r;
    if (unknown > 0)
        r.warnings.push_back(std::to_string(unknown) + " clips with unknown label excluded");

    double auc_sum = 0.0, pauc_sum = 0.0;
    for (const auto& [key, clips] : by_class) {
        const std::vector<ScoreSample> samples = to_samples(clips);
        std::size_t anomalies = 0;
        for (const auto& s : samples) anomalies += s.is_anomaly ? 1 : 0;
        if (anomalies == 0 || anomalies == samples.size()) {
            r.warnings.push_back("class " + key + " skipped: only one label present");
            continue;
        }
        ClassMetrics cm;
        cm.class_key = key;
        cm.auc = auc(samples);
        cm.pauc = pauc(samples, cfg);
        cm.anomalies = anomalies;
        cm.normals = samples.size() - anomalies;
        auc_sum += cm.auc;
        pauc_sum += cm.pauc;
        r.classes.push_back(std::move(cm));
    }
    if (r.classes.empty()) throw DataError("report: no class had both labels");
    r.mean_auc = auc_sum / static_cast<double>(r.classes.size());
    r.mean_pauc = pauc_sum / static_cast<double>(r.classes.size());
    return r;
}

void write_report_csv(const Report& r, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "class,auc,pauc\n";
    char a[40], p[40];
    for (const auto& c : r.classes) {
        std::snprintf(a, sizeof(a), "%.17g", c.auc);
        std::snprintf(p, sizeof(p), "%.17g", c.pauc);
        out << c.class_key << ',' << a << ',' << p << '\n';
    }
    std::snprintf(a, sizeof(a), "%.17g", r.mean_auc);
    std::snprintf(p, sizeof(p), "%.17g", r.mean_pauc);
    out << "average," << a << ',' << p << '\n';
    if (!out) throw DataError("write failed: " + path);
}

std::string format_report_table(const Report& r) {
    std::size_t width = 7;  // "average"
    for (const auto& c : r.classes) width = std::max(width, c.class_key.size());

    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %8s  %8s  %7s  %9s\n", static_cast<int>(width),
                  "class", "auc", "pauc", "normals", "anomalies");
    out += line;
    for (const auto& c : r.classes) {
        std::snprintf(line, sizeof(line), "%-*s  %8.4f  %8.4f  %7zu  %9zu\n",
                      static_cast<int>(width), c.class_key.c_str(), c.auc, c.pauc, c.normals,
                      c.anomalies);
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-*s  %8.4f  %8.4f\n", static_cast<int>(width), "average",
                  r.mean_auc, r.mean_pauc);
    out += line;
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
    return out;
}

}  // namespace freqcl
