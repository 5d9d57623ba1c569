#pragma once

#include <string>
#include <vector>

#include "freqcl/scoring.hpp"

namespace freqcl {

struct ScoreSample {
    double score = 0.0;
    bool is_anomaly = false;
};

struct MetricConfig {
    double p = 0.1;        // partial-FPR bound in (0, 1]
    bool mcclish = false;  // McClish standardization of the partial area
    void validate() const;
};

// Mann-Whitney AUC with the 0.5-tie convention. Throws DataError when either
// class is missing.
double auc(const std::vector<ScoreSample>& samples);

struct RocPoint {
    double threshold = 0.0;  // first point carries +infinity
    double fpr = 0.0;
    double tpr = 0.0;
};

// Empirical ROC from (0,0) to (1,1), thresholds descending, tied scores
// grouped into single diagonal steps. Trapezoidal area equals auc().
std::vector<RocPoint> roc_points(const std::vector<ScoreSample>& samples);

// Raw mode: (1/p) * integral of TPR over FPR in [0, p] along the empirical
// curve. McClish mode maps the raw area A to 0.5 * (1 + (A - p^2/2)/(p - p^2/2)).
double pauc(const std::vector<ScoreSample>& samples, const MetricConfig& cfg);

// CSV: threshold,fpr,tpr
void write_roc_csv(const std::vector<RocPoint>& points, const std::string& path);

struct ClassMetrics {
    std::string class_key;
    double auc = 0.0;
    double pauc = 0.0;
    std::size_t normals = 0;
    std::size_t anomalies = 0;
};

struct Report {
    std::vector<ClassMetrics> classes;
    double mean_auc = 0.0;   // unweighted arithmetic mean over scored classes
    double mean_pauc = 0.0;
    std::vector<std::string> warnings;  // skipped single-label classes etc.
};

Report report(const std::vector<ScoredClip>& scored, const MetricConfig& cfg);

// CSV: class,auc,pauc (plus a final "average" row)
void write_report_csv(const Report& r, const std::string& path);
std::string format_report_table(const Report& r);

std::vector<ScoreSample> to_samples(const std::vector<ScoredClip>& scored);

}  // namespace freqcl
