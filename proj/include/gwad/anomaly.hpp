#ifndef GWAD_ANOMALY_HPP
#define GWAD_ANOMALY_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "gwad/signal.hpp"
#include "gwad/tensor.hpp"
#include "gwad/vae.hpp"

namespace gwad::anomaly {

using signal::Label;

struct EmptyErrors : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnlabeledSample : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ErrorSample {
    std::string id;
    Label label = Label::Unknown;
    double error = 0.0;  // total loss: reconstruction + KL
};

struct ThresholdSet {
    double p99 = 0.0;  // nearest-rank 99th percentile of training errors
    double max = 0.0;
};

enum class Verdict { Healthy, Anomaly };

inline const char* verdict_name(Verdict v) {
    return v == Verdict::Anomaly ? "anomaly" : "healthy";
}

struct ThresholdMetrics {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double fpr = 0.0;  // FP / (FP + TN)
    double fnr = 0.0;  // FN / (FN + TP)
};

struct DetectionReport {
    std::vector<ErrorSample> samples;
    std::vector<Verdict> verdict_p99;
    std::vector<Verdict> verdict_max;
    ThresholdMetrics metrics_p99;
    ThresholdMetrics metrics_max;
};

// Nearest-rank p99 (1-based index ceil(0.99 n), clamped) plus the maximum.
ThresholdSet compute_thresholds(const std::vector<double>& training_errors);

// Anomaly iff error is strictly greater than the threshold.
Verdict classify(double error, double threshold);

// Damage is the positive class; every sample must be labeled.
DetectionReport evaluate(const std::vector<ErrorSample>& test_errors,
                         const ThresholdSet& thresholds);

struct LatentRow {
    std::string id;
    Label label = Label::Unknown;
    std::vector<double> mu;
};

// Latent means from encode only; no sampling involved.
std::vector<LatentRow> export_latent(const vae::VaeModel& model,
                                     const std::vector<nn::Tensor>& images,
                                     const std::vector<std::string>& ids,
                                     const std::vector<Label>& labels, int batch_size = 32);

// Euclidean distance between class centroids divided by the pooled
// within-class standard deviation; 0 when a class is missing.
double centroid_separation(const std::vector<LatentRow>& rows);

// CSV emitters for the report artifacts.
void write_thresholds_csv(const std::string& path, const ThresholdSet& thresholds);
ThresholdSet read_thresholds_csv(const std::string& path);
void write_verdicts_csv(const std::string& path, const DetectionReport& report);
void write_metrics_csv(const std::string& path, const DetectionReport& report);
void write_latent_csv(const std::string& path, const std::vector<LatentRow>& rows);
void write_errors_csv(const std::string& path, const std::vector<ErrorSample>& samples);

}  // namespace gwad::anomaly

#endif  // GWAD_ANOMALY_HPP
