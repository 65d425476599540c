#include "gwad/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gwad/textio.hpp"

namespace gwad::anomaly {

ThresholdSet compute_thresholds(const std::vector<double>& training_errors) {
    if (training_errors.empty()) throw EmptyErrors("compute_thresholds: no errors given");
    for (double e : training_errors)
        if (!std::isfinite(e)) throw std::invalid_argument("compute_thresholds: non-finite error");

    std::vector<double> sorted = training_errors;
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);

    ThresholdSet t;
    t.p99 = sorted[rank - 1];
    t.max = sorted.back();
    return t;
}

Verdict classify(double error, double threshold) {
    return error > threshold ? Verdict::Anomaly : Verdict::Healthy;
}

namespace {

ThresholdMetrics tally(const std::vector<ErrorSample>& samples,
                       const std::vector<Verdict>& verdicts) {
    ThresholdMetrics m;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const bool positive = samples[i].label == Label::Damage;
        const bool flagged = verdicts[i] == Verdict::Anomaly;
        if (positive && flagged) ++m.tp;
        else if (positive && !flagged) ++m.fn;
        else if (!positive && flagged) ++m.fp;
        else ++m.tn;
    }
    const long total = m.tp + m.fp + m.tn + m.fn;
    m.accuracy = total > 0 ? static_cast<double>(m.tp + m.tn) / total : 0.0;
    m.fpr = (m.fp + m.tn) > 0 ? static_cast<double>(m.fp) / (m.fp + m.tn) : 0.0;
    m.fnr = (m.fn + m.tp) > 0 ? static_cast<double>(m.fn) / (m.fn + m.tp) : 0.0;
    return m;
}

}  // namespace

DetectionReport evaluate(const std::vector<ErrorSample>& test_errors,
                         const ThresholdSet& thresholds) {
    for (const auto& s : test_errors)
        if (s.label == Label::Unknown)
            throw UnlabeledSample("evaluate: sample '" + s.id + "' has no class label");

    DetectionReport report;
    report.samples = test_errors;
    report.verdict_p99.reserve(test_errors.size());
    report.verdict_max.reserve(test_errors.size());
    for (const auto& s : test_errors) {
        report.verdict_p99.push_back(classify(s.error, thresholds.p99));
        report.verdict_max.push_back(classify(s.error, thresholds.max));
    }
    report.metrics_p99 = tally(report.samples, report.verdict_p99);
    report.metrics_max = tally(report.samples, report.verdict_max);
    return report;
}

std::vector<LatentRow> export_latent(const vae::VaeModel& model,
                                     const std::vector<nn::Tensor>& images,
                                     const std::vector<std::string>& ids,
                                     const std::vector<Label>& labels, int batch_size) {
    if (images.size() != ids.size() || images.size() != labels.size())
        throw std::invalid_argument("export_latent: images/ids/labels sizes differ");
    const auto mus = vae::latent_mu(model, images, batch_size);
    std::vector<LatentRow> rows(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        rows[i].id = ids[i];
        rows[i].label = labels[i];
        rows[i].mu = mus[i];
    }
    return rows;
}

double centroid_separation(const std::vector<LatentRow>& rows) {
    std::vector<const LatentRow*> base, dmg;
    for (const auto& r : rows) {
        if (r.label == Label::Baseline) base.push_back(&r);
        else if (r.label == Label::Damage) dmg.push_back(&r);
    }
    if (base.empty() || dmg.empty()) return 0.0;
    const std::size_t d = rows.front().mu.size();

    auto centroid = [d](const std::vector<const LatentRow*>& group) {
        std::vector<double> c(d, 0.0);
        for (const auto* r : group)
            for (std::size_t j = 0; j < d; ++j) c[j] += r->mu[j];
        for (auto& v : c) v /= static_cast<double>(group.size());
        return c;
    };
    auto scatter = [d](const std::vector<const LatentRow*>& group,
                       const std::vector<double>& c) {
        double acc = 0.0;
        for (const auto* r : group)
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = r->mu[j] - c[j];
                acc += diff * diff;
            }
        return acc;
    };

    const auto cb = centroid(base);
    const auto cd = centroid(dmg);
    double dist2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = cb[j] - cd[j];
        dist2 += diff * diff;
    }
    const double pooled_var = (scatter(base, cb) + scatter(dmg, cd)) /
                              static_cast<double>(base.size() + dmg.size());
    const double pooled_sd = std::sqrt(pooled_var);
    if (pooled_sd == 0.0) return dist2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::sqrt(dist2) / pooled_sd;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    return os;
}

}  // namespace

void write_thresholds_csv(const std::string& path, const ThresholdSet& thresholds) {
    auto os = open_out(path);
    os << "name,value\n";
    os << "p99," << textio::format_double(thresholds.p99) << "\n";
    os << "max," << textio::format_double(thresholds.max) << "\n";
}

ThresholdSet read_thresholds_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    ThresholdSet t;
    bool have_p99 = false, have_max = false;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (textio::strip(line).empty()) continue;
        const auto cells = textio::split(line, ',');
        if (cells.size() != 2) throw std::runtime_error("malformed thresholds row in " + path);
        double v = 0.0;
        if (!textio::parse_double(cells[1], v))
            throw std::runtime_error("malformed threshold value in " + path);
        if (cells[0] == "p99") {
            t.p99 = v;
            have_p99 = true;
        } else if (cells[0] == "max") {
            t.max = v;
            have_max = true;
        }
    }
    if (!have_p99 || !have_max)
        throw std::runtime_error("thresholds file " + path + " is missing p99 or max");
    return t;
}

void write_verdicts_csv(const std::string& path, const DetectionReport& report) {
    auto os = open_out(path);
    os << "id,label,error,verdict_p99,verdict_max\n";
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
        const auto& s = report.samples[i];
        os << s.id << "," << signal::label_name(s.label) << ","
           << textio::format_double(s.error) << "," << verdict_name(report.verdict_p99[i])
           << "," << verdict_name(report.verdict_max[i]) << "\n";
    }
}

void write_metrics_csv(const std::string& path, const DetectionReport& report) {
    auto os = open_out(path);
    os << "threshold,tp,fp,tn,fn,accuracy,fpr,fnr\n";
    auto row = [&os](const char* name, const ThresholdMetrics& m) {
        os << name << "," << m.tp << "," << m.fp << "," << m.tn << "," << m.fn << ","
           << textio::format_double(m.accuracy) << "," << textio::format_double(m.fpr) << ","
           << textio::format_double(m.fnr) << "\n";
    };
    row("p99", report.metrics_p99);
    row("max", report.metrics_max);
}

void write_latent_csv(const std::string& path, const std::vector<LatentRow>& rows) {
    auto os = open_out(path);
    const std::size_t d = rows.empty() ? 2 : rows.front().mu.size();
    os << "id,label";
    for (std::size_t j = 0; j < d; ++j) os << ",mu" << (j + 1);
    os << "\n";
    for (const auto& r : rows) {
        os << r.id << "," << signal::label_name(r.label);
        for (double v : r.mu) os << "," << textio::format_double(v);
        os << "\n";
    }
}

void write_errors_csv(const std::string& path, const std::vector<ErrorSample>& samples) {
    auto os = open_out(path);
    os << "id,label,error\n";
    for (const auto& s : samples)
        os << s.id << "," << signal::label_name(s.label) << ","
           << textio::format_double(s.error) << "\n";
}

}  // namespace gwad::anomaly
