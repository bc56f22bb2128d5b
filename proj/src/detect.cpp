#include "arrkit/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arrkit {

// ============================================================================
// Thresholds and alarms
// ============================================================================

Thresholds learn_thresholds(const std::vector<double>& r_normal, int persistence) {
    if (r_normal.size() < 30)
        throw InsufficientDataError("learn_thresholds: need >= 30 samples");
    if (persistence < 1) throw ValidationError("learn_thresholds: persistence must be >= 1");

    double mean = 0.0;
    for (double v : r_normal) mean += v;
    mean /= static_cast<double>(r_normal.size());
    double var = 0.0;
    for (double v : r_normal) var += (v - mean) * (v - mean);
    var /= static_cast<double>(r_normal.size());

    Thresholds th;
    th.mean = mean;
    th.sigma = std::sqrt(var);
    th.upper = mean + 3.0 * th.sigma;
    th.lower = mean - 3.0 * th.sigma;
    th.persistence = persistence;
    return th;
}

std::vector<bool> raise_alarms(const std::vector<double>& signal, const Thresholds& th) {
    std::vector<bool> alarm(signal.size(), false);
    int streak = 0;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        if (!std::isfinite(signal[i])) throw ValidationError("raise_alarms: non-finite sample");
        streak = (signal[i] > th.upper || signal[i] < th.lower) ? streak + 1 : 0;
        alarm[i] = streak >= th.persistence;
    }
    return alarm;
}

// ============================================================================
// Detection report
// ============================================================================

DetectionReport detection_report(const std::vector<ResidualSpec>& bank, const Dataset& ds,
                                 const FaultScenario& scenario,
                                 const std::map<std::string, Thresholds>& thresholds) {
    DetectionReport report;
    if (scenario.kind != FaultKind::none) report.onset = scenario.onset;

    for (const auto& spec : bank) {
        auto th_it = thresholds.find(spec.target);
        if (th_it == thresholds.end())
            throw ValidationError("detection_report: no thresholds for residual " + spec.target);

        int max_lag = 0;
        for (const auto& f : spec.loads) max_lag = std::max(max_lag, f.lag);
        const auto signal = residual_signal(spec, ds);
        const auto alarms = raise_alarms(signal, th_it->second);

        ResidualDetection rd;
        rd.residual = spec.target;
        for (std::size_t i = 0; i < alarms.size(); ++i) {
            if (!alarms[i]) continue;
            ++rd.alarm_count;
            const double t = ds.t0 + static_cast<double>(i + static_cast<std::size_t>(max_lag)) * ds.dt;
            if (!rd.first_alarm_time) rd.first_alarm_time = t;
            if (report.onset) {
                if (t < *report.onset) ++rd.false_alarms_before_onset;
                else if (!rd.detection_delay) rd.detection_delay = t - *report.onset;
            }
        }
        const bool fired = report.onset ? rd.detection_delay.has_value()
                                        : rd.first_alarm_time.has_value();
        report.detected = report.detected || fired;
        report.residuals.push_back(std::move(rd));
    }
    return report;
}

// ============================================================================
// ROC
// ============================================================================

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw SchemaError("roc_curve: length mismatch");
    if (scores.empty()) throw InsufficientDataError("roc_curve: empty input");
    std::size_t pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw ValidationError("roc_curve: labels must be 0/1");
        pos += static_cast<std::size_t>(l);
    }
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw DegenerateDataError("roc_curve: single-class labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        // Group tied scores into one sweep point.
        const double s = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == s; ++i) {
            if (labels[order[i]]) ++tp;
            else ++fp;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                                  static_cast<double>(tp) / static_cast<double>(pos));
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& [x0, y0] = curve.points[i - 1];
        const auto& [x1, y1] = curve.points[i];
        curve.auc += 0.5 * (x1 - x0) * (y0 + y1);
    }
    return curve;
}

namespace {

// Train-set standardization keeps the Newton solver well conditioned; ROC
// output is invariant to it.
struct FeatureScaler {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static FeatureScaler fit(const Eigen::MatrixXd& X) {
        FeatureScaler s;
        s.mean = X.colwise().mean();
        s.scale = ((X.rowwise() - s.mean).array().square().colwise().mean().sqrt() + 1e-12);
        return s;
    }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
        return (X.rowwise() - mean).array().rowwise() / scale.array();
    }
};

// Classifier features are the raw sensor columns only; derived int_* columns
// stay available in the dataset so the appended residual can be evaluated.
Eigen::MatrixXd sensor_matrix(const Dataset& ds, std::size_t drop_front,
                              const std::vector<double>* residual) {
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < ds.n_vars(); ++j)
        if (ds.names[j].rfind("int_", 0) != 0) keep.push_back(j);

    const std::size_t rows = ds.n_samples() - drop_front;
    Eigen::MatrixXd X(rows, keep.size() + (residual ? 1 : 0));
    for (std::size_t j = 0; j < keep.size(); ++j)
        for (std::size_t i = 0; i < rows; ++i)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                ds.samples[keep[j]][i + drop_front];
    if (residual)
        for (std::size_t i = 0; i < rows; ++i)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(keep.size())) =
                (*residual)[i];
    return X;
}

std::vector<double> classifier_scores(const Eigen::MatrixXd& Xtr,
                                      const std::vector<int>& ytr,
                                      const Eigen::MatrixXd& Xte) {
    const FeatureScaler scaler = FeatureScaler::fit(Xtr);
    Eigen::VectorXd labels(Xtr.rows());
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        labels(i) = static_cast<double>(ytr[static_cast<std::size_t>(i)]);
    const LogisticModel model = fit_logistic(scaler.apply(Xtr), labels, {});
    const Eigen::VectorXd p = predict_proba(model, scaler.apply(Xte));
    return {p.data(), p.data() + p.size()};
}

}  // namespace

std::pair<RocCurve, RocCurve> roc_experiment(const Dataset& train_ds,
                                             const std::vector<int>& train_labels,
                                             const Dataset& test_ds,
                                             const std::vector<int>& test_labels,
                                             const std::optional<ResidualSpec>& bank_residual) {
    if (train_labels.size() != train_ds.n_samples() || test_labels.size() != test_ds.n_samples())
        throw SchemaError("roc_experiment: label/sample count mismatch");

    std::size_t lag = 0;
    std::vector<double> r_train, r_test;
    if (bank_residual) {
        int max_lag = 0;
        for (const auto& f : bank_residual->loads) max_lag = std::max(max_lag, f.lag);
        lag = static_cast<std::size_t>(max_lag);
        r_train = residual_signal(*bank_residual, train_ds);
        r_test = residual_signal(*bank_residual, test_ds);
    }
    // Both classifiers run on the lag-trimmed rows so their AUCs compare on
    // identical samples.
    const std::vector<int> ytr(train_labels.begin() + static_cast<std::ptrdiff_t>(lag),
                               train_labels.end());
    const std::vector<int> yte(test_labels.begin() + static_cast<std::ptrdiff_t>(lag),
                               test_labels.end());

    const auto scores_without = classifier_scores(sensor_matrix(train_ds, lag, nullptr), ytr,
                                                  sensor_matrix(test_ds, lag, nullptr));
    RocCurve without = roc_curve(scores_without, yte);
    if (!bank_residual) return {without, without};

    const auto scores_with = classifier_scores(sensor_matrix(train_ds, lag, &r_train), ytr,
                                               sensor_matrix(test_ds, lag, &r_test));
    return {std::move(without), roc_curve(scores_with, yte)};
}

}  // namespace arrkit
