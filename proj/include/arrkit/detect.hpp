#ifndef ARRKIT_DETECT_HPP
#define ARRKIT_DETECT_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arrkit/evaluate.hpp"
#include "arrkit/tanksim.hpp"

namespace arrkit {

// ============================================================================
// Thresholds and alarms
// ============================================================================

struct Thresholds {
    double mean = 0.0;   // \hat r_n
    double sigma = 0.0;  // population std of the normal residual
    double upper = 0.0;  // mean + 3*sigma
    double lower = 0.0;  // mean - 3*sigma
    int persistence = 3; // consecutive out-of-bounds samples per alarm
};

// Mean and population standard deviation of the normal-operation residual;
// bounds at +/- 3 sigma. Needs >= 30 samples.
Thresholds learn_thresholds(const std::vector<double>& r_normal, int persistence);

// alarm[t] true iff the signal sat outside [lower, upper] for `persistence`
// consecutive samples ending at t.
std::vector<bool> raise_alarms(const std::vector<double>& signal, const Thresholds& th);

// ============================================================================
// Detection report
// ============================================================================

struct ResidualDetection {
    std::string residual;                     // residual target name
    std::optional<double> first_alarm_time;   // seconds, any alarm
    std::optional<double> detection_delay;    // first post-onset alarm - onset
    std::size_t false_alarms_before_onset = 0;
    std::size_t alarm_count = 0;
};

struct DetectionReport {
    std::optional<double> onset;              // seconds; absent for clean runs
    std::vector<ResidualDetection> residuals;
    bool detected = false;  // some residual alarmed (post-onset when onset known)
};

// Evaluates every residual on ds, raises alarms against the per-residual
// thresholds, and measures delays relative to the scenario onset.
DetectionReport detection_report(const std::vector<ResidualSpec>& bank, const Dataset& ds,
                                 const FaultScenario& scenario,
                                 const std::map<std::string, Thresholds>& thresholds);

// ============================================================================
// ROC
// ============================================================================

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) -> (1,1)
    double auc = 0.0;
};

// Exact empirical ROC: every distinct score is a cut point, ties grouped;
// AUC by trapezoid (equals the Mann-Whitney statistic).
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// Fits two logistic classifiers on the training set — raw sensor columns,
// then sensors plus the residual signal — scores the test set and returns
// both curves as (without residual, with residual). Labels are per sample.
// Derived int_* columns are excluded from the feature set but must be
// present when the residual refers to them. Both classifiers score the
// same lag-trimmed rows so the AUCs are directly comparable.
std::pair<RocCurve, RocCurve> roc_experiment(const Dataset& train_ds,
                                             const std::vector<int>& train_labels,
                                             const Dataset& test_ds,
                                             const std::vector<int>& test_labels,
                                             const std::optional<ResidualSpec>& bank_residual);

}  // namespace arrkit

#endif  // ARRKIT_DETECT_HPP
