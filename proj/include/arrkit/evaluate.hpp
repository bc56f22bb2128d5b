#ifndef ARRKIT_EVALUATE_HPP
#define ARRKIT_EVALUATE_HPP

#include <map>
#include <string>
#include <vector>

#include "arrkit/arrgen.hpp"

namespace arrkit {

// ============================================================================
// Z-test
// ============================================================================

struct ZTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;  // p_value < alpha
    std::size_t n_normal = 0;
    std::size_t n_fault = 0;
};

// Welch-form two-sample statistic (mean_f - mean_n)/sqrt(s_n^2/n_n +
// s_f^2/n_f) with sample variances; two-sided p from the standard normal.
// Both sequences need >= 30 samples. Equal-mean zero-variance inputs give
// statistic 0 / p 1.
ZTestResult z_test(const std::vector<double>& r_normal, const std::vector<double>& r_fault,
                   double alpha);

// ============================================================================
// Residual evaluation
// ============================================================================

// r(t) = target(t) - model(features(t)) for all valid t; length N - max_lag.
std::vector<double> residual_signal(const ResidualSpec& spec, const Dataset& ds);

// One test per residual, normal vs faulty; a fault is detectable iff any
// entry is significant. The caller slices `faulty` to post-onset samples.
std::vector<std::pair<std::string, ZTestResult>> detectability(
    const std::vector<ResidualSpec>& bank, const Dataset& normal, const Dataset& faulty,
    double alpha);

// ============================================================================
// Signature matrix / isolability
// ============================================================================

struct SignatureMatrix {
    std::vector<std::string> residuals;  // row labels (residual targets)
    std::vector<std::string> faults;     // column labels
    std::vector<std::vector<ZTestResult>> cells;  // residuals x faults

    bool sensitive(std::size_t residual, std::size_t fault) const {
        return cells[residual][fault].significant;
    }
    // Faults i, j are isolable iff some residual is sensitive to exactly one.
    bool isolable(std::size_t fault_i, std::size_t fault_j) const;
};

// Fills sensitivity entries (each fault dataset versus normal). Fault
// datasets are expected pre-sliced to post-onset samples.
SignatureMatrix isolability_matrix(const std::vector<ResidualSpec>& bank,
                                   const std::map<std::string, Dataset>& fault_datasets,
                                   const Dataset& normal, double alpha);

}  // namespace arrkit

#endif  // ARRKIT_EVALUATE_HPP
