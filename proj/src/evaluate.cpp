#include "arrkit/evaluate.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace arrkit {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // sample variance, n-1 denominator
};

Moments moments(const std::vector<double>& x) {
    Moments m;
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("z_test: non-finite sample");
        m.mean += v;
    }
    m.mean /= static_cast<double>(x.size());
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= static_cast<double>(x.size() - 1);
    return m;
}

}  // namespace

// ============================================================================
// Z-test
// ============================================================================

ZTestResult z_test(const std::vector<double>& r_normal, const std::vector<double>& r_fault,
                   double alpha) {
    if (r_normal.size() < 30 || r_fault.size() < 30)
        throw InsufficientDataError("z_test: both samples need >= 30 values");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("z_test: alpha must be in (0,1)");

    const Moments n = moments(r_normal);
    const Moments f = moments(r_fault);

    ZTestResult r;
    r.n_normal = r_normal.size();
    r.n_fault = r_fault.size();
    const double se2 = n.var / static_cast<double>(r_normal.size()) +
                       f.var / static_cast<double>(r_fault.size());
    if (se2 == 0.0) {
        // Both variances zero: identical constants are a non-result.
        r.statistic = 0.0;
        if (f.mean != n.mean) r.statistic = f.mean > n.mean
                                                ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity();
        r.p_value = f.mean == n.mean ? 1.0 : 0.0;
    } else {
        r.statistic = (f.mean - n.mean) / std::sqrt(se2);
        r.p_value = std::erfc(std::abs(r.statistic) / std::numbers::sqrt2);
    }
    r.significant = r.p_value < alpha;
    return r;
}

// ============================================================================
// Residuals
// ============================================================================

std::vector<double> residual_signal(const ResidualSpec& spec, const Dataset& ds) {
    auto [X, y] = build_design_matrix(ds, spec.loads, spec.target);
    const Eigen::VectorXd yhat = predict(spec.model, X);
    std::vector<double> r(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i)
        r[static_cast<std::size_t>(i)] = y(i) - yhat(i);
    return r;
}

std::vector<std::pair<std::string, ZTestResult>> detectability(
    const std::vector<ResidualSpec>& bank, const Dataset& normal, const Dataset& faulty,
    double alpha) {
    std::vector<std::pair<std::string, ZTestResult>> out;
    out.reserve(bank.size());
    for (const auto& spec : bank) {
        out.emplace_back(spec.target, z_test(residual_signal(spec, normal),
                                             residual_signal(spec, faulty), alpha));
    }
    return out;
}

// ============================================================================
// Signature matrix
// ============================================================================

bool SignatureMatrix::isolable(std::size_t fault_i, std::size_t fault_j) const {
    for (std::size_t r = 0; r < residuals.size(); ++r)
        if (sensitive(r, fault_i) != sensitive(r, fault_j)) return true;
    return false;
}

SignatureMatrix isolability_matrix(const std::vector<ResidualSpec>& bank,
                                   const std::map<std::string, Dataset>& fault_datasets,
                                   const Dataset& normal, double alpha) {
    if (fault_datasets.empty()) throw ValidationError("isolability_matrix: no fault datasets");
    SignatureMatrix m;
    for (const auto& spec : bank) m.residuals.push_back(spec.target);
    for (const auto& [name, _] : fault_datasets) m.faults.push_back(name);

    m.cells.resize(bank.size());
    for (std::size_t r = 0; r < bank.size(); ++r) {
        const auto r_normal = residual_signal(bank[r], normal);
        m.cells[r].reserve(m.faults.size());
        for (const auto& [_, ds] : fault_datasets)
            m.cells[r].push_back(z_test(r_normal, residual_signal(bank[r], ds), alpha));
    }
    return m;
}

}  // namespace arrkit
