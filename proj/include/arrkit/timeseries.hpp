#ifndef ARRKIT_TIMESERIES_HPP
#define ARRKIT_TIMESERIES_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "arrkit/errors.hpp"

namespace arrkit {

// ============================================================================
// Dataset
// ============================================================================

// Uniformly sampled multivariate time series. Immutable after construction:
// all operations below return new datasets instead of mutating.
struct Dataset {
    std::vector<std::string> names;            // unique, non-empty
    std::vector<std::vector<double>> samples;  // one sequence per name, equal length
    double dt = 1.0;                           // sample interval, seconds, > 0
    double t0 = 0.0;                           // start time, seconds

    std::size_t n_samples() const { return samples.empty() ? 0 : samples.front().size(); }
    std::size_t n_vars() const { return names.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }

    bool has(const std::string& name) const;
    // Throws SchemaError for unknown names.
    std::size_t index_of(const std::string& name) const;
    const std::vector<double>& col(const std::string& name) const;

    // Enforces: N >= 2, unique non-empty names, dt > 0, all values finite.
    void validate() const;
};

// Builds a validated dataset from parallel name/sequence lists.
Dataset make_dataset(std::vector<std::string> names,
                     std::vector<std::vector<double>> samples,
                     double dt, double t0 = 0.0);

// ============================================================================
// Feature references and splits
// ============================================================================

enum class Transform { identity, integral };

// One regression feature: a dataset variable delayed by `lag` samples.
// transform==integral integrates the referenced column first and requires
// lag == 0 (integrals are normally materialized as int_<name> columns and
// then lagged like any other variable).
struct FeatureRef {
    std::string variable;
    int lag = 0;
    Transform transform = Transform::identity;

    bool operator==(const FeatureRef& o) const {
        return variable == o.variable && lag == o.lag && transform == o.transform;
    }
};

struct SplitSpec {
    double train_fraction = 0.7;  // in (0,1); split is chronological
};

// ============================================================================
// Operations
// ============================================================================

// Cumulative trapezoidal integral, output[0] = 0. Exact for constants and
// ramps. Throws DegenerateDataError for length < 2, ValidationError for
// dt <= 0.
std::vector<double> integrate(const std::vector<double>& series, double dt);

// Returns ds extended with int_<name> columns for each requested variable.
// Original columns are untouched; duplicate derived names are rejected.
Dataset add_integral_columns(const Dataset& ds, const std::vector<std::string>& variables);

// Rows are time indices t in [L, N) where L = max lag; column j holds
// feature_j at t - lag_j; the vector holds the target at t.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_design_matrix(
    const Dataset& ds, const std::vector<FeatureRef>& features, const std::string& target);

// First ceil(train_fraction * N) samples -> train, remainder -> validation.
std::pair<Dataset, Dataset> chrono_split(const Dataset& ds, const SplitSpec& spec);

// ============================================================================
// CSV I/O
// ============================================================================
//
// Format: header row, first column `time` (strictly increasing, uniform step
// within 1e-9 relative tolerance), one variable per remaining column, `.`
// decimal separator. Non-finite entries are rejected.

Dataset read_csv(const std::string& path);
void write_csv(const Dataset& ds, const std::string& path);

}  // namespace arrkit

#endif  // ARRKIT_TIMESERIES_HPP
