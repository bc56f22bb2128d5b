#ifndef ARRKIT_REGRESS_HPP
#define ARRKIT_REGRESS_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "arrkit/errors.hpp"
#include "arrkit/timeseries.hpp"

namespace arrkit {

// ============================================================================
// Models
// ============================================================================

struct LinearModel {
    Eigen::VectorXd coefficients;          // one per feature
    double intercept = 0.0;
    std::vector<FeatureRef> feature_schema;
    double train_score = 0.0;              // R^2 on training rows
    double valid_score = 0.0;              // R^2 on validation rows (<= 1)
    bool rank_deficient = false;           // solved via minimum-norm solution
};

struct LogisticModel {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> loss_history;  // penalized mean log-loss per iteration
};

struct LogisticConfig {
    int max_iters = 100;
    double tolerance = 1e-8;  // on the max-norm of the gradient
    double l2 = 1e-6;         // ridge on weights only, for conditioning
};

// ============================================================================
// Operations
// ============================================================================

// Minimum-norm least squares with an internally appended intercept column,
// via a rank-revealing orthogonal factorization. Requires rows > cols + 1;
// rank deficiency is flagged, not fatal. train_score is filled; valid_score
// is the caller's job.
LinearModel fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// 1 - SS_res/SS_tot. Throws DegenerateDataError when variance(y) == 0.
double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X);

// Penalized maximum likelihood by damped Newton; both classes must be
// present. Loss decreases monotonically across iterations.
LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& labels,
                           const LogisticConfig& config = {});

Eigen::VectorXd predict_proba(const LogisticModel& model, const Eigen::MatrixXd& X);

// Penalized mean log-loss and its gradient at packed parameters
// w = [weights..., intercept]; the L2 term covers weights only. Exposed so
// tests can check the analytic gradient against finite differences.
std::pair<double, Eigen::VectorXd> logistic_loss_gradient(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& labels,
    const Eigen::VectorXd& w, double l2);

}  // namespace arrkit

#endif  // ARRKIT_REGRESS_HPP
