#include "arrkit/regress.hpp"

#include <cmath>

namespace arrkit {

// ============================================================================
// Least squares
// ============================================================================

LinearModel fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) throw SchemaError("fit_least_squares: X/y row mismatch");
    if (n <= p + 1) throw InsufficientDataError("fit_least_squares: rows <= cols + 1");

    Eigen::MatrixXd A(n, p + 1);
    A.leftCols(p) = X;
    A.col(p).setOnes();

    // Complete orthogonal decomposition: rank-revealing, returns the
    // minimum-norm solution when A is rank deficient.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd w = cod.solve(y);

    LinearModel m;
    m.coefficients = w.head(p);
    m.intercept = w(p);
    m.rank_deficient = cod.rank() < p + 1;
    // A constant target is reproduced exactly by the intercept column; score
    // it 1 directly, since r2_score rejects zero-variance targets.
    const double ss_tot = (y.array() - y.mean()).square().sum();
    m.train_score = ss_tot == 0.0 ? 1.0 : r2_score(y, A * w);
    return m;
}

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    if (y.size() != yhat.size()) throw SchemaError("r2_score: length mismatch");
    if (y.size() < 2) throw InsufficientDataError("r2_score: need >= 2 samples");
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    if (ss_tot == 0.0) throw DegenerateDataError("r2_score: constant target");
    const double ss_res = (y - yhat).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.coefficients.size())
        throw SchemaError("predict: feature count mismatch");
    return (X * model.coefficients).array() + model.intercept;
}

// ============================================================================
// Logistic regression
// ============================================================================

std::pair<double, Eigen::VectorXd> logistic_loss_gradient(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& labels,
    const Eigen::VectorXd& w, double l2) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (w.size() != p + 1) throw SchemaError("logistic_loss_gradient: bad parameter size");

    const Eigen::VectorXd z = (X * w.head(p)).array() + w(p);
    // log(1+e^z) - y*z, evaluated stably for large |z|
    double loss = 0.0;
    Eigen::VectorXd prob(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double zi = z(i);
        loss += (zi > 0.0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi)))
                - labels(i) * zi;
        prob(i) = 1.0 / (1.0 + std::exp(-zi));
    }
    loss /= static_cast<double>(n);
    loss += 0.5 * l2 * w.head(p).squaredNorm();

    Eigen::VectorXd grad(p + 1);
    const Eigen::VectorXd err = prob - labels;
    grad.head(p) = X.transpose() * err / static_cast<double>(n) + l2 * w.head(p);
    grad(p) = err.mean();
    return {loss, std::move(grad)};
}

LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& labels,
                           const LogisticConfig& config) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (labels.size() != n) throw SchemaError("fit_logistic: X/labels row mismatch");
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels(i) == 0.0) has0 = true;
        else if (labels(i) == 1.0) has1 = true;
        else throw ValidationError("fit_logistic: labels must be 0 or 1");
    }
    if (!has0 || !has1) throw DegenerateDataError("fit_logistic: single-class labels");
    if (!X.allFinite()) throw ValidationError("fit_logistic: non-finite features");

    Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
    auto [loss, grad] = logistic_loss_gradient(X, labels, w, config.l2);

    LogisticModel m;
    m.loss_history.push_back(loss);
    for (int it = 0; it < config.max_iters; ++it) {
        if (grad.lpNorm<Eigen::Infinity>() < config.tolerance) {
            m.converged = true;
            break;
        }
        // Newton direction on the penalized loss
        const Eigen::VectorXd z = (X * w.head(p)).array() + w(p);
        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pr = 1.0 / (1.0 + std::exp(-z(i)));
            s(i) = pr * (1.0 - pr);
        }
        Eigen::MatrixXd H(p + 1, p + 1);
        const Eigen::MatrixXd Xs = X.array().colwise() * s.array();
        H.topLeftCorner(p, p) = X.transpose() * Xs / static_cast<double>(n);
        H.topRightCorner(p, 1) = Xs.colwise().sum().transpose() / static_cast<double>(n);
        H.bottomLeftCorner(1, p) = H.topRightCorner(p, 1).transpose();
        H(p, p) = s.mean();
        H.topLeftCorner(p, p) += config.l2 * Eigen::MatrixXd::Identity(p, p);
        H.diagonal().array() += 1e-12;  // guard against exactly singular Hessian

        Eigen::VectorXd step = H.ldlt().solve(grad);

        // Damping: halve until the penalized loss decreases
        double alpha = 1.0;
        double new_loss = loss;
        Eigen::VectorXd new_grad = grad, w_new = w;
        for (int back = 0; back < 50; ++back) {
            w_new = w - alpha * step;
            std::tie(new_loss, new_grad) = logistic_loss_gradient(X, labels, w_new, config.l2);
            if (new_loss <= loss) break;
            alpha *= 0.5;
        }
        if (new_loss > loss) break;  // no descent possible, stop
        w = w_new;
        loss = new_loss;
        grad = new_grad;
        m.loss_history.push_back(loss);
        m.iterations = it + 1;
    }
    if (!m.converged && grad.lpNorm<Eigen::Infinity>() < config.tolerance) m.converged = true;

    m.weights = w.head(p);
    m.intercept = w(p);
    return m;
}

Eigen::VectorXd predict_proba(const LogisticModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.weights.size())
        throw SchemaError("predict_proba: feature count mismatch");
    const Eigen::VectorXd z = (X * model.weights).array() + model.intercept;
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace arrkit
