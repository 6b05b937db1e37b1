#ifndef DETO_SRC_HYPER_OPT_HPP
#define DETO_SRC_HYPER_OPT_HPP

#include <functional>
#include <limits>

#include <Eigen/Core>

namespace deto::detail {

// Objective for hyperparameter search. Returns the value at theta and, when
// grad is non-null, fills the analytic gradient. May return -inf for
// infeasible points (e.g. covariance factorization failure).
using HyperObjective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct AscentResult {
    Eigen::VectorXd theta;
    double value = -std::numeric_limits<double>::infinity();
};

inline Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

// Projected gradient ascent in a box with a spectral (Barzilai-Borwein) step
// size and a monotone Armijo backtracking line search. Stops when the
// projected gradient inf-norm falls below grad_tol, when accepted steps stop
// moving the objective, when no improving step exists, or at max_iters.
inline AscentResult ascend(const HyperObjective& f, Eigen::VectorXd theta,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           int max_iters, double grad_tol) {
    theta = clamp_to(theta, lo, hi);
    Eigen::VectorXd grad(theta.size());
    double value = f(theta, &grad);
    if (!std::isfinite(value)) return {theta, value};

    const double span = std::max((hi - lo).norm(), 1e-8);
    Eigen::VectorXd prev_theta, prev_grad;
    // Spectral steps make irregular per-iteration progress; stagnation is
    // judged over a window instead of per step.
    constexpr int kWindow = 10;
    std::vector<double> history;
    history.push_back(value);

    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd pg = grad;
        for (int i = 0; i < theta.size(); ++i) {
            if ((theta[i] >= hi[i] && pg[i] > 0.0) || (theta[i] <= lo[i] && pg[i] < 0.0))
                pg[i] = 0.0;
        }
        const double gnorm = pg.norm();
        if (pg.cwiseAbs().maxCoeff() < grad_tol) break;

        // Spectral step; falls back to a span-relative step when the
        // curvature estimate is unusable (first iteration, non-concave bit).
        double alpha = 0.1 * span / gnorm;
        if (prev_theta.size() > 0) {
            const Eigen::VectorXd dtheta = theta - prev_theta;
            const Eigen::VectorXd dgrad = grad - prev_grad;
            const double curvature = dtheta.dot(dgrad);
            if (curvature < 0.0) alpha = dtheta.squaredNorm() / (-curvature);
            alpha = std::min(alpha, 10.0 * span / gnorm);
        }

        prev_theta = theta;
        prev_grad = grad;

        bool accepted = false;
        Eigen::VectorXd trial;
        for (int ls = 0; ls < 60 && !accepted; ++ls) {
            trial = clamp_to(theta + alpha * pg, lo, hi);
            const Eigen::VectorXd delta = trial - theta;
            if (delta.cwiseAbs().maxCoeff() < 1e-16) {
                alpha *= 0.5;
                continue;
            }
            const double tv = f(trial, nullptr);
            if (std::isfinite(tv) && tv >= value + 1e-4 * grad.dot(delta)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        theta = trial;
        value = f(theta, &grad);
        if (!std::isfinite(value)) break;  // should not happen after acceptance

        history.push_back(value);
        if (static_cast<int>(history.size()) > kWindow) {
            const double gain = value - history[history.size() - 1 - kWindow];
            if (gain < 1e-5 * (1.0 + std::abs(value))) break;
        }
    }
    return {theta, value};
}

// Best of several starts; each start is ascended independently.
inline AscentResult ascend_multistart(const HyperObjective& f,
                                      const std::vector<Eigen::VectorXd>& starts,
                                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                      int max_iters, double grad_tol) {
    AscentResult best;
    for (const auto& s : starts) {
        AscentResult r = ascend(f, s, lo, hi, max_iters, grad_tol);
        if (!std::isfinite(best.value) || r.value > best.value) best = r;
    }
    return best;
}

}  // namespace deto::detail

#endif  // DETO_SRC_HYPER_OPT_HPP
