#include "deto/gp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "deto/rng.hpp"
#include "hyper_opt.hpp"

namespace deto {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMaxJitterRatio = 1e-2;

Matrix squared_distances(const Matrix& X) {
    const Vector sq = X.rowwise().squaredNorm();
    Matrix d2 = sq.replicate(1, X.rows()) + sq.transpose().replicate(X.rows(), 1)
                - 2.0 * X * X.transpose();
    return d2.cwiseMax(0.0);
}

// Constant-mean convention: the model's mean is the sample mean of the
// observed values; a lone observation is left uncentered.
double center_offset(const Dataset& data) {
    return data.size() >= 2 ? data.value_mean() : 0.0;
}

struct Factorization {
    Matrix chol;    // lower factor of K + jitter I
    Vector alpha;   // (K + jitter I)^-1 f
    double logdet = 0.0;
};

bool try_factorize(const Matrix& K, const Vector& f, Factorization* out) {
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() != Eigen::Success) return false;
    out->chol = llt.matrixL();
    out->alpha = llt.solve(f);
    out->logdet = 2.0 * out->chol.diagonal().array().log().sum();
    return true;
}

}  // namespace

double rbf_eval(const Vector& x, const Vector& x2, const KernelParams& p) {
    if (x.size() != x2.size())
        throw std::invalid_argument("rbf_eval: dimension mismatch");
    if (!p.valid()) throw std::invalid_argument("rbf_eval: invalid kernel parameters");
    return p.gamma * std::exp(-(x - x2).squaredNorm() / (p.ell * p.ell));
}

Vector rbf_grad_x(const Vector& x, const Vector& x2, const KernelParams& p) {
    return -(2.0 / (p.ell * p.ell)) * (x - x2) * rbf_eval(x, x2, p);
}

Likelihood log_marginal_likelihood(const Dataset& data, const KernelParams& p,
                                   double jitter) {
    if (data.empty()) throw std::invalid_argument("log_marginal_likelihood: empty dataset");
    if (!p.valid() || jitter < 0.0)
        throw std::invalid_argument("log_marginal_likelihood: invalid parameters");

    const int n = data.size();
    const Matrix d2 = squared_distances(data.inputs());
    const Matrix corr = (-d2 / (p.ell * p.ell)).array().exp();
    Matrix K = p.gamma * corr;
    K.diagonal().array() += jitter;
    const Vector f = data.values().array() - center_offset(data);

    Factorization fac;
    if (!try_factorize(K, f, &fac))
        throw std::runtime_error("log_marginal_likelihood: covariance factorization failed at step "
                                 + std::to_string(data.time_step()));

    Likelihood out;
    out.value = -0.5 * f.dot(fac.alpha) - 0.5 * fac.logdet - 0.5 * n * kLog2Pi;

    // W = alpha alpha' - K^-1; d/dtheta = 1/2 tr(W dK/dtheta). The jitter is
    // held fixed, so dK/dlog gamma excludes it.
    Eigen::LLT<Matrix> llt(K);
    Matrix W = -llt.solve(Matrix::Identity(n, n));
    W += fac.alpha * fac.alpha.transpose();
    const Matrix dK_dlg = p.gamma * corr;
    const Matrix dK_dll = (p.gamma * corr.array() * (2.0 * d2.array() / (p.ell * p.ell))).matrix();
    out.grad[0] = 0.5 * W.cwiseProduct(dK_dlg).sum();
    out.grad[1] = 0.5 * W.cwiseProduct(dK_dll).sum();
    return out;
}

GPModel GPModel::with_params(const Dataset& data, const KernelParams& p,
                             double jitter_ratio) {
    if (data.empty()) throw std::invalid_argument("GPModel: empty dataset");
    if (!p.valid()) throw std::invalid_argument("GPModel: invalid kernel parameters");

    const int n = data.size();
    const Matrix d2 = squared_distances(data.inputs());
    const Matrix corr = (-d2 / (p.ell * p.ell)).array().exp();
    const double offset = center_offset(data);
    const Vector f = data.values().array() - offset;

    // Escalate the diagonal jitter until the covariance factorizes.
    for (double ratio = jitter_ratio; ratio <= kMaxJitterRatio * (1.0 + 1e-12); ratio *= 10.0) {
        const double jitter = ratio * p.gamma;
        Matrix K = p.gamma * corr;
        K.diagonal().array() += jitter;
        Factorization fac;
        if (try_factorize(K, f, &fac)) {
            const double lml = -0.5 * f.dot(fac.alpha) - 0.5 * fac.logdet - 0.5 * n * kLog2Pi;
            return GPModel(data, p, std::move(fac.chol), std::move(fac.alpha), jitter,
                           offset, lml);
        }
    }
    throw std::runtime_error("GPModel: covariance factorization failed for dataset at step "
                             + std::to_string(data.time_step()) + " (" + std::to_string(n)
                             + " points) despite jitter escalation");
}

GPModel GPModel::fit(const Dataset& data, const FitConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("GPModel::fit: empty dataset");

    const double range = data.bounds().max_range();
    const double var_floor = std::max(data.value_variance(), 1e-6);
    Eigen::Vector2d lo(std::log(1e-6 * var_floor), std::log(1e-3 * range));
    Eigen::Vector2d hi(std::log(1e6 * var_floor), std::log(10.0 * range));

    const Matrix d2 = squared_distances(data.inputs());
    const Vector f = data.values().array() - center_offset(data);
    const int n = data.size();
    const double jr = cfg.jitter_ratio;

    // Objective over theta = (log gamma, log ell). The jitter scales with
    // gamma, so dK/dlog gamma is the whole of K.
    detail::HyperObjective objective = [&](const Eigen::VectorXd& theta,
                                           Eigen::VectorXd* grad) -> double {
        const double gamma = std::exp(theta[0]);
        const double ell = std::exp(theta[1]);
        const Matrix corr = (-d2 / (ell * ell)).array().exp();
        // Escalate the jitter in place of returning a hard infeasibility:
        // ill-conditioned corners of the search stay climbable.
        Eigen::LLT<Matrix> llt;
        Matrix K;
        bool ok = false;
        for (double ratio = jr; ratio <= kMaxJitterRatio * (1.0 + 1e-12); ratio *= 10.0) {
            K = gamma * corr;
            K.diagonal().array() += ratio * gamma;
            llt.compute(K);
            if (llt.info() == Eigen::Success) {
                ok = true;
                break;
            }
        }
        if (!ok) return -std::numeric_limits<double>::infinity();
        const Vector alpha = llt.solve(f);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        const double value = -0.5 * f.dot(alpha) - 0.5 * logdet - 0.5 * n * kLog2Pi;
        if (grad) {
            Matrix W = -llt.solve(Matrix::Identity(n, n));
            W += alpha * alpha.transpose();
            grad->resize(2);
            (*grad)[0] = 0.5 * W.cwiseProduct(K).sum();
            (*grad)[1] = 0.5 * (W.array() * gamma * corr.array()
                                * (2.0 * d2.array() / (ell * ell))).sum();
        }
        return value;
    };

    Rng rng(cfg.seed);
    std::vector<Eigen::VectorXd> starts;
    Eigen::Vector2d s0(std::log(var_floor), std::log(range / 4.0));
    starts.push_back(detail::clamp_to(s0, lo, hi));
    for (int i = 1; i < cfg.multistarts; ++i) {
        Eigen::Vector2d s(lo[0] + rng.uniform() * (hi[0] - lo[0]),
                          lo[1] + rng.uniform() * (hi[1] - lo[1]));
        starts.push_back(s);
    }

    const detail::AscentResult best =
        detail::ascend_multistart(objective, starts, lo, hi, cfg.max_iters, cfg.grad_tol);
    if (!std::isfinite(best.value))
        throw std::runtime_error("GPModel::fit: no feasible hyperparameters for dataset at step "
                                 + std::to_string(data.time_step()));

    KernelParams p{std::exp(best.theta[0]), std::exp(best.theta[1])};
    return with_params(data, p, cfg.jitter_ratio);
}

Vector GPModel::kernel_vector(const Vector& z) const {
    const Matrix& X = data_.inputs();
    const Vector d2 = (X.rowwise() - z.transpose()).rowwise().squaredNorm();
    return params_.gamma * (-d2 / (params_.ell * params_.ell)).array().exp();
}

std::pair<double, double> GPModel::predict(const Vector& z) const {
    if (z.size() != data_.dim()) throw std::invalid_argument("GPModel::predict: dimension mismatch");
    const Vector ks = kernel_vector(z);
    const double mean = ks.dot(alpha_) + offset_;
    const Vector w = chol_.triangularView<Eigen::Lower>().solve(ks);
    const double variance = std::max(params_.gamma - w.squaredNorm(), 0.0);
    return {mean, variance};
}

Vector GPModel::mean_grad(const Vector& z) const {
    if (z.size() != data_.dim()) throw std::invalid_argument("GPModel::mean_grad: dimension mismatch");
    const Vector ks = kernel_vector(z);
    const Vector s = alpha_.cwiseProduct(ks);
    // sum_j s_j * (-2/ell^2) (z - x_j)
    return -(2.0 / (params_.ell * params_.ell))
           * (z * s.sum() - data_.inputs().transpose() * s);
}

Vector GPModel::variance_grad(const Vector& z) const {
    if (z.size() != data_.dim())
        throw std::invalid_argument("GPModel::variance_grad: dimension mismatch");
    const Vector ks = kernel_vector(z);
    Vector u = chol_.triangularView<Eigen::Lower>().solve(ks);
    u = chol_.transpose().triangularView<Eigen::Upper>().solve(u);  // (K + jI)^-1 k*
    const Vector s = u.cwiseProduct(ks);
    // -2 (dk*/dz)' u = (4/ell^2) sum_j s_j (z - x_j)
    return (4.0 / (params_.ell * params_.ell))
           * (z * s.sum() - data_.inputs().transpose() * s);
}

}  // namespace deto
