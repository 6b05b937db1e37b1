#ifndef DETO_GP_HPP
#define DETO_GP_HPP

#include <cstdint>
#include <utility>

#include "deto/dataset.hpp"
#include "deto/types.hpp"

namespace deto {

/// RBF kernel hyperparameters: signal variance gamma and length scale ell,
/// k(x, x') = gamma * exp(-(||x - x'|| / ell)^2).
struct KernelParams {
    double gamma = 1.0;
    double ell = 1.0;

    bool valid() const {
        return gamma > 0.0 && ell > 0.0 && std::isfinite(gamma) && std::isfinite(ell);
    }
};

double rbf_eval(const Vector& x, const Vector& x2, const KernelParams& p);

/// d k(x, x2) / dx = -(2 / ell^2) (x - x2) k(x, x2).
Vector rbf_grad_x(const Vector& x, const Vector& x2, const KernelParams& p);

/// Maximum-likelihood fitting settings. Multi-start gradient ascent in
/// (log gamma, log ell); the first start sits at (sample variance, R/4) and
/// the rest are drawn log-uniform inside the hyperparameter box.
struct FitConfig {
    int multistarts = 5;
    int max_iters = 200;
    double grad_tol = 1e-6;       // stop when the projected gradient inf-norm drops below
    double jitter_ratio = 1e-9;   // diagonal jitter as a fraction of gamma
    std::uint64_t seed = 0;
};

struct Likelihood {
    double value = 0.0;
    Eigen::Vector2d grad;  // d/d(log gamma), d/d(log ell)
};

/// Log marginal likelihood of `data` under fixed hyperparameters with a
/// fixed additive jitter on the covariance diagonal:
///   -1/2 f' K^-1 f - 1/2 log|K| - N/2 log(2 pi).
/// Values are centered by the dataset mean first (the models carry a
/// constant mean equal to the sample mean; single observations are left
/// uncentered). The gradient is analytic, taken at fixed jitter.
Likelihood log_marginal_likelihood(const Dataset& data, const KernelParams& p, double jitter);

/// Fitted single-output GP. Immutable after construction; concurrent reads
/// are safe.
class GPModel {
public:
    /// Maximum-likelihood fit (see FitConfig). Throws std::runtime_error if
    /// the covariance cannot be factorized even after jitter escalation.
    static GPModel fit(const Dataset& data, const FitConfig& cfg);

    /// Model with prescribed hyperparameters (no fitting).
    static GPModel with_params(const Dataset& data, const KernelParams& p,
                               double jitter_ratio = 1e-9);

    /// Posterior mean and variance at z; the variance is clamped at zero.
    std::pair<double, double> predict(const Vector& z) const;

    /// Gradient of the posterior mean at z.
    Vector mean_grad(const Vector& z) const;

    /// Gradient of the posterior variance at z. The prior term k(z,z) is
    /// constant for the RBF kernel, so this is -2 (dk*/dz)' K^-1 k*.
    Vector variance_grad(const Vector& z) const;

    const KernelParams& params() const { return params_; }
    double jitter() const { return jitter_; }
    double offset() const { return offset_; }
    double log_likelihood() const { return lml_; }
    const Dataset& data() const { return data_; }
    const Box& bounds() const { return data_.bounds(); }
    const Matrix& cholesky_factor() const { return chol_; }
    const Vector& weights() const { return alpha_; }

private:
    GPModel(Dataset data, KernelParams p, Matrix chol, Vector alpha, double jitter,
            double offset, double lml)
        : data_(std::move(data)), params_(p), chol_(std::move(chol)),
          alpha_(std::move(alpha)), jitter_(jitter), offset_(offset), lml_(lml) {}

    Vector kernel_vector(const Vector& z) const;

    Dataset data_;
    KernelParams params_;
    Matrix chol_;   // lower factor of K + jitter I
    Vector alpha_;  // (K + jitter I)^-1 (f - offset)
    double jitter_;
    double offset_;
    double lml_;
};

/// Convenience wrapper matching the fit operation.
inline GPModel fit_gp(const Dataset& data, const FitConfig& cfg) {
    return GPModel::fit(data, cfg);
}

}  // namespace deto

#endif  // DETO_GP_HPP
