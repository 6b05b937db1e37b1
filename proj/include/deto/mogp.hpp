#ifndef DETO_MOGP_HPP
#define DETO_MOGP_HPP

#include <utility>
#include <vector>

#include "deto/dataset.hpp"
#include "deto/gp.hpp"
#include "deto/types.hpp"

namespace deto {

enum class CoregKind { HMOGP, LMC };

/// Multi-output covariance structure over T tasks (time steps).
///
/// Both kinds share the form k((x,t),(x',t')) = sum_i [A_i]_{t,t'} k_i(x,x')
/// with per-task RBF kernels k_i. LMC learns A_i = B_i B_i' from T x r
/// coefficient matrices; the hierarchical variant (HMOGP) fixes A_i to the
/// 0/1 mask that is 1 iff both tasks are >= i, which collapses the sum to
/// the prefix sum_{i <= min(t,t')} k_i(x,x') and leaves O(T) hyperparameters.
struct CoregionalizationSpec {
    CoregKind kind = CoregKind::HMOGP;
    int tasks = 1;
    int rank = 0;  // LMC only; 0 means rank = tasks

    int effective_rank() const { return rank > 0 ? rank : tasks; }
};

/// HMOGP: 2T (gamma_i, ell_i per task kernel). LMC: 2T + T^2 r.
int hyperparameter_count(const CoregionalizationSpec& spec);

/// Cross-task kernel value for explicit parameters; `coeffs` holds the T
/// coefficient matrices B_i (ignored for HMOGP). Tasks are 1-based.
double mt_kernel_eval(const Vector& x, int task, const Vector& x2, int task2,
                      const CoregionalizationSpec& spec,
                      const std::vector<KernelParams>& kernels,
                      const std::vector<Matrix>& coeffs);

/// Fitted multi-output GP over a stack of per-step datasets (selected
/// sources first, current step last, re-indexed 1..T by ascending original
/// time). Immutable after fitting; concurrent reads are safe.
class MOGPModel {
public:
    /// Joint maximum-likelihood fit of all per-task kernels (and, for LMC,
    /// the coefficient matrices) over the stacked observations.
    static MOGPModel fit(std::vector<Dataset> tasks, const CoregionalizationSpec& spec,
                         const FitConfig& cfg);

    /// Model with prescribed parameters (no fitting).
    static MOGPModel with_params(std::vector<Dataset> tasks, const CoregionalizationSpec& spec,
                                 std::vector<KernelParams> kernels, std::vector<Matrix> coeffs,
                                 double jitter_ratio = 1e-9);

    double kernel(const Vector& x, int task, const Vector& x2, int task2) const;

    std::pair<double, double> predict(const Vector& z, int task) const;
    Vector mean_grad(const Vector& z, int task) const;
    Vector variance_grad(const Vector& z, int task) const;

    int task_count() const { return spec_.tasks; }
    const CoregionalizationSpec& spec() const { return spec_; }
    const std::vector<KernelParams>& kernels() const { return kernels_; }
    const std::vector<Matrix>& coefficients() const { return coeffs_; }
    const std::vector<Dataset>& tasks() const { return tasks_; }
    const Box& bounds() const { return tasks_.front().bounds(); }
    double jitter() const { return jitter_; }
    double offset() const { return offset_; }
    double log_likelihood() const { return lml_; }

private:
    MOGPModel() = default;

    Vector kernel_vector(const Vector& z, int task) const;
    double prior_variance(int task) const;
    void check_task(int task) const;

    std::vector<Dataset> tasks_;
    CoregionalizationSpec spec_;
    std::vector<KernelParams> kernels_;
    std::vector<Matrix> coeffs_;      // LMC: T matrices, each T x r
    std::vector<Matrix> task_cov_;    // LMC: A_i = B_i B_i'
    Matrix inputs_;                   // stacked rows, task-major
    std::vector<int> task_start_;     // row offset of each task, size T+1
    Matrix chol_;
    Vector alpha_;
    double jitter_ = 0.0;
    double offset_ = 0.0;
    double lml_ = 0.0;
};

/// Convenience wrapper matching the fit operation.
inline MOGPModel fit_mogp(std::vector<Dataset> tasks, const CoregionalizationSpec& spec,
                          const FitConfig& cfg) {
    return MOGPModel::fit(std::move(tasks), spec, cfg);
}

}  // namespace deto

#endif  // DETO_MOGP_HPP
