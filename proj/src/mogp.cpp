#include "deto/mogp.hpp"

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

void validate_tasks(const std::vector<Dataset>& tasks, const CoregionalizationSpec& spec) {
    if (tasks.empty()) throw std::invalid_argument("MOGPModel: no task datasets");
    if (spec.tasks != static_cast<int>(tasks.size()))
        throw std::invalid_argument("MOGPModel: spec task count does not match datasets");
    if (spec.kind == CoregKind::LMC && spec.effective_rank() < 1)
        throw std::invalid_argument("MOGPModel: LMC rank must be >= 1");
    const int dim = tasks.front().dim();
    int prev_t = 0;
    for (const auto& d : tasks) {
        if (d.empty()) throw std::invalid_argument("MOGPModel: empty task dataset");
        if (d.dim() != dim) throw std::invalid_argument("MOGPModel: task dimension mismatch");
        if (d.time_step() <= prev_t)
            throw std::invalid_argument("MOGPModel: tasks must be ordered by ascending time");
        prev_t = d.time_step();
    }
}

struct Stacked {
    Matrix inputs;
    Vector values;
    std::vector<int> start;  // size T+1
};

Stacked stack_tasks(const std::vector<Dataset>& tasks) {
    Stacked s;
    int total = 0;
    s.start.push_back(0);
    for (const auto& d : tasks) {
        total += d.size();
        s.start.push_back(total);
    }
    s.inputs.resize(total, tasks.front().dim());
    s.values.resize(total);
    for (size_t i = 0; i < tasks.size(); ++i) {
        s.inputs.middleRows(s.start[i], tasks[i].size()) = tasks[i].inputs();
        s.values.segment(s.start[i], tasks[i].size()) = tasks[i].values();
    }
    return s;
}

// Joint covariance over the stacked observations (no jitter). For HMOGP the
// level-i kernel contributes only to rows/cols of tasks >= i, which are the
// trailing block in task-major order.
Matrix assemble_covariance(const Matrix& d2, const std::vector<int>& start,
                           const CoregionalizationSpec& spec,
                           const std::vector<KernelParams>& kernels,
                           const std::vector<Matrix>& task_cov) {
    const int total = static_cast<int>(d2.rows());
    const int T = spec.tasks;
    Matrix K = Matrix::Zero(total, total);
    if (spec.kind == CoregKind::HMOGP) {
        for (int i = 0; i < T; ++i) {
            const int s = start[i];
            const int m = total - s;
            K.block(s, s, m, m).array() +=
                kernels[i].gamma
                * (-d2.block(s, s, m, m) / (kernels[i].ell * kernels[i].ell)).array().exp();
        }
    } else {
        for (int i = 0; i < T; ++i) {
            const Matrix Mi =
                kernels[i].gamma
                * (-d2 / (kernels[i].ell * kernels[i].ell)).array().exp().matrix();
            for (int a = 0; a < T; ++a) {
                for (int b = 0; b < T; ++b) {
                    const double c = task_cov[i](a, b);
                    if (c == 0.0) continue;
                    K.block(start[a], start[b], start[a + 1] - start[a],
                            start[b + 1] - start[b]) +=
                        c * Mi.block(start[a], start[b], start[a + 1] - start[a],
                                     start[b + 1] - start[b]);
                }
            }
        }
    }
    return K;
}

}  // namespace

int hyperparameter_count(const CoregionalizationSpec& spec) {
    if (spec.tasks < 1) throw std::invalid_argument("hyperparameter_count: tasks must be >= 1");
    const int base = 2 * spec.tasks;
    if (spec.kind == CoregKind::HMOGP) return base;
    return base + spec.tasks * spec.tasks * spec.effective_rank();
}

double mt_kernel_eval(const Vector& x, int task, const Vector& x2, int task2,
                      const CoregionalizationSpec& spec,
                      const std::vector<KernelParams>& kernels,
                      const std::vector<Matrix>& coeffs) {
    if (task < 1 || task > spec.tasks || task2 < 1 || task2 > spec.tasks)
        throw std::invalid_argument("mt_kernel_eval: task index out of range");
    if (static_cast<int>(kernels.size()) != spec.tasks)
        throw std::invalid_argument("mt_kernel_eval: kernel count mismatch");
    if (spec.kind == CoregKind::HMOGP) {
        double sum = 0.0;
        for (int i = 0; i < std::min(task, task2); ++i) sum += rbf_eval(x, x2, kernels[i]);
        return sum;
    }
    if (static_cast<int>(coeffs.size()) != spec.tasks)
        throw std::invalid_argument("mt_kernel_eval: coefficient count mismatch");
    double sum = 0.0;
    for (int i = 0; i < spec.tasks; ++i) {
        const double c = coeffs[i].row(task - 1).dot(coeffs[i].row(task2 - 1));
        sum += c * rbf_eval(x, x2, kernels[i]);
    }
    return sum;
}

MOGPModel MOGPModel::with_params(std::vector<Dataset> tasks, const CoregionalizationSpec& spec,
                                 std::vector<KernelParams> kernels, std::vector<Matrix> coeffs,
                                 double jitter_ratio) {
    validate_tasks(tasks, spec);
    if (static_cast<int>(kernels.size()) != spec.tasks)
        throw std::invalid_argument("MOGPModel: kernel count mismatch");
    if (spec.kind == CoregKind::LMC) {
        if (static_cast<int>(coeffs.size()) != spec.tasks)
            throw std::invalid_argument("MOGPModel: coefficient count mismatch");
        for (const auto& B : coeffs)
            if (B.rows() != spec.tasks || B.cols() != spec.effective_rank())
                throw std::invalid_argument("MOGPModel: coefficient matrix shape mismatch");
    } else {
        coeffs.clear();  // HMOGP stores no coefficients
    }

    MOGPModel m;
    m.spec_ = spec;
    m.kernels_ = std::move(kernels);
    m.coeffs_ = std::move(coeffs);
    for (const auto& B : m.coeffs_) m.task_cov_.push_back(B * B.transpose());

    Stacked st = stack_tasks(tasks);
    m.tasks_ = std::move(tasks);
    m.inputs_ = std::move(st.inputs);
    m.task_start_ = st.start;
    const int total = static_cast<int>(m.inputs_.rows());
    m.offset_ = total >= 2 ? st.values.mean() : 0.0;
    const Vector f = st.values.array() - m.offset_;

    double mean_gamma = 0.0;
    for (const auto& k : m.kernels_) mean_gamma += k.gamma;
    mean_gamma /= static_cast<double>(spec.tasks);

    const Matrix d2 = squared_distances(m.inputs_);
    const Matrix base = assemble_covariance(d2, m.task_start_, spec, m.kernels_, m.task_cov_);
    for (double ratio = jitter_ratio; ratio <= kMaxJitterRatio * (1.0 + 1e-12); ratio *= 10.0) {
        Matrix K = base;
        const double jitter = ratio * mean_gamma;
        K.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(K);
        if (llt.info() != Eigen::Success) continue;
        m.chol_ = llt.matrixL();
        m.alpha_ = llt.solve(f);
        m.jitter_ = jitter;
        const double logdet = 2.0 * m.chol_.diagonal().array().log().sum();
        m.lml_ = -0.5 * f.dot(m.alpha_) - 0.5 * logdet - 0.5 * total * kLog2Pi;
        return m;
    }
    throw std::runtime_error("MOGPModel: joint covariance factorization failed ("
                             + std::to_string(total) + " stacked points, "
                             + std::to_string(spec.tasks) + " tasks)");
}

MOGPModel MOGPModel::fit(std::vector<Dataset> tasks, const CoregionalizationSpec& spec,
                         const FitConfig& cfg) {
    validate_tasks(tasks, spec);

    // A one-task hierarchical model is exactly a single-output GP; fitting it
    // through the same path keeps the two observationally identical.
    if (spec.kind == CoregKind::HMOGP && spec.tasks == 1) {
        const GPModel gp = GPModel::fit(tasks.front(), cfg);
        return with_params(std::move(tasks), spec, {gp.params()}, {}, cfg.jitter_ratio);
    }

    const int T = spec.tasks;
    const int r = spec.effective_rank();
    const bool lmc = spec.kind == CoregKind::LMC;
    const int kernel_dims = 2 * T;
    const int coeff_dims = lmc ? T * T * r : 0;

    Stacked st = stack_tasks(tasks);
    const int total = static_cast<int>(st.inputs.rows());
    const double offset = total >= 2 ? st.values.mean() : 0.0;
    const Vector f = st.values.array() - offset;
    const Matrix d2 = squared_distances(st.inputs);
    const std::vector<int> start = st.start;

    const double range = tasks.front().bounds().max_range();
    double var = 0.0;
    if (total >= 2) var = (st.values.array() - st.values.mean()).square().sum() / (total - 1);
    const double var_floor = std::max(var, 1e-6);

    Eigen::VectorXd lo(kernel_dims + coeff_dims), hi(kernel_dims + coeff_dims);
    for (int i = 0; i < T; ++i) {
        lo[2 * i] = std::log(1e-6 * var_floor);
        hi[2 * i] = std::log(1e6 * var_floor);
        lo[2 * i + 1] = std::log(1e-3 * range);
        hi[2 * i + 1] = std::log(10.0 * range);
    }
    for (int i = kernel_dims; i < kernel_dims + coeff_dims; ++i) {
        lo[i] = -100.0;
        hi[i] = 100.0;
    }

    const double jr = cfg.jitter_ratio;
    auto unpack = [&](const Eigen::VectorXd& theta, std::vector<KernelParams>* kernels,
                      std::vector<Matrix>* task_cov, std::vector<Matrix>* coeffs) {
        kernels->clear();
        for (int i = 0; i < T; ++i)
            kernels->push_back({std::exp(theta[2 * i]), std::exp(theta[2 * i + 1])});
        if (lmc) {
            task_cov->clear();
            if (coeffs) coeffs->clear();
            for (int i = 0; i < T; ++i) {
                Matrix B(T, r);
                for (int row = 0; row < T; ++row)
                    for (int col = 0; col < r; ++col)
                        B(row, col) = theta[kernel_dims + i * T * r + row * r + col];
                task_cov->push_back(B * B.transpose());
                if (coeffs) coeffs->push_back(std::move(B));
            }
        }
    };

    detail::HyperObjective objective = [&](const Eigen::VectorXd& theta,
                                           Eigen::VectorXd* grad) -> double {
        std::vector<KernelParams> kernels;
        std::vector<Matrix> task_cov, coeffs;
        unpack(theta, &kernels, &task_cov, lmc ? &coeffs : nullptr);

        double mean_gamma = 0.0;
        for (const auto& k : kernels) mean_gamma += k.gamma;
        mean_gamma /= static_cast<double>(T);

        const Matrix base = assemble_covariance(d2, start, spec, kernels, task_cov);
        Eigen::LLT<Matrix> llt;
        Matrix K;
        double used_ratio = jr;
        bool ok = false;
        for (double ratio = jr; ratio <= kMaxJitterRatio * (1.0 + 1e-12); ratio *= 10.0) {
            K = base;
            K.diagonal().array() += ratio * mean_gamma;
            llt.compute(K);
            if (llt.info() == Eigen::Success) {
                used_ratio = ratio;
                ok = true;
                break;
            }
        }
        if (!ok) return -std::numeric_limits<double>::infinity();
        const Vector alpha = llt.solve(f);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        const double value = -0.5 * f.dot(alpha) - 0.5 * logdet - 0.5 * total * kLog2Pi;
        if (!grad) return value;

        Matrix W = -llt.solve(Matrix::Identity(total, total));
        W += alpha * alpha.transpose();
        const double trW = W.trace();
        grad->setZero(theta.size());
        for (int i = 0; i < T; ++i) {
            const double ell2 = kernels[i].ell * kernels[i].ell;
            // jitter = jr * mean(gamma), so d jitter / d log gamma_i = jr gamma_i / T
            const double jitter_term = 0.5 * (used_ratio * kernels[i].gamma / T) * trW;
            if (!lmc) {
                const int s = start[i];
                const int m = total - s;
                const auto d2b = d2.block(s, s, m, m).array();
                const Matrix Ei = (kernels[i].gamma * (-d2b / ell2).exp()).matrix();
                const auto Wb = W.block(s, s, m, m).array();
                (*grad)[2 * i] = 0.5 * (Wb * Ei.array()).sum() + jitter_term;
                (*grad)[2 * i + 1] = 0.5 * (Wb * Ei.array() * (2.0 * d2b / ell2)).sum();
            } else {
                const Matrix Mi =
                    (kernels[i].gamma * (-d2.array() / ell2).exp()).matrix();
                const Matrix WMi = W.cwiseProduct(Mi);
                const Matrix WMi2 =
                    (W.array() * Mi.array() * (2.0 * d2.array() / ell2)).matrix();
                Matrix S(T, T), S2(T, T);
                for (int a = 0; a < T; ++a)
                    for (int b = 0; b < T; ++b) {
                        S(a, b) = WMi.block(start[a], start[b], start[a + 1] - start[a],
                                            start[b + 1] - start[b]).sum();
                        S2(a, b) = WMi2.block(start[a], start[b], start[a + 1] - start[a],
                                              start[b + 1] - start[b]).sum();
                    }
                (*grad)[2 * i] = 0.5 * (task_cov[i].array() * S.array()).sum() + jitter_term;
                (*grad)[2 * i + 1] = 0.5 * (task_cov[i].array() * S2.array()).sum();
                const Matrix GB = 0.5 * (S + S.transpose()) * coeffs[i];
                for (int row = 0; row < T; ++row)
                    for (int col = 0; col < r; ++col)
                        (*grad)[kernel_dims + i * T * r + row * r + col] = GB(row, col);
            }
        }
        return value;
    };

    Rng rng(cfg.seed);
    std::vector<Eigen::VectorXd> starts;
    for (int s = 0; s < cfg.multistarts; ++s) {
        Eigen::VectorXd theta(kernel_dims + coeff_dims);
        if (s == 0) {
            for (int i = 0; i < T; ++i) {
                theta[2 * i] = std::log(var_floor);
                theta[2 * i + 1] = std::log(range / 4.0);
            }
        } else {
            for (int i = 0; i < kernel_dims; ++i)
                theta[i] = lo[i] + rng.uniform() * (hi[i] - lo[i]);
        }
        for (int i = kernel_dims; i < kernel_dims + coeff_dims; ++i)
            theta[i] = std::sqrt(0.1) * rng.normal();
        starts.push_back(detail::clamp_to(theta, lo, hi));
    }

    const detail::AscentResult best =
        detail::ascend_multistart(objective, starts, lo, hi, cfg.max_iters, cfg.grad_tol);
    if (!std::isfinite(best.value))
        throw std::runtime_error("MOGPModel::fit: no feasible hyperparameters ("
                                 + std::to_string(total) + " stacked points)");

    std::vector<KernelParams> kernels;
    std::vector<Matrix> task_cov, coeffs;
    unpack(best.theta, &kernels, &task_cov, lmc ? &coeffs : nullptr);
    return with_params(std::move(tasks), spec, std::move(kernels), std::move(coeffs),
                       cfg.jitter_ratio);
}

void MOGPModel::check_task(int task) const {
    if (task < 1 || task > spec_.tasks)
        throw std::invalid_argument("MOGPModel: task index out of range");
}

double MOGPModel::kernel(const Vector& x, int task, const Vector& x2, int task2) const {
    return mt_kernel_eval(x, task, x2, task2, spec_, kernels_, coeffs_);
}

double MOGPModel::prior_variance(int task) const {
    double v = 0.0;
    if (spec_.kind == CoregKind::HMOGP) {
        for (int i = 0; i < task; ++i) v += kernels_[i].gamma;
    } else {
        for (int i = 0; i < spec_.tasks; ++i)
            v += task_cov_[i](task - 1, task - 1) * kernels_[i].gamma;
    }
    return v;
}

Vector MOGPModel::kernel_vector(const Vector& z, int task) const {
    const int total = static_cast<int>(inputs_.rows());
    const Vector d2 = (inputs_.rowwise() - z.transpose()).rowwise().squaredNorm();
    Vector ks = Vector::Zero(total);
    if (spec_.kind == CoregKind::HMOGP) {
        for (int i = 0; i < task; ++i) {
            const int s = task_start_[i];
            const int m = total - s;
            ks.segment(s, m).array() +=
                kernels_[i].gamma
                * (-d2.segment(s, m).array() / (kernels_[i].ell * kernels_[i].ell)).exp();
        }
    } else {
        for (int i = 0; i < spec_.tasks; ++i) {
            const Vector ki =
                kernels_[i].gamma
                * (-d2.array() / (kernels_[i].ell * kernels_[i].ell)).exp().matrix();
            for (int b = 0; b < spec_.tasks; ++b) {
                const double c = task_cov_[i](task - 1, b);
                if (c == 0.0) continue;
                ks.segment(task_start_[b], task_start_[b + 1] - task_start_[b]) +=
                    c * ki.segment(task_start_[b], task_start_[b + 1] - task_start_[b]);
            }
        }
    }
    return ks;
}

std::pair<double, double> MOGPModel::predict(const Vector& z, int task) const {
    check_task(task);
    if (z.size() != inputs_.cols())
        throw std::invalid_argument("MOGPModel::predict: dimension mismatch");
    const Vector ks = kernel_vector(z, task);
    const double mean = ks.dot(alpha_) + offset_;
    const Vector w = chol_.triangularView<Eigen::Lower>().solve(ks);
    const double variance = std::max(prior_variance(task) - w.squaredNorm(), 0.0);
    return {mean, variance};
}

// Accumulates sum_j s_j dk_level/dz over the trailing rows each level sees.
namespace {
void add_level_grad(const Matrix& X, const Vector& d2, const Vector& weights,
                    const KernelParams& kp, int row_begin, int row_count, double coef,
                    const Vector& z, Vector* out) {
    if (row_count <= 0 || coef == 0.0) return;
    const double ell2 = kp.ell * kp.ell;
    const Vector ki =
        kp.gamma * (-d2.segment(row_begin, row_count).array() / ell2).exp().matrix();
    const Vector s = coef * weights.segment(row_begin, row_count).cwiseProduct(ki);
    *out += -(2.0 / ell2)
            * (z * s.sum() - X.middleRows(row_begin, row_count).transpose() * s);
}
}  // namespace

Vector MOGPModel::mean_grad(const Vector& z, int task) const {
    check_task(task);
    const Vector d2 = (inputs_.rowwise() - z.transpose()).rowwise().squaredNorm();
    Vector g = Vector::Zero(z.size());
    const int total = static_cast<int>(inputs_.rows());
    if (spec_.kind == CoregKind::HMOGP) {
        for (int i = 0; i < task; ++i)
            add_level_grad(inputs_, d2, alpha_, kernels_[i], task_start_[i],
                           total - task_start_[i], 1.0, z, &g);
    } else {
        for (int i = 0; i < spec_.tasks; ++i)
            for (int b = 0; b < spec_.tasks; ++b)
                add_level_grad(inputs_, d2, alpha_, kernels_[i], task_start_[b],
                               task_start_[b + 1] - task_start_[b],
                               task_cov_[i](task - 1, b), z, &g);
    }
    return g;
}

Vector MOGPModel::variance_grad(const Vector& z, int task) const {
    check_task(task);
    const Vector ks = kernel_vector(z, task);
    Vector u = chol_.triangularView<Eigen::Lower>().solve(ks);
    u = chol_.transpose().triangularView<Eigen::Upper>().solve(u);
    const Vector d2 = (inputs_.rowwise() - z.transpose()).rowwise().squaredNorm();
    Vector g = Vector::Zero(z.size());
    const int total = static_cast<int>(inputs_.rows());
    if (spec_.kind == CoregKind::HMOGP) {
        for (int i = 0; i < task; ++i)
            add_level_grad(inputs_, d2, u, kernels_[i], task_start_[i],
                           total - task_start_[i], 1.0, z, &g);
    } else {
        for (int i = 0; i < spec_.tasks; ++i)
            for (int b = 0; b < spec_.tasks; ++b)
                add_level_grad(inputs_, d2, u, kernels_[i], task_start_[b],
                               task_start_[b + 1] - task_start_[b],
                               task_cov_[i](task - 1, b), z, &g);
    }
    return -2.0 * g;  // d sigma^2/dz = -2 (dk*/dz)' K^-1 k*
}

}  // namespace deto
