// Test-only reference implementations, kept deliberately naive and
// independent of the library's solve paths: dense inverses via full-pivot
// LU, plain loops for covariance assembly, central finite differences, and
// grid scans.
#ifndef DETO_TESTS_ORACLES_HPP
#define DETO_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double rbf(const VectorXd& a, const VectorXd& b, double gamma, double ell) {
    double d2 = 0.0;
    for (int i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return gamma * std::exp(-d2 / (ell * ell));
}

// Centered values under the library's constant-mean convention: subtract the
// sample mean unless there is a single observation.
inline VectorXd centered(const VectorXd& y) {
    if (y.size() < 2) return y;
    return y.array() - y.mean();
}

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

inline Prediction dense_gp_predict(const MatrixXd& X, const VectorXd& y, double gamma,
                                   double ell, double jitter, const VectorXd& z) {
    const int n = static_cast<int>(X.rows());
    MatrixXd K(n, n);
    VectorXd ks(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            K(i, j) = rbf(X.row(i).transpose(), X.row(j).transpose(), gamma, ell);
        K(i, i) += jitter;
        ks[i] = rbf(z, X.row(i).transpose(), gamma, ell);
    }
    const MatrixXd Kinv = K.fullPivLu().inverse();
    const VectorXd f = centered(y);
    Prediction p;
    const double offset = y.size() < 2 ? 0.0 : y.mean();
    p.mean = ks.dot(Kinv * f) + offset;
    p.variance = gamma - ks.dot(Kinv * ks);
    return p;
}

inline double dense_gp_lml(const MatrixXd& X, const VectorXd& y, double gamma, double ell,
                           double jitter) {
    const int n = static_cast<int>(X.rows());
    MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            K(i, j) = rbf(X.row(i).transpose(), X.row(j).transpose(), gamma, ell);
        K(i, i) += jitter;
    }
    const VectorXd f = centered(y);
    const Eigen::FullPivLU<MatrixXd> lu(K);
    return -0.5 * f.dot(lu.inverse() * f) - 0.5 * std::log(lu.determinant())
           - 0.5 * n * std::log(2.0 * M_PI);
}

// Explicit masked task-correlation matrix: [A_i]_{t,t'} = 1 iff both tasks
// are at least i (1-based tasks and levels).
inline MatrixXd mask_matrix(int T, int level) {
    MatrixXd A = MatrixXd::Zero(T, T);
    for (int t = 1; t <= T; ++t)
        for (int u = 1; u <= T; ++u)
            if (t >= level && u >= level) A(t - 1, u - 1) = 1.0;
    return A;
}

// Cross-task kernel assembled literally from the masked matrices.
inline double masked_kernel(const VectorXd& x, int task, const VectorXd& x2, int task2,
                            const std::vector<std::pair<double, double>>& kernels) {
    const int T = static_cast<int>(kernels.size());
    double sum = 0.0;
    for (int i = 1; i <= T; ++i) {
        const MatrixXd A = mask_matrix(T, i);
        sum += A(task - 1, task2 - 1)
               * rbf(x, x2, kernels[i - 1].first, kernels[i - 1].second);
    }
    return sum;
}

// Dense multi-task prediction over stacked observations with 1-based task
// labels per row, using the masked assembly above.
inline Prediction dense_hmogp_predict(const MatrixXd& X, const VectorXd& y,
                                      const std::vector<int>& task_of_row,
                                      const std::vector<std::pair<double, double>>& kernels,
                                      double jitter, const VectorXd& z, int task) {
    const int n = static_cast<int>(X.rows());
    MatrixXd K(n, n);
    VectorXd ks(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            K(i, j) = masked_kernel(X.row(i).transpose(), task_of_row[i],
                                    X.row(j).transpose(), task_of_row[j], kernels);
        K(i, i) += jitter;
        ks[i] = masked_kernel(z, task, X.row(i).transpose(), task_of_row[i], kernels);
    }
    const MatrixXd Kinv = K.fullPivLu().inverse();
    const VectorXd f = centered(y);
    Prediction p;
    const double offset = y.size() < 2 ? 0.0 : y.mean();
    p.mean = ks.dot(Kinv * f) + offset;
    p.variance = masked_kernel(z, task, z, task, kernels) - ks.dot(Kinv * ks);
    return p;
}

// Cross-task kernel with explicit coefficient matrices: sum_i [B_i B_i']_{t,t'} k_i.
inline double lmc_kernel(const VectorXd& x, int task, const VectorXd& x2, int task2,
                         const std::vector<std::pair<double, double>>& kernels,
                         const std::vector<MatrixXd>& coeffs) {
    double sum = 0.0;
    for (size_t i = 0; i < kernels.size(); ++i) {
        const double c = coeffs[i].row(task - 1).dot(coeffs[i].row(task2 - 1));
        sum += c * rbf(x, x2, kernels[i].first, kernels[i].second);
    }
    return sum;
}

inline Prediction dense_lmc_predict(const MatrixXd& X, const VectorXd& y,
                                    const std::vector<int>& task_of_row,
                                    const std::vector<std::pair<double, double>>& kernels,
                                    const std::vector<MatrixXd>& coeffs, double jitter,
                                    const VectorXd& z, int task) {
    const int n = static_cast<int>(X.rows());
    MatrixXd K(n, n);
    VectorXd ks(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            K(i, j) = lmc_kernel(X.row(i).transpose(), task_of_row[i],
                                 X.row(j).transpose(), task_of_row[j], kernels, coeffs);
        K(i, i) += jitter;
        ks[i] = lmc_kernel(z, task, X.row(i).transpose(), task_of_row[i], kernels, coeffs);
    }
    const MatrixXd Kinv = K.fullPivLu().inverse();
    const VectorXd f = centered(y);
    Prediction p;
    const double offset = y.size() < 2 ? 0.0 : y.mean();
    p.mean = ks.dot(Kinv * f) + offset;
    p.variance = lmc_kernel(z, task, z, task, kernels, coeffs) - ks.dot(Kinv * ks);
    return p;
}

inline VectorXd central_diff(const std::function<double(const VectorXd&)>& fn,
                             const VectorXd& x, double h) {
    VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        VectorXd hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (fn(hi) - fn(lo)) / (2.0 * h);
    }
    return g;
}

struct GridMax {
    double x = 0.0;
    double value = 0.0;
};

inline GridMax grid_argmax_1d(const std::function<double(double)>& fn, double lo, double hi,
                              int points) {
    GridMax best{lo, fn(lo)};
    for (int i = 1; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        const double v = fn(x);
        if (v > best.value) best = {x, v};
    }
    return best;
}

// Interior local maxima of a 1-D grid scan (both neighbors strictly lower),
// plus boundary maxima.
inline std::vector<double> grid_local_maxima_1d(const std::function<double(double)>& fn,
                                                double lo, double hi, int points) {
    std::vector<double> xs(points), vs(points);
    for (int i = 0; i < points; ++i) {
        xs[i] = lo + (hi - lo) * i / (points - 1);
        vs[i] = fn(xs[i]);
    }
    std::vector<double> maxima;
    for (int i = 0; i < points; ++i) {
        const bool left_ok = i == 0 || vs[i] >= vs[i - 1];
        const bool right_ok = i == points - 1 || vs[i] >= vs[i + 1];
        const bool strict = (i > 0 && vs[i] > vs[i - 1]) || (i + 1 < points && vs[i] > vs[i + 1])
                            || points == 1;
        if (left_ok && right_ok && strict) maxima.push_back(xs[i]);
    }
    return maxima;
}

// Minimum within-cluster SSE over every 2-partition (for small point sets).
inline double best_two_partition_sse(const MatrixXd& pts, std::vector<int>* best_side) {
    const int n = static_cast<int>(pts.rows());
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
        VectorXd c0 = VectorXd::Zero(pts.cols()), c1 = VectorXd::Zero(pts.cols());
        int n0 = 0, n1 = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1 << i)) { c1 += pts.row(i).transpose(); ++n1; }
            else { c0 += pts.row(i).transpose(); ++n0; }
        }
        c0 /= n0;
        c1 /= n1;
        double sse = 0.0;
        for (int i = 0; i < n; ++i)
            sse += (mask & (1 << i)) ? (pts.row(i).transpose() - c1).squaredNorm()
                                     : (pts.row(i).transpose() - c0).squaredNorm();
        if (sse < best) {
            best = sse;
            if (best_side) {
                best_side->assign(n, 0);
                for (int i = 0; i < n; ++i) (*best_side)[i] = (mask & (1 << i)) ? 1 : 0;
            }
        }
    }
    return best;
}

}  // namespace oracle

#endif  // DETO_TESTS_ORACLES_HPP
