#ifndef DETO_DATASET_HPP
#define DETO_DATASET_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "deto/types.hpp"

namespace deto {

/// One evaluated (or surrogate-labeled) point: decision vector, the time
/// step it belongs to, and its objective value.
struct Observation {
    Vector x;
    int t = 1;
    double y = 0.0;
};

/// Per-step collection of observations sharing a time step. `pseudo` marks
/// datasets whose values come from a surrogate rather than the true
/// objective; such points never count against the evaluation budget.
class Dataset {
public:
    Dataset(Box bounds, int time_step, bool pseudo = false)
        : bounds_(std::move(bounds)), t_(time_step), pseudo_(pseudo) {
        if (t_ < 1) throw std::invalid_argument("Dataset: time step must be >= 1");
        inputs_.resize(0, bounds_.dim());
        values_.resize(0);
    }

    void add(const Vector& x, double y) {
        if (x.size() != bounds_.dim())
            throw std::invalid_argument("Dataset: input dimension mismatch");
        if (!bounds_.contains(x))
            throw std::invalid_argument("Dataset: input outside declared bounds");
        if (!std::isfinite(y))
            throw std::invalid_argument("Dataset: non-finite objective value");
        // Noise-free GP covariance is singular under duplicated inputs.
        for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
            if (((inputs_.row(i).transpose() - x).cwiseAbs().maxCoeff()) < 1e-12)
                throw std::invalid_argument(
                    "Dataset: duplicate input at step " + std::to_string(t_));
        }
        inputs_.conservativeResize(inputs_.rows() + 1, Eigen::NoChange);
        inputs_.row(inputs_.rows() - 1) = x.transpose();
        values_.conservativeResize(values_.size() + 1);
        values_[values_.size() - 1] = y;
    }

    /// True when `x` duplicates an existing input within the dataset's
    /// duplicate tolerance (1e-12 per coordinate).
    bool would_duplicate(const Vector& x) const {
        for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
            if (((inputs_.row(i).transpose() - x).cwiseAbs().maxCoeff()) < 1e-12) return true;
        return false;
    }

    int size() const { return static_cast<int>(inputs_.rows()); }
    bool empty() const { return inputs_.rows() == 0; }
    int dim() const { return bounds_.dim(); }
    int time_step() const { return t_; }
    bool pseudo() const { return pseudo_; }
    const Box& bounds() const { return bounds_; }

    /// N x n matrix of inputs, one row per observation, in insertion order.
    const Matrix& inputs() const { return inputs_; }
    const Vector& values() const { return values_; }
    Vector input(int i) const { return inputs_.row(i).transpose(); }

    double value_mean() const { return size() == 0 ? 0.0 : values_.mean(); }

    double value_variance() const {
        if (size() < 2) return 0.0;
        const double m = values_.mean();
        return (values_.array() - m).square().sum() / static_cast<double>(size() - 1);
    }

private:
    Box bounds_;
    int t_;
    bool pseudo_;
    Matrix inputs_;
    Vector values_;
};

}  // namespace deto

#endif  // DETO_DATASET_HPP
