#ifndef DETO_TYPES_HPP
#define DETO_TYPES_HPP

#include <stdexcept>

#include <Eigen/Core>

namespace deto {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned search box [lower_i, upper_i]^n.
struct Box {
    Vector lower;
    Vector upper;

    Box() = default;
    Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("Box: bound dimensions differ");
        for (int i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument("Box: lower bound must be below upper bound");
    }

    /// Cube [lo, hi]^n.
    static Box cube(int n, double lo, double hi) {
        return Box(Vector::Constant(n, lo), Vector::Constant(n, hi));
    }

    int dim() const { return static_cast<int>(lower.size()); }

    bool contains(const Vector& x) const {
        if (x.size() != lower.size()) return false;
        for (int i = 0; i < x.size(); ++i)
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        return true;
    }

    Vector clamp(Vector x) const {
        for (int i = 0; i < x.size(); ++i)
            x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
        return x;
    }

    Vector range() const { return upper - lower; }

    /// Largest coordinate range; the scale R used for length-scale bounds and
    /// distance thresholds.
    double max_range() const { return (upper - lower).maxCoeff(); }

    /// Euclidean distance after scaling each coordinate to [0, 1].
    double normalized_distance(const Vector& a, const Vector& b) const {
        return ((a - b).array() / (upper - lower).array()).matrix().norm();
    }
};

}  // namespace deto

#endif  // DETO_TYPES_HPP
