#ifndef DETO_ASCENT_HPP
#define DETO_ASCENT_HPP

#include <functional>

#include "deto/types.hpp"

namespace deto {

/// Differentiable objective over decision space: returns the value at x and,
/// when grad is non-null, fills the gradient.
using DifferentiableObjective = std::function<double(const Vector&, Vector*)>;

struct AscentConfig {
    int max_iters = 20;
    double step_tol = 0.0;   // 0 -> 1e-6 * max box range
    double init_step = 0.0;  // 0 -> 0.1 * max box range
};

/// Projected gradient ascent with backtracking line search inside `bounds`.
/// Monotone: the returned point never scores below x0. Stops at max_iters,
/// when the accepted step shrinks below step_tol, or when no improving step
/// exists.
Vector local_ascent(const Vector& x0, const DifferentiableObjective& objective,
                    const Box& bounds, const AscentConfig& cfg);

/// Inf-norm of the gradient with components pointing out of the box zeroed
/// (first-order stationarity measure that accepts boundary optima).
double projected_gradient_norm(const Vector& x, const Vector& grad, const Box& bounds);

}  // namespace deto

#endif  // DETO_ASCENT_HPP
