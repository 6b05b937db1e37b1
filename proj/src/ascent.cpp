#include "deto/ascent.hpp"

#include <cmath>

namespace deto {

double projected_gradient_norm(const Vector& x, const Vector& grad, const Box& bounds) {
    double norm = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        double g = grad[i];
        if ((x[i] >= bounds.upper[i] && g > 0.0) || (x[i] <= bounds.lower[i] && g < 0.0))
            g = 0.0;
        norm = std::max(norm, std::abs(g));
    }
    return norm;
}

Vector local_ascent(const Vector& x0, const DifferentiableObjective& objective,
                    const Box& bounds, const AscentConfig& cfg) {
    const double range = bounds.max_range();
    const double step_tol = cfg.step_tol > 0.0 ? cfg.step_tol : 1e-6 * range;
    double step = cfg.init_step > 0.0 ? cfg.init_step : 0.1 * range;

    Vector x = bounds.clamp(x0);
    Vector grad(x.size());
    double value = objective(x, &grad);
    if (!std::isfinite(value)) return x;

    for (int it = 0; it < cfg.max_iters; ++it) {
        Vector pg = grad;
        for (int i = 0; i < x.size(); ++i) {
            if ((x[i] >= bounds.upper[i] && pg[i] > 0.0)
                || (x[i] <= bounds.lower[i] && pg[i] < 0.0))
                pg[i] = 0.0;
        }
        const double gnorm = pg.norm();
        if (gnorm < 1e-300) break;
        const Vector dir = pg / gnorm;

        double s = step;
        bool accepted = false;
        Vector trial;
        for (int ls = 0; ls < 60 && !accepted; ++ls) {
            trial = bounds.clamp(x + s * dir);
            const Vector delta = trial - x;
            if (delta.cwiseAbs().maxCoeff() < 1e-300) {
                s *= 0.5;
                continue;
            }
            const double tv = objective(trial, nullptr);
            if (std::isfinite(tv) && tv >= value + 1e-4 * grad.dot(delta)) accepted = true;
            else s *= 0.5;
        }
        if (!accepted) break;

        const double moved = (trial - x).norm();
        x = trial;
        value = objective(x, &grad);
        step = std::min(2.0 * s, range);
        if (moved < step_tol) break;
    }
    return x;
}

}  // namespace deto
