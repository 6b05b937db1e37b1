#ifndef DETO_ACQUISITION_HPP
#define DETO_ACQUISITION_HPP

#include <functional>

#include "deto/ascent.hpp"
#include "deto/gp.hpp"
#include "deto/mogp.hpp"
#include "deto/rng.hpp"

namespace deto {

enum class AcqOptimizerMode { Hybrid, DeOnly, AscentOnly };

/// Upper-confidence-bound maximization settings: the UCB trade-off omega,
/// the DE population, and the adaptive local-search schedule (kappa top
/// candidates refined per generation, grown or shrunk by how far the ascent
/// actually moves relative to eps_d in box-normalized coordinates).
struct AcqConfig {
    double omega = 1.5;
    int pop_size = 30;
    double de_weight = 0.5;      // DE scale factor F
    double crossover_rate = 0.9; // CR
    int kappa_init = 5;
    double eps_d = 0.01;         // closeness threshold, normalized coordinates
    int generations = 50;
    AscentConfig ascent;         // local search: <= 20 iterations by default
    AcqOptimizerMode mode = AcqOptimizerMode::Hybrid;

    void validate() const {
        if (pop_size < 4)
            throw std::invalid_argument("AcqConfig: DE/rand/1 needs a population of >= 4");
        if (crossover_rate < 0.0 || crossover_rate > 1.0)
            throw std::invalid_argument("AcqConfig: crossover rate must be in [0, 1]");
        if (omega < 0.0) throw std::invalid_argument("AcqConfig: omega must be >= 0");
        if (kappa_init < 1 || kappa_init > 2 * pop_size)
            throw std::invalid_argument("AcqConfig: kappa_init must be in [1, 2N]");
    }
};

double ucb(const GPModel& model, const Vector& z, double omega);
double ucb(const MOGPModel& model, const Vector& z, int task, double omega);

/// Gradient of mu + omega * sigma; sigma's gradient is d(sigma^2)/dz over
/// 2 max(sigma, 1e-8), so it stays finite where the variance vanishes.
Vector ucb_grad(const GPModel& model, const Vector& z, double omega);
Vector ucb_grad(const MOGPModel& model, const Vector& z, int task, double omega);

/// DE/rand/1/bin: one trial per population member, coordinates clamped to
/// the box. `population` holds one member per row.
Matrix de_step(const Matrix& population, double weight, double crossover_rate,
               const Box& bounds, Rng& rng);

/// Type-erased acquisition surface handed to the optimizer.
struct AcqObjective {
    DifferentiableObjective value_and_grad;
    Box bounds;
};

AcqObjective make_ucb_objective(const GPModel& model, double omega);
AcqObjective make_ucb_objective(const MOGPModel& model, int task, double omega);

/// Maximizes the acquisition surface: Latin-hypercube population, then per
/// generation DE offspring, top-kappa local ascent with the adaptive kappa
/// update, and elitist truncation. Returns the best member found.
Vector optimize_acquisition(const AcqObjective& objective, const AcqConfig& cfg, Rng& rng);

inline Vector optimize_acquisition(const MOGPModel& model, int task, const AcqConfig& cfg,
                                   Rng& rng) {
    return optimize_acquisition(make_ucb_objective(model, task, cfg.omega), cfg, rng);
}

inline Vector optimize_acquisition(const GPModel& model, const AcqConfig& cfg, Rng& rng) {
    return optimize_acquisition(make_ucb_objective(model, cfg.omega), cfg, rng);
}

}  // namespace deto

#endif  // DETO_ACQUISITION_HPP
