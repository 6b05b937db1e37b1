#include "deto/acquisition.hpp"

#include <algorithm>
#include <numeric>

#include "deto/lhs.hpp"

namespace deto {

namespace {

double ucb_from(double mean, double variance, double omega) {
    return mean + omega * std::sqrt(std::max(variance, 0.0));
}

Vector ucb_grad_from(const Vector& mean_grad, const Vector& var_grad, double variance,
                     double omega) {
    const double sigma = std::sqrt(std::max(variance, 0.0));
    return mean_grad + (omega / (2.0 * std::max(sigma, 1e-8))) * var_grad;
}

}  // namespace

double ucb(const GPModel& model, const Vector& z, double omega) {
    const auto [mean, variance] = model.predict(z);
    return ucb_from(mean, variance, omega);
}

double ucb(const MOGPModel& model, const Vector& z, int task, double omega) {
    const auto [mean, variance] = model.predict(z, task);
    return ucb_from(mean, variance, omega);
}

Vector ucb_grad(const GPModel& model, const Vector& z, double omega) {
    const auto [mean, variance] = model.predict(z);
    (void)mean;
    return ucb_grad_from(model.mean_grad(z), model.variance_grad(z), variance, omega);
}

Vector ucb_grad(const MOGPModel& model, const Vector& z, int task, double omega) {
    const auto [mean, variance] = model.predict(z, task);
    (void)mean;
    return ucb_grad_from(model.mean_grad(z, task), model.variance_grad(z, task), variance,
                         omega);
}

AcqObjective make_ucb_objective(const GPModel& model, double omega) {
    AcqObjective obj;
    obj.bounds = model.bounds();
    obj.value_and_grad = [&model, omega](const Vector& z, Vector* grad) {
        const auto [mean, variance] = model.predict(z);
        if (grad)
            *grad = ucb_grad_from(model.mean_grad(z), model.variance_grad(z), variance, omega);
        return ucb_from(mean, variance, omega);
    };
    return obj;
}

AcqObjective make_ucb_objective(const MOGPModel& model, int task, double omega) {
    AcqObjective obj;
    obj.bounds = model.bounds();
    obj.value_and_grad = [&model, task, omega](const Vector& z, Vector* grad) {
        const auto [mean, variance] = model.predict(z, task);
        if (grad)
            *grad = ucb_grad_from(model.mean_grad(z, task), model.variance_grad(z, task),
                                  variance, omega);
        return ucb_from(mean, variance, omega);
    };
    return obj;
}

Matrix de_step(const Matrix& population, double weight, double crossover_rate,
               const Box& bounds, Rng& rng) {
    const int n_pop = static_cast<int>(population.rows());
    const int dim = static_cast<int>(population.cols());
    if (n_pop < 4) throw std::invalid_argument("de_step: population size must be >= 4");

    Matrix trials(n_pop, dim);
    for (int i = 0; i < n_pop; ++i) {
        int r1, r2, r3;
        do { r1 = rng.uniform_int(n_pop); } while (r1 == i);
        do { r2 = rng.uniform_int(n_pop); } while (r2 == i || r2 == r1);
        do { r3 = rng.uniform_int(n_pop); } while (r3 == i || r3 == r1 || r3 == r2);

        const Vector mutant = population.row(r1).transpose()
                              + weight * (population.row(r2) - population.row(r3)).transpose();
        const int j_rand = rng.uniform_int(dim);
        for (int j = 0; j < dim; ++j) {
            const bool take = rng.uniform() < crossover_rate || j == j_rand;
            const double v = take ? mutant[j] : population(i, j);
            trials(i, j) = std::min(std::max(v, bounds.lower[j]), bounds.upper[j]);
        }
    }
    return trials;
}

Vector optimize_acquisition(const AcqObjective& objective, const AcqConfig& cfg, Rng& rng) {
    cfg.validate();
    const Box& bounds = objective.bounds;
    const int n_pop = cfg.pop_size;
    const auto eval = [&](const Vector& x) { return objective.value_and_grad(x, nullptr); };

    Matrix pop = lhs_sample(n_pop, bounds, rng);
    Vector values(n_pop);
    for (int i = 0; i < n_pop; ++i) values[i] = eval(pop.row(i).transpose());

    int kappa = cfg.kappa_init;

    for (int gen = 0; gen < cfg.generations; ++gen) {
        if (cfg.mode == AcqOptimizerMode::AscentOnly) {
            for (int i = 0; i < n_pop; ++i) {
                const Vector refined = local_ascent(pop.row(i).transpose(),
                                                    objective.value_and_grad, bounds,
                                                    cfg.ascent);
                pop.row(i) = refined.transpose();
                values[i] = eval(refined);
            }
            continue;
        }

        const Matrix trials =
            de_step(pop, cfg.de_weight, cfg.crossover_rate, bounds, rng);
        Matrix merged(2 * n_pop, pop.cols());
        merged.topRows(n_pop) = pop;
        merged.bottomRows(n_pop) = trials;
        Vector merged_values(2 * n_pop);
        merged_values.head(n_pop) = values;
        for (int i = 0; i < n_pop; ++i)
            merged_values[n_pop + i] = eval(trials.row(i).transpose());

        std::vector<int> order(2 * n_pop);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return merged_values[a] > merged_values[b];
        });

        if (cfg.mode == AcqOptimizerMode::Hybrid) {
            const int archive = std::min(kappa, 2 * n_pop);
            for (int a = 0; a < archive; ++a) {
                const int idx = order[a];
                const Vector before = merged.row(idx).transpose();
                const Vector refined =
                    local_ascent(before, objective.value_and_grad, bounds, cfg.ascent);
                merged.row(idx) = refined.transpose();
                merged_values[idx] = eval(refined);
                // Small actual movement means local search has little left
                // to give; shrink its scale, otherwise grow it.
                if (bounds.normalized_distance(refined, before) < cfg.eps_d)
                    kappa = std::max(kappa - 1, 1);
                else
                    kappa = std::min(kappa + 1, 2 * n_pop);
            }
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return merged_values[a] > merged_values[b];
            });
        }

        Matrix next(n_pop, pop.cols());
        Vector next_values(n_pop);
        for (int i = 0; i < n_pop; ++i) {
            next.row(i) = merged.row(order[i]);
            next_values[i] = merged_values[order[i]];
        }
        pop = std::move(next);
        values = std::move(next_values);
    }

    int best = 0;
    values.maxCoeff(&best);
    return pop.row(best).transpose();
}

}  // namespace deto
