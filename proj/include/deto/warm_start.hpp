#ifndef DETO_WARM_START_HPP
#define DETO_WARM_START_HPP

#include <vector>

#include "deto/ascent.hpp"
#include "deto/dataset.hpp"
#include "deto/gp.hpp"
#include "deto/rng.hpp"

namespace deto {

/// Settings for mining a source model's posterior-mean landscape.
struct WarmStartConfig {
    int sigma = 5;                  // samples kept per source
    double eps_l = 0.0;             // diversity threshold; 0 -> 1e-2 * max box range
    int max_iters = 200;            // ascent iterations per start
    double step_tol = 0.0;          // 0 -> 1e-8 * max box range
    int random_starts_per_dim = 10; // extra uniform starts beyond the training inputs

    double resolved_eps_l(const Box& bounds) const {
        return eps_l > 0.0 ? eps_l : 1e-2 * bounds.max_range();
    }
};

struct LocalOptimum {
    Vector x;
    double value = 0.0;  // posterior mean at x (pseudo objective value)
};

/// Local maxima of the posterior mean, found by projected gradient ascent
/// from every training input plus 10n uniform starts. Only points whose
/// projected gradient inf-norm is at most 1e-5 * gamma / R survive; points
/// within eps_l of a better one are dropped. Sorted descending by value. May
/// be empty.
std::vector<LocalOptimum> extract_local_optima(const GPModel& model,
                                               const WarmStartConfig& cfg, Rng& rng);

/// Greedy scan in value order: keep a candidate iff it is at least eps_l
/// away from everything kept so far; stop once sigma are kept. Expects the
/// input sorted descending by value.
std::vector<LocalOptimum> diversity_filter(const std::vector<LocalOptimum>& candidates,
                                           int sigma, double eps_l);

/// One pseudo-labeled dataset per source model: extracted local optima,
/// diversity-filtered, values taken from the source's posterior mean. Costs
/// zero true function evaluations.
std::vector<Dataset> build_augmented(const std::vector<const GPModel*>& sources,
                                     const WarmStartConfig& cfg, Rng& rng);

}  // namespace deto

#endif  // DETO_WARM_START_HPP
