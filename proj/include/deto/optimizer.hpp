#ifndef DETO_OPTIMIZER_HPP
#define DETO_OPTIMIZER_HPP

#include <string>
#include <vector>

#include "deto/acquisition.hpp"
#include "deto/benchmark.hpp"
#include "deto/lhs.hpp"
#include "deto/mogp.hpp"
#include "deto/source_select.hpp"
#include "deto/warm_start.hpp"

namespace deto {

/// Per-step function-evaluation budgets. The first step gets 2(11n - 1)
/// evaluations with 11n - 1 spent on initial sampling; later steps get 9n
/// with 2n initial.
struct BudgetSchedule {
    int steps = 10;
    int first_total = 0, first_initial = 0;
    int later_total = 0, later_initial = 0;

    static BudgetSchedule standard(int dim, int steps) {
        BudgetSchedule s;
        s.steps = steps;
        s.first_initial = 11 * dim - 1;
        s.first_total = 2 * s.first_initial;
        s.later_initial = 2 * dim;
        s.later_total = 9 * dim;
        s.validate();
        return s;
    }

    int total(int step) const { return step == 1 ? first_total : later_total; }
    int initial(int step) const { return step == 1 ? first_initial : later_initial; }

    void validate() const {
        if (steps < 1) throw std::invalid_argument("BudgetSchedule: steps must be >= 1");
        if (first_initial < 1 || later_initial < 1 || first_initial > first_total
            || later_initial > later_total)
            throw std::invalid_argument("BudgetSchedule: initial samples must fit the budget");
    }
};

enum class AlgorithmKind { DETO, RBO, CBO };

/// Full algorithm configuration, including the ablation switches. The
/// defaults are the transfer optimizer's own column: hierarchical surrogate,
/// adaptive source selection, warm start, hybrid acquisition optimizer.
struct AlgorithmConfig {
    AlgorithmKind kind = AlgorithmKind::DETO;
    CoregKind surrogate = CoregKind::HMOGP;
    int lmc_rank = 0;  // 0 -> number of tasks
    SourcePolicy source_policy = SourcePolicy::Adaptive;
    bool warm_init = true;
    int source_count = 3;  // k selected source steps
    int cbo_window = 5;    // CBO pools this many most recent steps
    AcqConfig acq;
    WarmStartConfig warm;
    FitConfig fit;
};

/// Everything observed during one run: per-step evaluations in order, the
/// running best, the step-end incumbent, and the true optimum for metrics.
struct StepRecord {
    int step = 1;
    Matrix xs;                        // one evaluated point per row
    Vector ys;                        // matching objective values
    Vector best_so_far;               // running max of ys
    Vector incumbent;                 // argmax at step end
    double incumbent_value = 0.0;
    Vector optimum_x;
    double optimum_value = 0.0;
    double wall_seconds = 0.0;
    int surrogate_failures = 0;

    int evaluations() const { return static_cast<int>(ys.size()); }
};

struct RunRecord {
    std::string algorithm_id;
    std::string problem_id;
    int repetition = 0;
    std::uint64_t seed = 0;
    std::uint64_t instance_seed = 0;
    int dim = 0;
    std::vector<StepRecord> steps;

    long total_evaluations() const {
        long n = 0;
        for (const auto& s : steps) n += s.evaluations();
        return n;
    }
};

/// Executes one full dynamic-optimization run over `problem`, consuming the
/// budget exactly. Deterministic for a fixed rng seed and config.
RunRecord run(const AlgorithmConfig& algo, DynamicProblem& problem,
              const BudgetSchedule& schedule, Rng& rng);

}  // namespace deto

#endif  // DETO_OPTIMIZER_HPP
