#ifndef DETO_METRICS_HPP
#define DETO_METRICS_HPP

#include <span>
#include <vector>

#include "deto/optimizer.hpp"

namespace deto {

/// Loss summaries of one run against the true per-step optima:
///   eps_f  mean over every evaluation of (optimum - best so far),
///   eps_t  mean over steps of the end-of-step loss,
///   loss_traj  the per-evaluation loss series, one vector per step.
struct MetricReport {
    double eps_f = 0.0;
    double eps_t = 0.0;
    std::vector<std::vector<double>> loss_traj;
};

/// Per-step true optimum values; taken from a RunRecord's embedded optima.
std::vector<double> optima_of(const RunRecord& record);

MetricReport error_metrics(const RunRecord& record, const std::vector<double>& optima);

inline MetricReport error_metrics(const RunRecord& record) {
    return error_metrics(record, optima_of(record));
}

/// Budget ratio against the per-step best algorithm. For each step the best
/// final value over all records defines the reference; each algorithm's
/// per-step term is (evaluations to match the reference) / (reference
/// algorithm's evaluations to reach it), with misses capped at cap_factor
/// times the step budget. Records must come from the same problem instance.
std::vector<double> rho_c(const std::vector<const RunRecord*>& records,
                          double cap_factor = 8.0);

/// Budget ratio against a restart baseline: per step, the candidate's
/// evaluations to match the baseline's best over the baseline's evaluations
/// to reach it (same cap). Values below 1 indicate effective transfer.
double rho_t(const RunRecord& candidate, const RunRecord& baseline, double cap_factor = 8.0);

/// Two-sided Wilcoxon signed-rank p-value on paired samples. Zero
/// differences are dropped (p = 1 when nothing remains); exact enumeration
/// up to 20 remaining pairs, normal approximation with tie correction above.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Vargha-Delaney effect size: probability that a value drawn from `a`
/// exceeds one from `b` (ties count half).
struct EffectSize {
    enum class Category { Equal, Small, Medium, Large };
    double a12 = 0.5;
    Category category = Category::Equal;
};

EffectSize a12(std::span<const double> a, std::span<const double> b);

/// One-sided sign test: P(Bin(trials, 1/2) >= successes).
double sign_test_p(int successes, int trials);

}  // namespace deto

#endif  // DETO_METRICS_HPP
