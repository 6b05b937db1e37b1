#include "deto/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace deto {

std::vector<double> optima_of(const RunRecord& record) {
    std::vector<double> v;
    for (const auto& s : record.steps) v.push_back(s.optimum_value);
    return v;
}

MetricReport error_metrics(const RunRecord& record, const std::vector<double>& optima) {
    if (optima.size() != record.steps.size())
        throw std::invalid_argument("error_metrics: optima/step count mismatch");
    MetricReport rep;
    long total_fes = 0;
    double sum_all = 0.0, sum_steps = 0.0;
    for (size_t s = 0; s < record.steps.size(); ++s) {
        const StepRecord& step = record.steps[s];
        if (step.evaluations() == 0)
            throw std::invalid_argument("error_metrics: empty step record");
        std::vector<double> losses(step.evaluations());
        for (int i = 0; i < step.evaluations(); ++i) {
            losses[i] = optima[s] - step.best_so_far[i];
            sum_all += losses[i];
        }
        total_fes += step.evaluations();
        sum_steps += losses.back();
        rep.loss_traj.push_back(std::move(losses));
    }
    rep.eps_f = sum_all / static_cast<double>(total_fes);
    rep.eps_t = sum_steps / static_cast<double>(record.steps.size());
    return rep;
}

namespace {

// First 1-based evaluation index whose running best reaches `value`; -1 if
// the step never matches it.
int first_match(const StepRecord& step, double value) {
    for (int i = 0; i < step.evaluations(); ++i)
        if (step.best_so_far[i] >= value) return i + 1;
    return -1;
}

}  // namespace

std::vector<double> rho_c(const std::vector<const RunRecord*>& records, double cap_factor) {
    if (records.empty()) throw std::invalid_argument("rho_c: no records");
    const size_t steps = records.front()->steps.size();
    for (const auto* r : records)
        if (!r || r->steps.size() != steps)
            throw std::invalid_argument("rho_c: records cover different steps");

    std::vector<double> sums(records.size(), 0.0);
    for (size_t t = 0; t < steps; ++t) {
        double ref = -std::numeric_limits<double>::infinity();
        for (const auto* r : records)
            ref = std::max(ref, r->steps[t].best_so_far[r->steps[t].evaluations() - 1]);
        // The best algorithm's evaluations to reach its best value; ties on
        // the value go to the earliest achiever.
        int ref_fes = std::numeric_limits<int>::max();
        for (const auto* r : records) {
            const int m = first_match(r->steps[t], ref);
            if (m > 0) ref_fes = std::min(ref_fes, m);
        }
        for (size_t a = 0; a < records.size(); ++a) {
            const StepRecord& step = records[a]->steps[t];
            int m = first_match(step, ref);
            if (m < 0) m = static_cast<int>(cap_factor * step.evaluations());
            sums[a] += static_cast<double>(m) / static_cast<double>(ref_fes);
        }
    }
    for (double& s : sums) s /= static_cast<double>(steps);
    return sums;
}

double rho_t(const RunRecord& candidate, const RunRecord& baseline, double cap_factor) {
    if (candidate.steps.size() != baseline.steps.size())
        throw std::invalid_argument("rho_t: records cover different steps");
    double sum = 0.0;
    for (size_t t = 0; t < candidate.steps.size(); ++t) {
        const StepRecord& base = baseline.steps[t];
        const double target = base.best_so_far[base.evaluations() - 1];
        const int base_fes = first_match(base, target);
        int m = first_match(candidate.steps[t], target);
        if (m < 0) m = static_cast<int>(cap_factor * candidate.steps[t].evaluations());
        sum += static_cast<double>(m) / static_cast<double>(base_fes);
    }
    return sum / static_cast<double>(candidate.steps.size());
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("wilcoxon_signed_rank: sample length mismatch");
    if (a.empty()) throw std::invalid_argument("wilcoxon_signed_rank: empty samples");

    std::vector<double> diffs;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    const int m = static_cast<int>(diffs.size());
    if (m == 0) return 1.0;

    // Midranks of |d|.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> ranks(m, 0.0);
    std::vector<int> tie_sizes;
    for (int i = 0; i < m;) {
        int j = i;
        while (j < m && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const double mid = 0.5 * (i + 1 + j);  // average of ranks i+1 .. j
        for (int k = i; k < j; ++k) ranks[order[k]] = mid;
        tie_sizes.push_back(j - i);
        i = j;
    }

    double w_plus = 0.0;
    for (int i = 0; i < m; ++i)
        if (diffs[i] > 0.0) w_plus += ranks[i];

    if (m <= 20) {
        // Exact null: every sign assignment equally likely.
        const std::uint64_t total = 1ULL << m;
        std::uint64_t le = 0, ge = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double w = 0.0;
            for (int i = 0; i < m; ++i)
                if (mask & (1ULL << i)) w += ranks[i];
            if (w <= w_plus + 1e-12) ++le;
            if (w >= w_plus - 1e-12) ++ge;
        }
        const double p = 2.0 * std::min(static_cast<double>(le), static_cast<double>(ge))
                         / static_cast<double>(total);
        return std::min(p, 1.0);
    }

    const double mu = m * (m + 1) / 4.0;
    double var = m * (m + 1) * (2.0 * m + 1) / 24.0;
    for (int t : tie_sizes) var -= (static_cast<double>(t) * t * t - t) / 48.0;
    if (var <= 0.0) return 1.0;
    double z = w_plus - mu;
    z -= 0.5 * (z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0));  // continuity correction
    z /= std::sqrt(var);
    return std::min(2.0 * (1.0 - normal_cdf(std::abs(z))), 1.0);
}

EffectSize a12(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("a12: empty samples");
    double wins = 0.0;
    for (const double x : a)
        for (const double y : b) {
            if (x > y) wins += 1.0;
            else if (x == y) wins += 0.5;
        }
    EffectSize e;
    e.a12 = wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    const double v = std::max(e.a12, 1.0 - e.a12);
    if (v >= 0.71) e.category = EffectSize::Category::Large;
    else if (v >= 0.64) e.category = EffectSize::Category::Medium;
    else if (v >= 0.56) e.category = EffectSize::Category::Small;
    else e.category = EffectSize::Category::Equal;
    return e;
}

double sign_test_p(int successes, int trials) {
    if (trials < 0 || successes < 0 || successes > trials)
        throw std::invalid_argument("sign_test_p: invalid counts");
    if (trials == 0) return 1.0;
    double p = 0.0;
    for (int i = successes; i <= trials; ++i) {
        double c = 1.0;
        for (int j = 0; j < i; ++j) c = c * (trials - j) / (j + 1);
        p += c;
    }
    return std::min(p * std::pow(0.5, trials), 1.0);
}

}  // namespace deto
