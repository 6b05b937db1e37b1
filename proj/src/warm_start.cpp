#include "deto/warm_start.hpp"

#include <algorithm>
#include <stdexcept>

namespace deto {

std::vector<LocalOptimum> extract_local_optima(const GPModel& model,
                                               const WarmStartConfig& cfg, Rng& rng) {
    if (cfg.sigma < 1) throw std::invalid_argument("extract_local_optima: sigma must be >= 1");
    const Box& bounds = model.bounds();
    const int n = bounds.dim();
    const double range = bounds.max_range();
    const double eps_l = cfg.resolved_eps_l(bounds);
    const double grad_tol = 1e-5 * model.params().gamma / range;

    DifferentiableObjective mean = [&](const Vector& x, Vector* grad) {
        if (grad) *grad = model.mean_grad(x);
        return model.predict(x).first;
    };

    std::vector<Vector> starts;
    for (int i = 0; i < model.data().size(); ++i) starts.push_back(model.data().input(i));
    for (int i = 0; i < cfg.random_starts_per_dim * n; ++i) {
        Vector x(n);
        for (int d = 0; d < n; ++d) x[d] = rng.uniform(bounds.lower[d], bounds.upper[d]);
        starts.push_back(std::move(x));
    }

    AscentConfig acfg;
    acfg.max_iters = cfg.max_iters;
    acfg.step_tol = cfg.step_tol > 0.0 ? cfg.step_tol : 1e-8 * range;

    std::vector<LocalOptimum> found;
    for (const Vector& x0 : starts) {
        const Vector x = local_ascent(x0, mean, bounds, acfg);
        const Vector g = model.mean_grad(x);
        if (projected_gradient_norm(x, g, bounds) > grad_tol) continue;
        found.push_back({x, model.predict(x).first});
    }

    std::stable_sort(found.begin(), found.end(),
                     [](const LocalOptimum& a, const LocalOptimum& b) {
                         return a.value > b.value;
                     });

    // Converged starts pile up on the same maxima; keep one representative
    // per eps_l neighborhood, best first.
    std::vector<LocalOptimum> unique;
    for (const auto& cand : found) {
        bool dominated = false;
        for (const auto& kept : unique) {
            if ((cand.x - kept.x).norm() < eps_l) {
                dominated = true;
                break;
            }
        }
        if (!dominated) unique.push_back(cand);
    }
    return unique;
}

std::vector<LocalOptimum> diversity_filter(const std::vector<LocalOptimum>& candidates,
                                           int sigma, double eps_l) {
    if (sigma < 1) throw std::invalid_argument("diversity_filter: sigma must be >= 1");
    if (eps_l <= 0.0) throw std::invalid_argument("diversity_filter: eps_l must be > 0");
    std::vector<LocalOptimum> kept;
    for (const auto& cand : candidates) {
        if (static_cast<int>(kept.size()) >= sigma) break;
        bool ok = true;
        for (const auto& k : kept) {
            if ((cand.x - k.x).norm() < eps_l) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(cand);
    }
    return kept;
}

std::vector<Dataset> build_augmented(const std::vector<const GPModel*>& sources,
                                     const WarmStartConfig& cfg, Rng& rng) {
    std::vector<Dataset> out;
    for (const GPModel* src : sources) {
        if (!src) throw std::invalid_argument("build_augmented: null source model");
        const double eps_l = cfg.resolved_eps_l(src->bounds());
        const auto optima = extract_local_optima(*src, cfg, rng);
        const auto picked = diversity_filter(optima, cfg.sigma, eps_l);
        Dataset aug(src->bounds(), src->data().time_step(), /*pseudo=*/true);
        for (const auto& p : picked) aug.add(p.x, p.value);
        out.push_back(std::move(aug));
    }
    return out;
}

}  // namespace deto
