#include "deto/optimizer.hpp"

#include <chrono>
#include <stdexcept>

namespace deto {

namespace {

// Appends one evaluation to the step record and the working dataset.
void record_evaluation(DynamicProblem& problem, int t, StepRecord& rec, Dataset& data,
                       const Vector& x) {
    const double y = problem.evaluate(x, t);
    const int slot = rec.evaluations();
    rec.xs.conservativeResize(slot + 1, Eigen::NoChange);
    rec.xs.row(slot) = x.transpose();
    rec.ys.conservativeResize(slot + 1);
    rec.ys[slot] = y;
    rec.best_so_far.conservativeResize(slot + 1);
    rec.best_so_far[slot] = slot == 0 ? y : std::max(rec.best_so_far[slot - 1], y);
    data.add(x, y);
}

// Fallback evaluation source when the surrogate cannot produce a usable
// candidate: a pre-drawn Latin hypercube pool, consumed in order.
struct BackupPool {
    Matrix points;
    int used = 0;

    Vector next(const Dataset& data, Rng& rng, const Box& bounds) {
        while (used < points.rows()) {
            Vector x = points.row(used++).transpose();
            if (!data.would_duplicate(x)) return x;
        }
        for (int attempt = 0; attempt < 1000; ++attempt) {
            Vector x(bounds.dim());
            for (int d = 0; d < bounds.dim(); ++d)
                x[d] = rng.uniform(bounds.lower[d], bounds.upper[d]);
            if (!data.would_duplicate(x)) return x;
        }
        throw std::runtime_error("BackupPool: could not draw a fresh point");
    }
};

// Single pooled dataset for the window baseline; time tags are ignored and
// cross-step duplicate inputs are dropped.
Dataset pool_recent(const std::vector<Dataset>& past, const Dataset& current, int window) {
    Dataset pooled(current.bounds(), current.time_step());
    const int first =
        std::max(0, static_cast<int>(past.size()) - (window - 1));
    for (size_t i = first; i < past.size(); ++i) {
        for (int j = 0; j < past[i].size(); ++j) {
            const Vector x = past[i].input(j);
            if (!pooled.would_duplicate(x)) pooled.add(x, past[i].values()[j]);
        }
    }
    for (int j = 0; j < current.size(); ++j) {
        const Vector x = current.input(j);
        if (!pooled.would_duplicate(x)) pooled.add(x, current.values()[j]);
    }
    return pooled;
}

}  // namespace

RunRecord run(const AlgorithmConfig& algo, DynamicProblem& problem,
              const BudgetSchedule& schedule, Rng& rng) {
    schedule.validate();
    algo.acq.validate();
    const Box bounds = problem.bounds();

    RunRecord record;
    record.dim = bounds.dim();

    HyperparamArchive archive;
    std::vector<GPModel> step_models;  // fitted on each completed step's data
    std::vector<Dataset> past_data;

    for (int t = 1; t <= schedule.steps; ++t) {
        const auto t_begin = std::chrono::steady_clock::now();
        StepRecord rec;
        rec.step = t;
        rec.xs.resize(0, bounds.dim());
        std::tie(rec.optimum_x, rec.optimum_value) = problem.optimum();

        Dataset data(bounds, t);
        BackupPool backup{lhs_sample(schedule.total(t), bounds, rng), 0};

        // Transfer preparation comes before the step's own sampling: pick
        // source steps and mine their cached models for pseudo-labeled
        // starting data. Under random initialization (the warm-start
        // ablation) no pseudo data is produced and the surrogate sees only
        // the step's own samples.
        std::vector<Dataset> augmented;
        if (algo.kind == AlgorithmKind::DETO && t >= 2 && algo.warm_init) {
            const std::vector<int> sources =
                select_sources(archive, algo.source_count, rng, algo.source_policy);
            std::vector<const GPModel*> models;
            for (int s : sources) models.push_back(&step_models[s - 1]);
            const auto built = build_augmented(models, algo.warm, rng);
            for (auto& d : built)
                if (!d.empty()) augmented.push_back(d);
        }

        const Matrix init = lhs_sample(schedule.initial(t), bounds, rng);
        for (int i = 0; i < init.rows(); ++i)
            record_evaluation(problem, t, rec, data, init.row(i).transpose());

        while (rec.evaluations() < schedule.total(t)) {
            Vector candidate;
            bool have_candidate = false;
            try {
                FitConfig fit = algo.fit;
                fit.seed = rng.next_u64();
                if (algo.kind == AlgorithmKind::DETO && t >= 2 && !augmented.empty()) {
                    std::vector<Dataset> tasks = augmented;
                    tasks.push_back(data);
                    CoregionalizationSpec spec{algo.surrogate,
                                               static_cast<int>(tasks.size()),
                                               algo.lmc_rank};
                    const MOGPModel model = MOGPModel::fit(std::move(tasks), spec, fit);
                    candidate = optimize_acquisition(model, spec.tasks, algo.acq, rng);
                } else if (algo.kind == AlgorithmKind::CBO) {
                    const Dataset pooled = pool_recent(past_data, data, algo.cbo_window);
                    const GPModel model = GPModel::fit(pooled, fit);
                    candidate = optimize_acquisition(model, algo.acq, rng);
                } else {
                    const GPModel model = GPModel::fit(data, fit);
                    candidate = optimize_acquisition(model, algo.acq, rng);
                }
                have_candidate = true;
            } catch (const std::runtime_error&) {
                ++rec.surrogate_failures;
            }
            if (have_candidate && data.would_duplicate(candidate)) {
                // Degenerate suggestion; budget accounting must stay exact,
                // so spend the evaluation on a fresh space-filling point.
                ++rec.surrogate_failures;
                have_candidate = false;
            }
            if (!have_candidate) candidate = backup.next(data, rng, bounds);
            record_evaluation(problem, t, rec, data, candidate);
        }

        int best_index = 0;
        rec.ys.maxCoeff(&best_index);
        rec.incumbent = rec.xs.row(best_index).transpose();
        rec.incumbent_value = rec.ys[best_index];

        // Cache the finished step's single-output model: its hyperparameters
        // feed source selection and its posterior is mined for warm starts.
        // A failed fit falls back to heuristic hyperparameters rather than
        // aborting the run.
        if (algo.kind == AlgorithmKind::DETO && t < schedule.steps) {
            FitConfig fit = algo.fit;
            fit.seed = rng.next_u64();
            try {
                step_models.push_back(GPModel::fit(data, fit));
            } catch (const std::runtime_error&) {
                ++rec.surrogate_failures;
                const KernelParams heuristic{std::max(data.value_variance(), 1e-6),
                                             bounds.max_range() / 4.0};
                step_models.push_back(GPModel::with_params(data, heuristic));
            }
            archive.add(t, step_models.back().params());
        }
        past_data.push_back(std::move(data));

        rec.wall_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t_begin).count();
        record.steps.push_back(std::move(rec));
        if (t < schedule.steps) problem.advance();
    }
    return record;
}

}  // namespace deto
