#include <doctest.h>

#include <set>

#include "deto/optimizer.hpp"

using namespace deto;

namespace {

// Small budgets and cheap settings keep these runs fast; the full-scale
// budgets are exercised by the acceptance suite.
BudgetSchedule tiny_schedule(int steps) {
    BudgetSchedule s;
    s.steps = steps;
    s.first_total = 10;
    s.first_initial = 5;
    s.later_total = 7;
    s.later_initial = 2;
    s.validate();
    return s;
}

AlgorithmConfig fast_config(AlgorithmKind kind) {
    AlgorithmConfig cfg;
    cfg.kind = kind;
    cfg.acq.pop_size = 8;
    cfg.acq.generations = 4;
    cfg.fit.multistarts = 2;
    cfg.fit.max_iters = 50;
    cfg.warm.sigma = 2;
    cfg.warm.max_iters = 40;
    cfg.warm.random_starts_per_dim = 3;
    return cfg;
}

MPBConfig tiny_problem(int dim = 1) {
    return MPBConfig::standard(dim, 3, PeakShape::Cone, 1.0, 1.0);
}

bool records_equal(const RunRecord& a, const RunRecord& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (size_t t = 0; t < a.steps.size(); ++t) {
        const StepRecord& x = a.steps[t];
        const StepRecord& y = b.steps[t];
        if (x.evaluations() != y.evaluations()) return false;
        if ((x.xs - y.xs).cwiseAbs().maxCoeff() != 0.0) return false;
        if ((x.ys - y.ys).cwiseAbs().maxCoeff() != 0.0) return false;
        if ((x.best_so_far - y.best_so_far).cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("latin hypercube sampling is stratified") {
    Rng rng(3);
    const Box bounds = Box::cube(1, 0.0, 10.0);
    const Matrix one = lhs_sample(1, bounds, rng);
    CHECK(one.rows() == 1);
    CHECK(bounds.contains(one.row(0).transpose()));

    const Matrix ten = lhs_sample(10, bounds, rng);
    std::set<int> strata;
    for (int i = 0; i < 10; ++i) {
        CHECK(bounds.contains(ten.row(i).transpose()));
        strata.insert(static_cast<int>(ten(i, 0)));  // unit-width strata
    }
    CHECK(strata.size() == 10);

    Rng r1(7), r2(7);
    const Matrix a = lhs_sample(6, Box::cube(3, -1.0, 1.0), r1);
    const Matrix b = lhs_sample(6, Box::cube(3, -1.0, 1.0), r2);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("budget accounting is exact for every algorithm") {
    const BudgetSchedule schedule = tiny_schedule(3);
    for (const AlgorithmKind kind :
         {AlgorithmKind::DETO, AlgorithmKind::RBO, AlgorithmKind::CBO}) {
        DynamicProblem problem(tiny_problem(), 41);
        Rng rng(99);
        const RunRecord rec = run(fast_config(kind), problem, schedule, rng);
        REQUIRE(rec.steps.size() == 3);
        CHECK(rec.steps[0].evaluations() == 10);
        CHECK(rec.steps[1].evaluations() == 7);
        CHECK(rec.steps[2].evaluations() == 7);
        CHECK(problem.evaluations() == 24);
    }
}

TEST_CASE("running best is non-decreasing and consistent") {
    DynamicProblem problem(tiny_problem(), 43);
    Rng rng(5);
    const RunRecord rec = run(fast_config(AlgorithmKind::DETO), problem, tiny_schedule(3), rng);
    for (const StepRecord& s : rec.steps) {
        double best = -1e300;
        for (int i = 0; i < s.evaluations(); ++i) {
            best = std::max(best, s.ys[i]);
            CHECK(s.best_so_far[i] == best);
            if (i > 0) CHECK(s.best_so_far[i] >= s.best_so_far[i - 1]);
        }
        CHECK(s.incumbent_value == best);
        CHECK(s.optimum_value >= best - 1e-9);  // benchmark optimum upper-bounds
    }
}

TEST_CASE("identical seeds give identical runs") {
    const BudgetSchedule schedule = tiny_schedule(2);
    DynamicProblem p1(tiny_problem(), 47), p2(tiny_problem(), 47);
    Rng r1(11), r2(11);
    const RunRecord a = run(fast_config(AlgorithmKind::DETO), p1, schedule, r1);
    const RunRecord b = run(fast_config(AlgorithmKind::DETO), p2, schedule, r2);
    CHECK(records_equal(a, b));
}

TEST_CASE("a single-step transfer run is the restart run") {
    const BudgetSchedule schedule = tiny_schedule(1);
    DynamicProblem p1(tiny_problem(), 53), p2(tiny_problem(), 53);
    Rng r1(13), r2(13);
    const RunRecord deto_rec = run(fast_config(AlgorithmKind::DETO), p1, schedule, r1);
    const RunRecord rbo_rec = run(fast_config(AlgorithmKind::RBO), p2, schedule, r2);
    CHECK(records_equal(deto_rec, rbo_rec));
}

TEST_CASE("ablation switches all execute within budget") {
    const BudgetSchedule schedule = tiny_schedule(3);
    std::vector<AlgorithmConfig> variants;
    {
        AlgorithmConfig v = fast_config(AlgorithmKind::DETO);  // v1
        v.surrogate = CoregKind::LMC;
        v.lmc_rank = 1;
        variants.push_back(v);
    }
    for (const SourcePolicy p :
         {SourcePolicy::Recent, SourcePolicy::Similar, SourcePolicy::Random}) {  // v2-v4
        AlgorithmConfig v = fast_config(AlgorithmKind::DETO);
        v.source_policy = p;
        variants.push_back(v);
    }
    {
        AlgorithmConfig v = fast_config(AlgorithmKind::DETO);  // v5
        v.warm_init = false;
        variants.push_back(v);
    }
    for (const AcqOptimizerMode m : {AcqOptimizerMode::DeOnly, AcqOptimizerMode::AscentOnly}) {
        AlgorithmConfig v = fast_config(AlgorithmKind::DETO);  // v6, v7
        v.acq.mode = m;
        variants.push_back(v);
    }

    int seed = 100;
    for (const AlgorithmConfig& v : variants) {
        DynamicProblem problem(tiny_problem(), 59);
        Rng rng(seed++);
        const RunRecord rec = run(v, problem, schedule, rng);
        CHECK(rec.total_evaluations() == 24);
        CHECK(problem.evaluations() == 24);
    }
}

TEST_CASE("degenerate suggestions fall back without breaking the budget") {
    // A pure-exploitation acquisition re-suggests the incumbent once the
    // model is confident, which triggers the duplicate guard.
    AlgorithmConfig cfg = fast_config(AlgorithmKind::RBO);
    cfg.acq.omega = 0.0;
    cfg.acq.generations = 6;
    DynamicProblem problem(tiny_problem(), 61);
    Rng rng(17);
    const RunRecord rec = run(cfg, problem, tiny_schedule(2), rng);
    CHECK(rec.total_evaluations() == 17);
    CHECK(problem.evaluations() == 17);
}

TEST_CASE("pseudo data never touches the evaluation counter") {
    AlgorithmConfig cfg = fast_config(AlgorithmKind::DETO);
    cfg.warm.sigma = 4;
    DynamicProblem problem(tiny_problem(), 67);
    Rng rng(19);
    const RunRecord rec = run(cfg, problem, tiny_schedule(3), rng);
    CHECK(problem.evaluations() == rec.total_evaluations());
}

}  // TEST_SUITE
