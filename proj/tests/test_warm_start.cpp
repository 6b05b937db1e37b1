#include <doctest.h>

#include "deto/warm_start.hpp"
#include "oracles.hpp"

using namespace deto;

namespace {

Vector vec1(double x) {
    Vector v(1);
    v << x;
    return v;
}

// Samples of a single smooth bump centered at c.
GPModel peak_model(double c, double height, Rng& rng, int samples = 7) {
    Dataset d(Box::cube(1, 0.0, 10.0), 1);
    for (int i = 0; i < samples; ++i) {
        const double x = 10.0 * i / (samples - 1);
        d.add(vec1(x), height * std::exp(-(x - c) * (x - c) / 4.0) + 1e-3 * rng.uniform());
    }
    FitConfig cfg;
    cfg.seed = rng.next_u64();
    return GPModel::fit(d, cfg);
}

GPModel bimodal_model(Rng& rng) {
    Dataset d(Box::cube(1, 0.0, 10.0), 1);
    for (int i = 0; i < 11; ++i) {
        const double x = i;
        const double y = std::exp(-(x - 2.5) * (x - 2.5) / 1.5)
                         + std::exp(-(x - 7.5) * (x - 7.5) / 1.5);
        d.add(vec1(x), y + 1e-4 * rng.uniform());
    }
    FitConfig cfg;
    cfg.seed = rng.next_u64();
    return GPModel::fit(d, cfg);
}

std::vector<LocalOptimum> make_candidates(const std::vector<std::pair<double, double>>& xv) {
    std::vector<LocalOptimum> out;
    for (const auto& [x, v] : xv) out.push_back({vec1(x), v});
    return out;
}

}  // namespace

TEST_SUITE("warm-start") {

TEST_CASE("a single smooth peak yields the grid optimum") {
    Rng rng(3);
    const GPModel m = peak_model(6.0, 2.0, rng);
    WarmStartConfig cfg;
    const auto optima = extract_local_optima(m, cfg, rng);
    REQUIRE(!optima.empty());

    const auto grid = oracle::grid_argmax_1d(
        [&](double x) { return m.predict(vec1(x)).first; }, 0.0, 10.0, 10001);
    CHECK(std::abs(optima.front().x[0] - grid.x) < 0.05 * 10.0);
    CHECK(optima.front().value == doctest::Approx(grid.value).epsilon(1e-3));
}

TEST_CASE("a bimodal posterior yields both maxima") {
    Rng rng(7);
    const GPModel m = bimodal_model(rng);
    WarmStartConfig cfg;
    const auto optima = extract_local_optima(m, cfg, rng);

    const auto grid_maxima = oracle::grid_local_maxima_1d(
        [&](double x) { return m.predict(vec1(x)).first; }, 0.0, 10.0, 10001);
    REQUIRE(grid_maxima.size() >= 2);
    for (const double gx : grid_maxima) {
        bool found = false;
        for (const auto& o : optima) found = found || std::abs(o.x[0] - gx) < 0.05 * 10.0;
        CHECK(found);
    }
}

TEST_CASE("every extracted point satisfies the gradient tolerance and stays in bounds") {
    Rng rng(11);
    const GPModel m = bimodal_model(rng);
    WarmStartConfig cfg;
    const auto optima = extract_local_optima(m, cfg, rng);
    const double tol = 1e-5 * m.params().gamma / m.bounds().max_range();
    for (const auto& o : optima) {
        CHECK(m.bounds().contains(o.x));
        CHECK(projected_gradient_norm(o.x, m.mean_grad(o.x), m.bounds()) <= tol);
    }
    // Sorted descending by pseudo value.
    for (size_t i = 1; i < optima.size(); ++i) CHECK(optima[i - 1].value >= optima[i].value);
}

TEST_CASE("diversity filter keeps the top values when all are far apart") {
    const auto cands = make_candidates({{0.0, 5.0}, {2.0, 4.0}, {4.0, 3.0}, {6.0, 2.0},
                                        {8.0, 1.0}});
    const auto kept = diversity_filter(cands, 3, 1.0);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].value == 5.0);
    CHECK(kept[1].value == 4.0);
    CHECK(kept[2].value == 3.0);
}

TEST_CASE("diversity filter drops near-duplicates of better points") {
    const auto cands = make_candidates({{1.0, 5.0}, {1.0, 4.9}, {3.0, 3.0}});
    const auto kept = diversity_filter(cands, 3, 0.5);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].value == 5.0);
    CHECK(kept[1].value == 3.0);
}

TEST_CASE("diversity filter returns fewer when infeasible") {
    const auto cands = make_candidates({{0.0, 3.0}, {0.1, 2.0}, {0.2, 1.0}});
    const auto kept = diversity_filter(cands, 3, 1.0);
    CHECK(kept.size() == 1);
}

TEST_CASE("augmented datasets are pseudo, bounded, diverse and cheap") {
    Rng rng(13);
    const GPModel m1 = bimodal_model(rng);
    const GPModel m2 = peak_model(3.0, 1.5, rng);
    WarmStartConfig cfg;
    cfg.sigma = 3;

    Rng build_rng(29);
    const auto sets = build_augmented({&m1, &m2}, cfg, build_rng);
    REQUIRE(sets.size() == 2);
    const double eps_l = cfg.resolved_eps_l(m1.bounds());
    for (size_t s = 0; s < sets.size(); ++s) {
        const Dataset& d = sets[s];
        CHECK(d.pseudo());
        CHECK(d.size() <= cfg.sigma);
        CHECK(d.time_step() == 1);
        const GPModel& src = s == 0 ? m1 : m2;
        for (int i = 0; i < d.size(); ++i) {
            CHECK(d.bounds().contains(d.input(i)));
            CHECK(std::abs(d.values()[i] - src.predict(d.input(i)).first) < 1e-12);
            for (int j = 0; j < i; ++j)
                CHECK((d.input(i) - d.input(j)).norm() >= eps_l);
        }
    }

    Rng build_rng2(29);
    const auto again = build_augmented({&m1, &m2}, cfg, build_rng2);
    for (size_t s = 0; s < sets.size(); ++s) {
        CHECK(again[s].size() == sets[s].size());
        for (int i = 0; i < sets[s].size(); ++i) {
            CHECK(again[s].values()[i] == sets[s].values()[i]);
            CHECK((again[s].input(i) - sets[s].input(i)).norm() == 0.0);
        }
    }
}

TEST_CASE("default diversity threshold is 1e-2 of the largest range") {
    WarmStartConfig cfg;
    CHECK(cfg.resolved_eps_l(Box::cube(3, 0.0, 100.0)) == doctest::Approx(1.0));
    cfg.eps_l = 0.25;
    CHECK(cfg.resolved_eps_l(Box::cube(3, 0.0, 100.0)) == 0.25);
}

}  // TEST_SUITE
