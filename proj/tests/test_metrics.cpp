#include <doctest.h>

#include "deto/metrics.hpp"

using namespace deto;

namespace {

// Synthetic step: y values in evaluation order, known optimum.
StepRecord make_step(int t, const std::vector<double>& ys, double optimum) {
    StepRecord s;
    s.step = t;
    s.xs = Matrix::Zero(static_cast<int>(ys.size()), 1);
    s.ys.resize(static_cast<int>(ys.size()));
    s.best_so_far.resize(static_cast<int>(ys.size()));
    for (size_t i = 0; i < ys.size(); ++i) {
        s.xs(static_cast<int>(i), 0) = static_cast<double>(i);
        s.ys[static_cast<int>(i)] = ys[i];
        s.best_so_far[static_cast<int>(i)] =
            i == 0 ? ys[0] : std::max(s.best_so_far[static_cast<int>(i) - 1], ys[i]);
    }
    int best = 0;
    s.ys.maxCoeff(&best);
    s.incumbent = s.xs.row(best).transpose();
    s.incumbent_value = s.ys[best];
    s.optimum_x = Vector::Zero(1);
    s.optimum_value = optimum;
    return s;
}

RunRecord make_record(const std::vector<std::vector<double>>& step_ys,
                      const std::vector<double>& optima) {
    RunRecord r;
    r.dim = 1;
    for (size_t t = 0; t < step_ys.size(); ++t)
        r.steps.push_back(make_step(static_cast<int>(t) + 1, step_ys[t], optima[t]));
    return r;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect runs have zero error") {
    const RunRecord r = make_record({{10.0, 9.0}, {20.0, 15.0}}, {10.0, 20.0});
    const MetricReport m = error_metrics(r);
    CHECK(m.eps_f == 0.0);
    CHECK(m.eps_t == 0.0);
}

TEST_CASE("step-end losses average into eps_t") {
    const RunRecord r = make_record({{5.0, 8.0}, {10.0, 12.0}}, {10.0, 16.0});
    const MetricReport m = error_metrics(r);
    CHECK(m.eps_t == doctest::Approx(3.0));  // losses 2 and 4
    // eps_f averages the running losses: (5, 2, 6, 4) / 4.
    CHECK(m.eps_f == doctest::Approx(17.0 / 4.0));
    CHECK(m.eps_t <= m.eps_f);
}

TEST_CASE("eps_t never exceeds eps_f") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> ys;
        std::vector<double> optima;
        for (int t = 0; t < 4; ++t) {
            std::vector<double> step;
            for (int i = 0; i < 6; ++i) step.push_back(rng.uniform(0.0, 50.0));
            ys.push_back(step);
            optima.push_back(55.0);
        }
        const MetricReport m = error_metrics(make_record(ys, optima));
        CHECK(m.eps_t <= m.eps_f + 1e-12);
        CHECK(m.eps_f >= 0.0);
    }
}

TEST_CASE("error metrics validate the step count") {
    const RunRecord r = make_record({{1.0}}, {2.0});
    CHECK_THROWS_AS(error_metrics(r, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("rho_c hand example") {
    // Step 1: A matches the reference at evaluation 10, B at 20.
    // Step 2: both reach it at evaluation 5.
    std::vector<double> a1(10, 0.0), b1(20, 0.0);
    a1.back() = 1.0;
    b1.back() = 1.0;
    std::vector<double> a2(5, 0.0), b2(5, 0.0);
    a2.back() = 1.0;
    b2.back() = 1.0;
    const RunRecord ra = make_record({a1, a2}, {1.0, 1.0});
    const RunRecord rb = make_record({b1, b2}, {1.0, 1.0});
    const std::vector<double> rc = rho_c({&ra, &rb});
    CHECK(rc[0] == doctest::Approx(1.0));
    CHECK(rc[1] == doctest::Approx((2.0 + 1.0) / 2.0));
}

TEST_CASE("rho_c caps algorithms that never match") {
    std::vector<double> good(10, 0.0);
    good[4] = 5.0;  // reference reached at evaluation 5
    std::vector<double> bad(10, 1.0);
    const RunRecord rg = make_record({good}, {5.0});
    const RunRecord rb = make_record({bad}, {5.0});
    const std::vector<double> rc = rho_c({&rg, &rb});
    CHECK(rc[0] == doctest::Approx(1.0));
    CHECK(rc[1] == doctest::Approx(8.0 * 10.0 / 5.0));
}

TEST_CASE("rho_t closed forms") {
    std::vector<double> base(10, 0.0);
    base[9] = 3.0;  // baseline needs all 10 evaluations
    std::vector<double> fast(10, 0.0);
    fast[4] = 3.0;  // candidate matches in 5
    const RunRecord rb = make_record({base}, {3.0});
    const RunRecord rf = make_record({fast}, {3.0});

    CHECK(rho_t(rb, rb) == doctest::Approx(1.0));
    CHECK(rho_t(rf, rb) == doctest::Approx(0.5));

    std::vector<double> never(10, 1.0);
    const RunRecord rn = make_record({never}, {3.0});
    CHECK(rho_t(rn, rb) == doctest::Approx(8.0 * 10.0 / 10.0));
}

TEST_CASE("wilcoxon closed forms") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(wilcoxon_signed_rank(a, a) == 1.0);

    const std::vector<double> b{0.5, 1.0, 2.5, 3.0, 4.5};
    CHECK(wilcoxon_signed_rank(a, b) == doctest::Approx(0.0625));
    CHECK(wilcoxon_signed_rank(b, a) == doctest::Approx(0.0625));

    const std::vector<double> short_sample{1.0};
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, short_sample), std::invalid_argument);
}

TEST_CASE("wilcoxon exact path tracks the normal approximation at n=20") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> a(20), b(20);
        for (int i = 0; i < 20; ++i) {
            a[i] = rng.uniform(0.0, 1.0);
            b[i] = a[i] + rng.uniform(-0.3, 0.5);
        }
        const double exact = wilcoxon_signed_rank(a, b);

        // Reference normal approximation computed independently.
        std::vector<double> diffs;
        for (int i = 0; i < 20; ++i)
            if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
        const int m = static_cast<int>(diffs.size());
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            return std::abs(diffs[x]) < std::abs(diffs[y]);
        });
        double w_plus = 0.0;
        for (int i = 0; i < m; ++i)
            if (diffs[order[i]] > 0.0) w_plus += i + 1;
        const double mu = m * (m + 1) / 4.0;
        const double var = m * (m + 1) * (2.0 * m + 1) / 24.0;
        double z = w_plus - mu;
        z -= 0.5 * (z > 0 ? 1 : (z < 0 ? -1 : 0));
        z /= std::sqrt(var);
        const double approx = std::min(1.0, 2.0 * (1.0 - 0.5 * std::erfc(-std::abs(z) / std::sqrt(2.0))));
        CHECK(std::abs(exact - approx) < 0.02);
    }
}

TEST_CASE("a12 closed forms and properties") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const EffectSize same = a12(a, a);
    CHECK(same.a12 == doctest::Approx(0.5));
    CHECK(same.category == EffectSize::Category::Equal);

    const std::vector<double> low{0.0, 0.1, 0.2};
    const EffectSize dom = a12(a, low);
    CHECK(dom.a12 == doctest::Approx(1.0));
    CHECK(dom.category == EffectSize::Category::Large);

    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(6), y(5);
        for (double& v : x) v = rng.uniform(0.0, 1.0);
        for (double& v : y) v = rng.uniform(0.0, 1.0);
        CHECK(a12(x, y).a12 + a12(y, x).a12 == doctest::Approx(1.0));

        // Invariance under strictly monotone transformations.
        auto expit = [](double v) { return std::exp(3.0 * v) + v; };
        std::vector<double> xt, yt;
        for (double v : x) xt.push_back(expit(v));
        for (double v : y) yt.push_back(expit(v));
        CHECK(a12(x, y).a12 == doctest::Approx(a12(xt, yt).a12));
    }
}

TEST_CASE("a12 categories match the thresholds") {
    // 0.56, 0.64 and 0.71 are the small/medium/large cut points applied to
    // max(a12, 1 - a12); a singleton against 100 values hits them exactly.
    const std::vector<double> base{0.0};
    std::vector<double> beat56(100, 1.0);
    for (int i = 0; i < 56; ++i) beat56[i] = -1.0;
    CHECK(a12(base, beat56).a12 == doctest::Approx(0.56));
    CHECK(a12(base, beat56).category == EffectSize::Category::Small);
    std::vector<double> beat64(100, 1.0);
    for (int i = 0; i < 64; ++i) beat64[i] = -1.0;
    CHECK(a12(base, beat64).category == EffectSize::Category::Medium);
    std::vector<double> beat71(100, 1.0);
    for (int i = 0; i < 71; ++i) beat71[i] = -1.0;
    CHECK(a12(base, beat71).category == EffectSize::Category::Large);
}

TEST_CASE("sign test tail probabilities") {
    CHECK(sign_test_p(0, 10) == doctest::Approx(1.0));
    CHECK(sign_test_p(10, 10) == doctest::Approx(std::pow(0.5, 10)));
    CHECK(sign_test_p(9, 10) == doctest::Approx(11.0 * std::pow(0.5, 10)));
}

}  // TEST_SUITE
