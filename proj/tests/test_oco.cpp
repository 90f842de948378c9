#include <catch2/catch_amalgamated.hpp>

#include <echelon/costs.hpp>
#include <echelon/decentralized.hpp>
#include <echelon/demand.hpp>
#include <echelon/oco.hpp>
#include <echelon/rng.hpp>

#include <cmath>
#include <vector>

using namespace echelon;

TEST_CASE("projected gradient step", "[oco]") {
    CHECK(pgd_step(1.0, 2.0, 0.25, {0.0, 3.0}) == Catch::Approx(0.5));
    CHECK(pgd_step(0.1, 10.0, 1.0, {0.0, 3.0}) == 0.0);
    CHECK(pgd_step(2.9, -10.0, 1.0, {0.0, 3.0}) == 3.0);
    CHECK(pgd_step(1.7, 0.0, 1.0, {0.0, 3.0}) == 1.7);
}

TEST_CASE("newton-style step with scalar preconditioner", "[oco]") {
    OnsState s = make_ons(1.0, 1.0, 1.0, {0.0, 3.0});
    s = ons_step(s, 2.0);
    CHECK(s.M == Catch::Approx(5.0));
    CHECK(s.x == Catch::Approx(0.6));

    OnsState fixed = ons_step(s, 0.0);
    CHECK(fixed.M == s.M);
    CHECK(fixed.x == s.x);

    OnsState clamped = make_ons(1.0, 100.0, 1e-6, {0.0, 3.0});
    clamped = ons_step(clamped, -5.0);
    CHECK(clamped.x == 3.0);

    CHECK_THROWS_AS(make_ons(1.0, 0.0, 1.0, {0.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_ons(1.0, 1.0, 0.0, {0.0, 3.0}), std::invalid_argument);
}

TEST_CASE("published decision refreshes only at powers of two", "[oco]") {
    LazyOnsState s = make_lazy_ons(2.0, 1.0, 1.0, {0.0, 4.0});
    std::vector<double> actions;
    std::vector<double> iterates;
    for (long t = 1; t <= 8; ++t) {
        actions.push_back(lazy_ons_decision(s));
        iterates.push_back(s.inner.x);
        s = lazy_ons_feed(s, t % 2 ? 0.5 : -0.25);
    }
    CHECK(s.k == 4); // refreshed at steps 1, 2, 4, 8
    for (long t = 1; t <= 8; ++t) {
        const bool boundary = (t & (t - 1)) == 0;
        if (!boundary) CHECK(actions[t - 1] == actions[t - 2]);
    }
    // each refresh equals the running mean of the inner iterates seen so far
    double run = 0.0;
    for (long t = 1; t <= 8; ++t) {
        run += iterates[t - 1];
        const bool boundary = (t & (t - 1)) == 0;
        if (boundary)
            CHECK(actions[t - 1] == Catch::Approx(run / t).margin(1e-14));
    }

    LazyOnsState seven = make_lazy_ons(1.0, 1.0, 1.0, {0.0, 4.0});
    for (long t = 0; t < 7; ++t) seven = lazy_ons_feed(seven, 0.3);
    CHECK(seven.k == 3); // refreshes at 1, 2, 4 within 7 steps
}

TEST_CASE("frozen inner iterate publishes itself", "[oco]") {
    LazyOnsState s = make_lazy_ons(1.7, 1.0, 1.0, {0.0, 4.0});
    for (long t = 1; t <= 32; ++t) {
        CHECK(lazy_ons_decision(s) == Catch::Approx(1.7));
        s = lazy_ons_feed(s, 0.0);
    }
}

TEST_CASE("lazy learner finds the pinball optimum", "[oco]") {
    const DemandModel m = make_uniform_demand(1.0, 4.0);
    const CostParams cp = make_costs(0.3, 0.1, 0.5);
    const double h = 0.1, om = 0.1;
    const double B = bernstein_bound(cp, m, om); // 0.15
    const long T = 1L << 16;
    for (int seed = 0; seed < 5; ++seed) {
        RngStream rng(900 + seed);
        LazyOnsState s = make_lazy_ons(2.0, 2.0 * B, 1.0 / T, {1.0, 4.0});
        for (long t = 0; t < T; ++t) {
            const double d = sample(m, rng);
            const double x = s.inner.x;
            s = lazy_ons_feed(s, x > d ? h : (x < d ? -om : 0.0));
        }
        CHECK(std::abs(lazy_ons_decision(s) - 2.5) <= 0.05);
    }
}

TEST_CASE("newton-style regret falls off the root-T rate", "[oco]") {
    const DemandModel m = make_uniform_demand(1.0, 4.0);
    const CostParams cp = make_costs(0.3, 0.1, 0.5);
    const double h = 0.1, om = 0.1;
    const double B = bernstein_bound(cp, m, om);
    const long T = 1L << 16;
    std::vector<long> cks;
    for (long c = 1L << 10; c <= T; c *= 2) cks.push_back(c);
    std::vector<double> mean_reg(cks.size(), 0.0);
    for (int seed = 0; seed < 32; ++seed) {
        RngStream rng(300 + seed);
        OnsState s = make_ons(2.0, 2.0 * B, 1.0 / T, {1.0, 4.0});
        std::vector<double> ds(T), loss(T);
        for (long t = 0; t < T; ++t) {
            ds[t] = sample(m, rng);
            loss[t] = h * std::max(s.x - ds[t], 0.0) + om * std::max(ds[t] - s.x, 0.0);
            s = ons_step(s, s.x > ds[t] ? h : (s.x < ds[t] ? -om : 0.0));
        }
        double cum = 0.0;
        long done = 0;
        for (std::size_t i = 0; i < cks.size(); ++i) {
            for (; done < cks[i]; ++done) cum += loss[done];
            const auto best = pinball_grid_min(
                std::vector<double>(ds.begin(), ds.begin() + cks[i]),
                std::vector<double>(cks[i], h), std::vector<double>(cks[i], om), 1.0, 4.0);
            mean_reg[i] += (cum - best.second) / 32.0;
        }
    }
    // mean regret stays under a fitted polylog envelope...
    const double log_t = std::log(static_cast<double>(T));
    CHECK(mean_reg.back() <= 2.0 * log_t * log_t);
    // ...and regret / sqrt(t) shrinks monotonically across checkpoints
    for (std::size_t i = 1; i < cks.size(); ++i)
        CHECK(mean_reg[i] / std::sqrt(static_cast<double>(cks[i]))
              < mean_reg[i - 1] / std::sqrt(static_cast<double>(cks[i - 1])));
}

TEST_CASE("second-moment condition verified by simulation", "[oco]") {
    const CostParams cp = make_costs(0.3, 0.1, 0.5);
    const DemandModel uni = make_uniform_demand(1.0, 4.0);
    const DemandModel disc = make_discrete_demand({1.0, 2.0, 3.0, 4.0}, {0.25, 0.25, 0.25, 0.25});
    struct Case { DemandModel m; double om; };
    const std::vector<Case> cases = {{uni, 0.1}, {uni, 0.05}, {disc, 0.08}};
    RngStream rng(4242);
    for (const auto& c : cases) {
        const double B = bernstein_bound(cp, c.m, c.om);
        const double kappa = c.om / (cp.h2 + c.om);
        const double xstar = inverse_cdf(c.m, kappa);
        for (int i = 0; i < 10; ++i) {
            const double x = c.m.d + (c.m.D - c.m.d) * (i + 0.5) / 10.0;
            const long n = 100000;
            RngStream sub = rng.substream(i + (c.om > 0.09 ? 0 : 100) + (c.m.continuous() ? 0 : 200));
            double sum = 0.0, sum2 = 0.0;
            for (long k = 0; k < n; ++k) {
                const double d = sample(c.m, sub);
                const double g = x > d ? cp.h2 : (x < d ? -c.om : 0.0);
                const double v = (x - xstar) * (x - xstar) * g * g - B * (x - xstar) * g;
                sum += v;
                sum2 += v * v;
            }
            const double mean = sum / n;
            const double se = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
            CHECK(mean <= 3.0 * se + 1e-12);
        }
    }
}
