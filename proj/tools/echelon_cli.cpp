// Command-line front end: experiment runner, analytic oracle, and a quick
// property self-check for the two-echelon inventory library.

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "echelon/echelon.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& mode_override, long T_override,
            long trials_override, long seed_override, const std::string& out_override,
            bool full_scale, bool trace_override) {
    echelon::ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? echelon::ExperimentConfig{}
                                  : echelon::load_config(config_path);
        if (cfg.demands.empty()) cfg.demands.push_back(echelon::make_uniform_demand(1.0, 4.0));
        if (cfg.costs.empty()) cfg.costs.push_back(echelon::make_costs(0.3, 0.1, 0.5));
        if (!mode_override.empty()) {
            if (mode_override == "centralized") cfg.mode = echelon::RunMode::centralized;
            else if (mode_override == "decentralized") cfg.mode = echelon::RunMode::decentralized;
            else if (mode_override == "both") cfg.mode = echelon::RunMode::both;
            else throw std::invalid_argument("mode must be centralized, decentralized, or both");
        }
        if (full_scale) {
            cfg.T = 800000;
            cfg.trials = 128;
            cfg.checkpoints.clear();
        }
        if (T_override > 0) { cfg.T = T_override; cfg.checkpoints.clear(); }
        if (trials_override > 0) cfg.trials = trials_override;
        if (seed_override >= 0) cfg.seed_base = static_cast<std::uint64_t>(seed_override);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (trace_override) cfg.trace_dump = true;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        const std::string path = echelon::run_trials(cfg);
        std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_oracle(const std::string& dist_spec, const std::string& costs_spec) {
    try {
        const echelon::DemandModel m = echelon::parse_demand_spec(dist_spec);
        const echelon::CostParams cp = echelon::parse_costs_spec(costs_spec);
        const echelon::OptimalLevels opt = echelon::optimal_levels(cp, m);
        std::cout << "s1_star " << echelon::csv_number(opt.s1) << "\n"
                  << "s2_star " << echelon::csv_number(opt.s2) << "\n"
                  << "omega_star " << echelon::csv_number(opt.omega) << "\n"
                  << "h_star " << echelon::csv_number(opt.h_star) << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "oracle failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_selftest() {
    using namespace echelon;
    int failures = 0;
    const auto check = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
            std::cout << name << ": ok\n";
        } catch (const std::exception& e) {
            std::cout << name << ": FAIL (" << e.what() << ")\n";
            ++failures;
        }
    };
    const auto expect = [](bool cond, const std::string& what) {
        if (!cond) throw std::runtime_error(what);
    };
    const auto near = [&](double a, double b, double tol, const std::string& what) {
        expect(std::abs(a - b) <= tol, what + " (got " + csv_number(a) + ", want "
                                           + csv_number(b) + ")");
    };

    const DemandModel uni = make_uniform_demand(1.0, 4.0);
    const CostParams cp = make_costs(0.3, 0.1, 0.5);

    check("demand", [&] {
        near(cdf(uni, 2.5), 0.5, 1e-12, "uniform cdf midpoint");
        near(inverse_cdf(uni, 0.75), 3.25, 1e-12, "uniform quantile");
        const DemandModel tg = make_truncated_gaussian_demand(1.0, 4.0, 3.0, 1.0);
        near(cdf(tg, inverse_cdf(tg, 0.3)), 0.3, 1e-9, "gaussian quantile round trip");
        const EmpiricalCdf e({1.0, 2.0, 3.0, 4.0});
        near(e.inverse(0.75), 3.0, 0.0, "empirical quantile");
    });
    check("costs", [&] {
        near(s1_star(cp, uni), 3.25, 1e-12, "stage-1 optimum");
        near(s2_star(cp, uni), 2.5, 1e-6, "stage-2 optimum");
        near(omega_star(cp, uni), 0.1, 1e-6, "transfer optimum");
        near(h_expected(cp, uni, 3.25, 2.5), 0.35, 1e-7, "optimal rate");
        near(grad_h_s2(cp, uni, 3.25, 2.5), 0.0, 1e-8, "stationarity");
    });
    check("dynamics", [&] {
        ChainState s = init_chain(3.25, 2.5, 2.0);
        auto [n, o] = step(s, 3.25, 2.5, 2.0, 0.1, cp);
        near(o.o, 2.0, 1e-12, "order");
        near(o.loss_central, 0.425, 1e-12, "round loss");
        near(o.loss_agent1_contract + o.loss_agent2_contract, o.loss_central, 1e-12,
             "transfer cancellation");
        near(n.s_hat_1, 3.25, 1e-12, "stage-1 refill");
    });
    check("oco", [&] {
        OnsState s = make_ons(1.0, 1.0, 1.0, {0.0, 3.0});
        s = ons_step(s, 2.0);
        near(s.M, 5.0, 1e-12, "ONS divisor");
        near(s.x, 0.6, 1e-12, "ONS iterate");
        LazyOnsState lz = make_lazy_ons(1.0, 1.0, 1.0, {0.0, 3.0});
        for (int i = 0; i < 8; ++i) lz = lazy_ons_feed(lz, 0.1);
        expect(lz.k == 4, "publish count at 8 feeds");
    });
    check("centralized", [&] {
        RunParams rp;
        rp.model = uni;
        rp.costs = cp;
        rp.T = 64;
        rp.delta = 1.0 / (64.0 * 64.0);
        rp.seed = 7;
        const RunTrace a = run_centralized(rp);
        const RunTrace b = run_centralized(rp);
        expect(a.d == b.d && a.loss_central == b.loss_central, "determinism");
        expect(static_cast<long>(a.d.size()) == rp.T, "trace length");
    });
    check("decentralized", [&] {
        RunParams rp;
        rp.model = uni;
        rp.costs = cp;
        rp.T = 64;
        rp.delta = 1.0 / (64.0 * 64.0);
        rp.seed = 7;
        const RunTrace a = run_decentralized(rp);
        expect(static_cast<long>(a.d.size()) == rp.T, "trace length");
        for (double w : a.omega)
            expect(w >= 0.0 && w <= cp.h2 + cp.p1 + 1.0, "contract range");
    });
    check("harness", [&] {
        const ExperimentConfig cfg = parse_config_text("T = 16\ntrials = 2\nmode = both\n");
        expect(cfg.T == 16 && cfg.trials == 2, "config parse");
        std::vector<std::pair<double, double>> pts;
        for (double t = 1024; t <= 131072; t *= 2) pts.push_back({t, std::sqrt(t)});
        near(fit_growth(pts), 0.5, 1e-9, "growth fit");
    });
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-echelon inventory experiments"};
    app.require_subcommand(1);

    std::string config_path, mode_override, out_override, dist_spec, costs_spec;
    long T_override = 0, trials_override = 0, seed_override = -1;
    bool full_scale = false, trace_override = false;

    CLI::App* run = app.add_subcommand("run", "run seeded experiment trials");
    run->add_option("--config", config_path, "key=value config file");
    run->add_option("--mode", mode_override, "centralized, decentralized, or both");
    run->add_option("--T", T_override, "horizon override");
    run->add_option("--trials", trials_override, "trial count override");
    run->add_option("--seed", seed_override, "seed base override");
    run->add_option("--out", out_override, "output directory override");
    run->add_flag("--full-scale", full_scale, "T=800000, trials=128");
    run->add_flag("--trace", trace_override, "dump per-round trace CSVs");

    CLI::App* oracle = app.add_subcommand("oracle", "print analytic optimal levels");
    oracle->add_option("--dist", dist_spec, "demand spec, e.g. 'uniform 1 4'")->required();
    oracle->add_option("--costs", costs_spec, "costs spec, e.g. '0.3 0.1 0.5'")->required();

    app.add_subcommand("selftest", "run quick per-module checks");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return cmd_run(config_path, mode_override, T_override, trials_override, seed_override,
                       out_override, full_scale, trace_override);
    if (oracle->parsed()) return cmd_oracle(dist_spec, costs_spec);
    return cmd_selftest();
}
