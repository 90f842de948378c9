#ifndef ECHELON_DECENTRALIZED_HPP
#define ECHELON_DECENTRALIZED_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "echelon/centralized.hpp"
#include "echelon/costs.hpp"
#include "echelon/demand.hpp"
#include "echelon/dynamics.hpp"
#include "echelon/oco.hpp"
#include "echelon/rng.hpp"
#include "echelon/trace.hpp"

namespace echelon {

struct Contract {
    double omega = 0.0; // per-unit transfer for upstream backlog
    int m = 0;          // phase that negotiated it
};

/*
    Nominal warm-up length of the decentralized schedule. The rule value is
    astronomically large for any plausible constant, so runs cap it; the cap
    actually used is recorded in the trace note.
*/
inline double warmup_rule_value(const CostParams& cp, double delta, double T, double c3) {
    const double r = (cp.h2 + cp.p1) / cp.h2;
    const double lg = std::log(T / delta);
    const double rho = 256.0 * r * r * r * r * c3 * c3 * c3 * c3 * lg * lg * lg * lg;
    return 16.0 * rho;
}

inline long warmup_length(const CostParams& cp, double delta, double T, double c3,
                          long cap = 64) {
    const double rule = warmup_rule_value(cp, delta, T, c3);
    if (rule < static_cast<double>(cap)) return std::max(1L, static_cast<long>(rule));
    return cap;
}

/*
    The contract maker rebuilds the stage-2 target from the latest demand
    sample and posts the transfer price that makes the upstream agent's own
    pinball optimum sit at that target.
*/
inline Contract contract_maker(const std::vector<double>& samples, const CostParams& cp,
                               const DemandModel& m, double delta, double T, double c1,
                               double ogd_eta, int epoch) {
    const EmpiricalCdf ecdf(samples);
    const double s_L = agent2_ogd(samples, ecdf, cp, m, delta, T, c1, ogd_eta,
                                  0.5 * s_max(cp, m));
    const double phi = ecdf.eval(s_L);
    const double cap = cp.h2 + cp.p1 + 1.0;
    Contract c;
    c.m = epoch;
    c.omega = phi >= 1.0 ? cap : std::min(cp.h2 * phi / (1.0 - phi), cap);
    return c;
}

// subgradient of the upstream round loss h2 (x - o)^+ + omega (x - o)^- at x
inline double agent2_subgradient(double o_t, double x, double omega, const CostParams& cp) {
    if (x > o_t) return cp.h2;
    if (x < o_t) return -omega;
    return 0.0;
}

/*
    The only place the upstream learner is advanced. Its inputs are the
    learner state, the observed order, and the posted transfer price; the
    demand itself never reaches this side of the interface.
*/
inline LazyOnsState agent2_round_update(const LazyOnsState& st, double o_t, double omega,
                                        const CostParams& cp) {
    return lazy_ons_feed(st, agent2_subgradient(o_t, st.inner.x, omega, cp));
}

/*
    Self-interested protocol: per phase, the contract maker posts omega, the
    downstream agent picks its quantile target from last phase's demands, and
    the upstream agent runs a fresh low-switching learner (initialized at its
    previous decision) against the orders it receives.
*/
inline RunTrace run_decentralized(const RunParams& rp) {
    if (rp.T < 1) throw std::invalid_argument("horizon must be at least 1");
    RunTrace tr;
    tr.seed = rp.seed;
    tr.T = rp.T;
    tr.reserve(rp.T);

    RngStream root(rp.seed);
    auto draw = [&](long t) {
        RngStream s = root.substream(static_cast<std::uint64_t>(t));
        return sample(rp.model, s);
    };
    tr.d0 = draw(0);

    const double Td = static_cast<double>(rp.T);
    const long L1 = warmup_length(rp.costs, rp.delta, Td, rp.c3);
    const double rule = warmup_rule_value(rp.costs, rp.delta, Td, rp.c3);
    if (rule > static_cast<double>(L1))
        tr.note = "warm-up length capped at " + std::to_string(L1)
                  + " (rule value " + std::to_string(rule) + ")";

    std::vector<double> prev = prior_pseudo_samples(rp.model);
    // decisions below d are dominated (demand never is), and the fixed-policy
    // benchmark searches [d, D]; keep the learner on the same set
    const Interval dom{rp.model.d, rp.model.D};
    double learner_init = 0.5 * (rp.model.d + rp.model.D);

    ChainState chain;
    bool chain_ready = false;
    long t = 1;
    const std::vector<long> lens = doubling_epochs(rp.T, L1);
    for (std::size_t mi = 0; mi < lens.size(); ++mi) {
        const int m = static_cast<int>(mi) + 1;
        const Contract con =
            contract_maker(prev, rp.costs, rp.model, rp.delta, Td, rp.c1, rp.ogd_eta, m);
        const EmpiricalCdf ecdf(prev);
        const double s1 = agent1_level(ecdf, rp.costs);
        const double B = bernstein_bound(rp.costs, rp.model, con.omega);
        const double eta = (rp.eta_doubled ? 2.0 : 1.0) * B;
        LazyOnsState learner = make_lazy_ons(learner_init, eta, 1.0 / Td, dom);
        tr.epochs.push_back({m, t, lens[mi], s1, lazy_ons_decision(learner), con.omega, eta});
        if (!chain_ready) {
            chain = init_chain(s1, lazy_ons_decision(learner), tr.d0);
            chain_ready = true;
        }
        std::vector<double> epoch_demands;
        epoch_demands.reserve(lens[mi]);
        for (long i = 0; i < lens[mi]; ++i, ++t) {
            const double target2 = lazy_ons_decision(learner);
            const double d_t = draw(t);
            tr.level1.push_back(chain.s_hat_1);
            tr.level2.push_back(chain.s_hat_2);
            auto [next, out] = step(chain, s1, target2, d_t, con.omega, rp.costs);
            chain = next;
            learner = agent2_round_update(learner, out.o, con.omega, rp.costs);
            epoch_demands.push_back(d_t);
            tr.d.push_back(out.d);
            tr.target2.push_back(target2);
            tr.order1.push_back(out.o);
            tr.order2.push_back(out.o_prime);
            tr.omega.push_back(con.omega);
            tr.loss_central.push_back(out.loss_central);
            tr.loss_agent1.push_back(out.loss_agent1_contract);
            tr.loss_agent2.push_back(out.loss_agent2_contract);
        }
        learner_init = lazy_ons_decision(learner);
        prev = std::move(epoch_demands);
    }
    return tr;
}

/*
    Convex piecewise-linear sum  sum_i hold_i (x - b_i)^+ + short_i (b_i - x)^+
    minimized over a uniform grid, evaluated exactly via sorted prefix sums.
    Returns (argmin, min).
*/
inline std::pair<double, double> pinball_grid_min(std::vector<double> b,
                                                  std::vector<double> hold,
                                                  std::vector<double> shrt, double lo,
                                                  double hi, double step = 1e-3) {
    const std::size_t n = b.size();
    if (n == 0 || hold.size() != n || shrt.size() != n)
        throw std::invalid_argument("pinball sum needs matching nonempty coefficient lists");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) { return b[a] < b[c]; });
    std::vector<double> bs(n), ch(n + 1, 0.0), chb(n + 1, 0.0), cs(n + 1, 0.0), csb(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = idx[i];
        bs[i] = b[j];
        ch[i + 1] = ch[i] + hold[j];
        chb[i + 1] = chb[i] + hold[j] * b[j];
        cs[i + 1] = cs[i] + shrt[j];
        csb[i + 1] = csb[i] + shrt[j] * b[j];
    }
    const long cells = std::lround((hi - lo) / step);
    double best_x = lo, best_v = 0.0;
    for (long gi = 0; gi <= cells; ++gi) {
        const double x = lo + static_cast<double>(gi) * step;
        const std::size_t k = std::upper_bound(bs.begin(), bs.end(), x) - bs.begin();
        const double v = x * ch[k] - chb[k] + (csb[n] - csb[k]) - x * (cs[n] - cs[k]);
        if (gi == 0 || v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return {best_x, best_v};
}

struct BenchmarkRegrets {
    std::vector<long> checkpoints;
    std::vector<double> reg1; // realized minus best fixed downstream target
    std::vector<double> reg2; // realized minus best fixed upstream target
};

/*
    Per-agent regret against the best fixed base-stock policy in hindsight,
    replayed on the realized demand, order, price, and stock sequences. The
    downstream replay assumes its orders are filled demand-for-demand, so its
    level differs from a fixed target by a drift term independent of the
    target; the upstream replay returns to its target every round.
*/
inline BenchmarkRegrets benchmark_agent_regrets(const RunTrace& tr, const CostParams& cp,
                                                const DemandModel& m,
                                                std::vector<long> checkpoints) {
    const long T = static_cast<long>(tr.d.size());
    std::sort(checkpoints.begin(), checkpoints.end());
    BenchmarkRegrets out;
    for (long cpt : checkpoints)
        if (cpt >= 1 && cpt <= T) out.checkpoints.push_back(cpt);

    // downstream drift c_t: level under a fixed target s1 is s1 + c_t
    std::vector<double> drift(T), eff_demand(T), transfer(T);
    double c = 0.0;
    for (long t = 0; t < T; ++t) {
        drift[t] = c;
        eff_demand[t] = tr.d[t] - c;
        transfer[t] = tr.omega[t] * pos(tr.d[t] - tr.level2[t]);
        const double pending = t == 0 ? 0.0 : pos(tr.d[t - 1] - tr.level2[t - 1]);
        c = c - tr.d[t] + pending + std::min(tr.level2[t], tr.d[t]);
    }

    for (long cpt : out.checkpoints) {
        const std::size_t n = static_cast<std::size_t>(cpt);
        double realized1 = 0.0, realized2 = 0.0, transfer_sum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            realized1 += tr.loss_agent1[t];
            realized2 += tr.loss_agent2[t];
            transfer_sum += transfer[t];
        }
        const auto best1 = pinball_grid_min(
            std::vector<double>(eff_demand.begin(), eff_demand.begin() + n),
            std::vector<double>(n, cp.h1), std::vector<double>(n, cp.p1), m.d, m.D);
        const auto best2 = pinball_grid_min(
            std::vector<double>(tr.order1.begin(), tr.order1.begin() + n),
            std::vector<double>(n, cp.h2),
            std::vector<double>(tr.omega.begin(), tr.omega.begin() + n), m.d, m.D);
        out.reg1.push_back(realized1 - (best1.second - transfer_sum));
        out.reg2.push_back(realized2 - best2.second);
    }
    return out;
}

} // namespace echelon

#endif // ECHELON_DECENTRALIZED_HPP
