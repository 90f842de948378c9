#ifndef ECHELON_CENTRALIZED_HPP
#define ECHELON_CENTRALIZED_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "echelon/costs.hpp"
#include "echelon/demand.hpp"
#include "echelon/dynamics.hpp"
#include "echelon/oco.hpp"
#include "echelon/rng.hpp"
#include "echelon/trace.hpp"

namespace echelon {

// stage-1 target: empirical quantile at the downstream critical ratio
inline double agent1_level(const EmpiricalCdf& ecdf, const CostParams& cp) {
    return ecdf.inverse(quantile_level(cp));
}

// bounded-gradient step-size rule for the stage-2 batch pass
inline double ogd_eta_rule(const CostParams& cp, const DemandModel& m, double c1, double L) {
    const double G = std::max(cp.h1, cp.p1) + c1 * (cp.h1 + cp.p1);
    return s_max(cp, m) / (G * std::sqrt(L));
}

/*
    Single-sample subgradient in s2 of the augmented stage-2 objective, built
    from two consecutive demands. Only the shortfall branch (previous demand
    above s2) moves stage 1's start level with s2, so the stage-1 terms enter
    through that branch's indicator; the h2 term and the exploration bonus
    contribute on both branches.
*/
inline double ogd_gradient(const CostParams& cp, double s1, double s2, double d_t,
                           double d_prev, double kappa, double phi_hat_s2) {
    double g = cp.h2 * (s2 >= d_t ? 1.0 : 0.0) + kappa * phi_hat_s2;
    if (d_prev > s2) {
        const double eff1 = s1 + s2 - d_prev;
        g += (cp.h1 + cp.p1) * (eff1 >= d_t ? 1.0 : 0.0) - cp.p1;
    }
    return g;
}

/*
    One batch pass of projected subgradient descent over an epoch's demand
    samples, returning the average iterate. The previous-demand slot of the
    first sample wraps to the last sample. eta <= 0 picks the bounded-gradient
    rule above.
*/
inline double agent2_ogd(const std::vector<double>& samples, const EmpiricalCdf& ecdf,
                         const CostParams& cp, const DemandModel& m, double delta, double T,
                         double c1, double eta, double s2_init) {
    const std::size_t L = samples.size();
    if (L == 0) throw std::invalid_argument("stage-2 pass needs at least one sample");
    const double s1 = agent1_level(ecdf, cp);
    const double kappa = augmentation_kappa(cp, delta, T, c1, static_cast<double>(L), m.D);
    const double step = eta > 0.0 ? eta : ogd_eta_rule(cp, m, c1, static_cast<double>(L));
    const Interval dom{0.0, s_max(cp, m)};
    double x = clamp_to(dom, s2_init);
    double sum = 0.0;
    for (std::size_t t = 0; t < L; ++t) {
        const double d_prev = t == 0 ? samples[L - 1] : samples[t - 1];
        sum += x;
        const double g = ogd_gradient(cp, s1, x, samples[t], d_prev, kappa, ecdf.eval(x));
        x = pgd_step(x, g, step, dom);
    }
    return sum / static_cast<double>(L);
}

// phase lengths 1, 2, 4, ... covering [1, T], last one truncated
inline std::vector<long> doubling_epochs(long T, long first) {
    std::vector<long> out;
    long len = first;
    long used = 0;
    while (used < T) {
        const long take = std::min(len, T - used);
        out.push_back(take);
        used += take;
        len *= 2;
    }
    return out;
}

/*
    Planner with full demand visibility: targets are frozen over doubling
    phases; at each phase end the realized demands become the next phase's
    sample set for the stage-1 quantile and the stage-2 batch pass. Phase 1
    runs on a deterministic uniform-prior pseudo-sample.
*/
inline RunTrace run_centralized(const RunParams& rp) {
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

    std::vector<double> prev = prior_pseudo_samples(rp.model);
    const double Td = static_cast<double>(rp.T);
    double s2_prev = 0.5 * s_max(rp.costs, rp.model);

    ChainState chain;
    bool chain_ready = false;
    long t = 1;
    const std::vector<long> lens = doubling_epochs(rp.T, 1);
    for (std::size_t mi = 0; mi < lens.size(); ++mi) {
        const EmpiricalCdf ecdf(prev);
        const double s1 = agent1_level(ecdf, rp.costs);
        const double eta = rp.ogd_eta > 0.0
                               ? rp.ogd_eta
                               : ogd_eta_rule(rp.costs, rp.model, rp.c1,
                                              static_cast<double>(prev.size()));
        const double s2 = agent2_ogd(prev, ecdf, rp.costs, rp.model, rp.delta, Td, rp.c1,
                                     rp.ogd_eta, s2_prev);
        s2_prev = s2;
        tr.epochs.push_back({static_cast<int>(mi) + 1, t, lens[mi], s1, s2, 0.0, eta});
        if (!chain_ready) {
            chain = init_chain(s1, s2, tr.d0);
            chain_ready = true;
        }
        std::vector<double> epoch_demands;
        epoch_demands.reserve(lens[mi]);
        for (long i = 0; i < lens[mi]; ++i, ++t) {
            const double d_t = draw(t);
            tr.level1.push_back(chain.s_hat_1);
            tr.level2.push_back(chain.s_hat_2);
            auto [next, out] = step(chain, s1, s2, d_t, 0.0, rp.costs);
            chain = next;
            epoch_demands.push_back(d_t);
            tr.d.push_back(out.d);
            tr.target2.push_back(s2);
            tr.order1.push_back(out.o);
            tr.order2.push_back(out.o_prime);
            tr.omega.push_back(0.0);
            tr.loss_central.push_back(out.loss_central);
            tr.loss_agent1.push_back(out.loss_agent1_contract);
            tr.loss_agent2.push_back(out.loss_agent2_contract);
        }
        prev = std::move(epoch_demands);
    }
    return tr;
}

} // namespace echelon

#endif // ECHELON_CENTRALIZED_HPP
