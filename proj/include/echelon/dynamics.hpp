#ifndef ECHELON_DYNAMICS_HPP
#define ECHELON_DYNAMICS_HPP

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "echelon/costs.hpp"

namespace echelon {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double neg(double x) { return x < 0.0 ? -x : 0.0; }

/*
    Two-stage chain state at the start of a round. Stage 1 is the downstream
    agent facing demand; stage 2 ships to stage 1 and reorders from an
    uncapacitated source. A stage-2 shortfall is shipped one round late
    (pending_shipment); stock is nonperishable and unmet demand backlogs,
    so levels may go negative.
*/
struct ChainState {
    long t = 1;                   // round about to be played
    double s_hat_1 = 0.0;         // stage-1 level at round start
    double s_hat_2 = 0.0;         // stage-2 level at round start
    double s_tilde_1 = 0.0;       // stage-1 level after last round's demand
    double s_tilde_2 = 0.0;       // stage-2 level after last round's shipment
    double pending_shipment = 0.0; // stage-2 shortfall arriving next round
    double last_demand = 0.0;     // previous round's demand
};

struct RoundOutcome {
    double d = 0.0;                    // demand this round
    double o = 0.0;                    // stage-1 order to stage 2
    double o_prime = 0.0;              // stage-2 order to the source
    double loss_central = 0.0;         // total chain cost this round
    double loss_agent1_contract = 0.0; // stage-1 cost net of the transfer
    double loss_agent2_contract = 0.0; // stage-2 cost plus the transfer
    double omega = 0.0;                // transfer price in force
};

// initial orders arrive in full before round 1; d0 seeds the previous-demand slot
inline ChainState init_chain(double target1, double target2, double d0) {
    if (!(target1 >= 0.0) || !(target2 >= 0.0))
        throw std::invalid_argument("initial base-stock targets must be nonnegative");
    ChainState s;
    s.s_hat_1 = s.s_tilde_1 = target1;
    s.s_hat_2 = s.s_tilde_2 = target2;
    s.pending_shipment = 0.0;
    s.last_demand = d0;
    return s;
}

/*
    One round, in event order: demand hits stage 1 (plus last round's late
    shipment), stage 1 orders up to its target, stage 2 ships what it has and
    orders up to its own target, shortfall becomes next round's late shipment.
    Losses are charged on start-of-round levels; the omega transfer moves the
    stage-2 backlog charge between the two agents and cancels in the total.
*/
inline std::pair<ChainState, RoundOutcome> step(const ChainState& s, double target1,
                                                double target2, double d_t, double omega_t,
                                                const CostParams& cp) {
    const double st1 = s.s_hat_1 - d_t + s.pending_shipment;
    const double o = pos(target1 - st1);
    const double st2 = s.s_hat_2 - o;
    const double o_prime = pos(target2 - st2);

    RoundOutcome out;
    out.d = d_t;
    out.o = o;
    out.o_prime = o_prime;
    out.omega = omega_t;
    const double stage1_cost = cp.h1 * pos(s.s_hat_1 - d_t) + cp.p1 * neg(s.s_hat_1 - d_t);
    const double stage2_hold = cp.h2 * pos(s.s_hat_2 - o);
    const double stage2_back = neg(s.s_hat_2 - o);
    out.loss_central = stage1_cost + stage2_hold;
    out.loss_agent1_contract = stage1_cost - omega_t * stage2_back;
    out.loss_agent2_contract = stage2_hold + omega_t * stage2_back;

    ChainState n;
    n.t = s.t + 1;
    n.s_tilde_1 = st1;
    n.s_tilde_2 = st2;
    n.pending_shipment = pos(o - s.s_hat_2);
    n.s_hat_1 = st1 + std::min(s.s_hat_2, o);
    n.s_hat_2 = st2 + o_prime;
    n.last_demand = d_t;
    return {n, out};
}

/*
    Stationary single-round cost proxy: what the chain pays per round once
    orders track demand, written in terms of the targets and two consecutive
    demands. If the previous demand exceeded the stage-2 target, stage 1
    starts the round short by that overflow.
*/
inline double surrogate_hhat(double s1, double s2, double d_t, double d_prev,
                             const CostParams& cp) {
    const double eff1 = s2 > d_prev ? s1 : s1 + s2 - d_prev;
    return cp.h1 * pos(eff1 - d_t) + cp.p1 * neg(eff1 - d_t) + cp.h2 * pos(s2 - d_t);
}

} // namespace echelon

#endif // ECHELON_DYNAMICS_HPP
