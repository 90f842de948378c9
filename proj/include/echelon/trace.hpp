#ifndef ECHELON_TRACE_HPP
#define ECHELON_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "echelon/costs.hpp"
#include "echelon/demand.hpp"

namespace echelon {

// one planning phase: targets held fixed over [start, start + length)
struct EpochRecord {
    int m = 0;          // phase index, 1-based
    long start = 0;     // first round of the phase, 1-based
    long length = 0;
    double s1 = 0.0;    // stage-1 target
    double s2 = 0.0;    // stage-2 target published at phase start
    double omega = 0.0; // transfer price (0 in centralized runs)
    double eta = 0.0;   // learner step size used inside the phase
};

/*
    Full per-round record of one run, column-oriented. level1/level2 are the
    start-of-round inventory levels, target2 the stage-2 target actually in
    force that round (it can move inside a phase in decentralized runs).
*/
struct RunTrace {
    std::uint64_t seed = 0;
    long T = 0;
    double d0 = 0.0;     // the extra demand drawn before round 1
    std::string note;    // run-level remarks (e.g. warm-up cap in effect)
    std::vector<double> d;
    std::vector<double> level1;
    std::vector<double> level2;
    std::vector<double> target2;
    std::vector<double> order1;
    std::vector<double> order2;
    std::vector<double> omega;
    std::vector<double> loss_central;
    std::vector<double> loss_agent1;
    std::vector<double> loss_agent2;
    std::vector<EpochRecord> epochs;

    void reserve(long T_) {
        d.reserve(T_); level1.reserve(T_); level2.reserve(T_); target2.reserve(T_);
        order1.reserve(T_); order2.reserve(T_); omega.reserve(T_);
        loss_central.reserve(T_); loss_agent1.reserve(T_); loss_agent2.reserve(T_);
    }
};

// everything one seeded run needs
struct RunParams {
    DemandModel model;
    CostParams costs;
    long T = 1;
    double delta = 0.0;      // confidence parameter; harness defaults to 1/T^2
    double c1 = 1.0;         // exploration-bonus constant
    double c3 = 1.0;         // warm-up length constant
    bool eta_doubled = true; // true: learner step 2B, false: B
    double ogd_eta = 0.0;    // stage-2 batch step size; 0 picks the bounded-gradient rule
    std::uint64_t seed = 0;
};

} // namespace echelon

#endif // ECHELON_TRACE_HPP
