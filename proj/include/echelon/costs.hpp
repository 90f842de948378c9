#ifndef ECHELON_COSTS_HPP
#define ECHELON_COSTS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "echelon/demand.hpp"
#include "echelon/quadrature.hpp"

namespace echelon {

/*
    Per-round cost rates. h1/h2 are holding costs at the downstream/upstream
    stage, p1 the backorder penalty at the downstream stage, alpha the share
    of the penalty billed downstream (the rest upstream). alpha cancels in
    every total-cost quantity; it only moves cost between the two ledgers.
*/
struct CostParams {
    double h1 = 0.0;
    double h2 = 0.0;
    double p1 = 0.0;
    double alpha = 1.0;
};

inline CostParams make_costs(double h1, double h2, double p1, double alpha = 1.0) {
    if (!(h1 >= 0.0) || !(h2 >= 0.0) || !(p1 > 0.0))
        throw std::invalid_argument("costs need h1,h2 >= 0 and p1 > 0");
    if (!(h2 <= h1))
        throw std::invalid_argument("upstream holding cost must not exceed downstream (h2 <= h1)");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("penalty share alpha must lie in [0,1]");
    if (!std::isfinite(h1) || !std::isfinite(h2) || !std::isfinite(p1))
        throw std::invalid_argument("costs must be finite");
    return CostParams{h1, h2, p1, alpha};
}

// downstream critical ratio; in (0,1] because h2 <= h1
inline double quantile_level(const CostParams& cp) {
    return (cp.h2 + cp.p1) / (cp.h1 + cp.p1);
}

// E[(y - x)^+], closed form per demand kind
inline double expected_excess(const DemandModel& m, double y) {
    if (y <= m.d) return 0.0;
    if (m.kind == DemandKind::discrete) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.atoms.size(); ++i)
            acc += m.weights[i] * std::max(0.0, y - m.atoms[i]);
        return acc;
    }
    if (y >= m.D) return y - m.mean;
    switch (m.kind) {
    case DemandKind::uniform:
        return (y - m.d) * (y - m.d) / (2.0 * (m.D - m.d));
    case DemandKind::truncated_gaussian: {
        // integral of the truncated cdf over [d, y]
        const double a = (m.d - m.mu) / m.sigma;
        const double zy = (y - m.mu) / m.sigma;
        const double Z = detail::std_normal_cdf((m.D - m.mu) / m.sigma) - detail::std_normal_cdf(a);
        const double anti_y = zy * detail::std_normal_cdf(zy) + detail::std_normal_pdf(zy);
        const double anti_a = a * detail::std_normal_cdf(a) + detail::std_normal_pdf(a);
        return (m.sigma * (anti_y - anti_a) - detail::std_normal_cdf(a) * (y - m.d)) / Z;
    }
    case DemandKind::truncated_exponential: {
        const double Z = std::exp(-m.rate * m.d) - std::exp(-m.rate * m.D);
        return (std::exp(-m.rate * m.d) * (y - m.d)
                + (std::exp(-m.rate * y) - std::exp(-m.rate * m.d)) / m.rate) / Z;
    }
    default:
        return 0.0;
    }
}

// E[(x - y)^+] = mean - y + E[(y - x)^+]
inline double expected_shortfall(const DemandModel& m, double y) {
    return m.mean - y + expected_excess(m, y);
}

// E[h(s - x)^+ + p(x - s)^+], the one-stage newsvendor objective
inline double expected_pinball(const DemandModel& m, double h, double p, double s) {
    return h * expected_excess(m, s) + p * expected_shortfall(m, s);
}

inline double g_one(const CostParams& cp, const DemandModel& m, double s) {
    return expected_pinball(m, cp.h1, cp.alpha * cp.p1, s);
}

inline double g_two(const CostParams& cp, const DemandModel& m, double s) {
    return (1.0 - cp.alpha) * cp.p1 * expected_shortfall(m, s);
}

inline double g_total(const CostParams& cp, const DemandModel& m, double s) {
    return expected_pinball(m, cp.h1, cp.p1, s);
}

namespace detail {

// antiderivative of expected_excess for the uniform kind: int_d^y E[(u-x)^+] du
inline double uniform_excess_integral(const DemandModel& m, double y) {
    if (y <= m.d) return 0.0;
    const double span = m.D - m.d;
    if (y <= m.D) {
        const double t = y - m.d;
        return t * t * t / (6.0 * span);
    }
    const double at_D = span * span / 6.0;
    const double a = m.D - m.mean;
    const double b = y - m.mean;
    return at_D + 0.5 * (b * b - a * a);
}

/*
    int_{max(s2,d)}^{D} [A E[(u-x)^+] + B E[(x-u)^+]]_{u = s1+s2-x} phi(x) dx,
    the stage-1 cost averaged over the shortfall branch. Closed form for
    uniform demand, adaptive quadrature otherwise.
*/
inline double shortfall_branch_average(const DemandModel& m, double s1, double s2,
                                       double A, double B) {
    const double lo = std::max(s2, m.d);
    if (lo >= m.D) return 0.0;
    if (m.kind == DemandKind::uniform) {
        // substitute u = s1+s2-x and integrate A*excess + B*(mean - u + excess)
        const double uhi = s1 + s2 - lo;
        const double ulo = s1 + s2 - m.D;
        const double exc = uniform_excess_integral(m, uhi) - uniform_excess_integral(m, ulo);
        const double lin = m.mean * (uhi - ulo) - 0.5 * (uhi * uhi - ulo * ulo);
        return ((A + B) * exc + B * lin) / (m.D - m.d);
    }
    const auto f = [&](double x) {
        const double u = s1 + s2 - x;
        return (A * expected_excess(m, u) + B * expected_shortfall(m, u)) * pdf(m, x);
    };
    // expected_excess changes branch where s1+s2-x crosses the support ends
    return integrate_piecewise(f, lo, m.D, {s1 + s2 - m.d, s1 + s2 - m.D});
}

// P(x < s2), strict; differs from the cdf only at discrete atoms
inline double prob_below(const DemandModel& m, double s2) {
    if (m.kind != DemandKind::discrete) return cdf(m, s2);
    double acc = 0.0;
    for (std::size_t i = 0; i < m.atoms.size() && m.atoms[i] < s2; ++i) acc += m.weights[i];
    return acc;
}

// same quantity as shortfall_branch_average for a discrete law: exact sum over atoms >= s2
inline double shortfall_branch_average_discrete(const DemandModel& m, double s1, double s2,
                                                double A, double B) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        if (m.atoms[i] < s2) continue;
        const double u = s1 + s2 - m.atoms[i];
        acc += m.weights[i] * (A * expected_excess(m, u) + B * expected_shortfall(m, u));
    }
    return acc;
}

inline double branch_term(const DemandModel& m, double s1, double s2, double A, double B) {
    if (m.kind == DemandKind::discrete)
        return prob_below(m, s2) * (A * expected_excess(m, s1) + B * expected_shortfall(m, s1))
               + shortfall_branch_average_discrete(m, s1, s2, A, B);
    return cdf(m, s2) * (A * expected_excess(m, s1) + B * expected_shortfall(m, s1))
           + shortfall_branch_average(m, s1, s2, A, B);
}

} // namespace detail

// downstream share of the stationary per-round expected cost
inline double h1_expected(const CostParams& cp, const DemandModel& m, double s1, double s2) {
    return detail::branch_term(m, s1, s2, cp.h1, cp.alpha * cp.p1);
}

// upstream share: own holding plus its slice of the penalty
inline double h2_expected(const CostParams& cp, const DemandModel& m, double s1, double s2) {
    return cp.h2 * expected_excess(m, s2)
           + detail::branch_term(m, s1, s2, 0.0, (1.0 - cp.alpha) * cp.p1);
}

// stationary per-round expected cost of holding base-stock targets (s1, s2)
inline double h_expected(const CostParams& cp, const DemandModel& m, double s1, double s2) {
    return cp.h2 * expected_excess(m, s2) + detail::branch_term(m, s1, s2, cp.h1, cp.p1);
}

// d/ds2 of h_expected, continuous kinds only
inline double grad_h_s2(const CostParams& cp, const DemandModel& m, double s1, double s2) {
    if (m.kind == DemandKind::discrete)
        throw std::invalid_argument("gradient needs a continuous demand law");
    const double phi2 = cdf(m, s2);
    double tail = 0.0;
    const double uhi = m.D - s2;
    const double ulo = std::max(0.0, m.d - s2);
    if (uhi > ulo) {
        const auto f = [&](double u) { return cdf(m, s1 - u) * pdf(m, u + s2); };
        tail = integrate_piecewise(f, ulo, uhi, {s1 - m.D, s1 - m.d});
    }
    return cp.h2 * phi2 - cp.p1 * (1.0 - phi2) + (cp.h1 + cp.p1) * tail;
}

// weight of the exploration bonus added to the upstream objective
inline double augmentation_kappa(const CostParams& cp, double delta, double T, double c1,
                                 double L, double D) {
    if (!(L >= 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("augmentation needs L >= 1 and delta in (0,1)");
    return c1 * (cp.h1 + cp.p1) * std::sqrt(std::log(T * D / delta) / L);
}

// h_expected plus a bonus proportional to int_0^{s2} cdf, shrinking as samples accrue
inline double augmented_loss(const CostParams& cp, const DemandModel& m, double s1, double s2,
                             double L, double delta, double T, double c1) {
    return h_expected(cp, m, s1, s2)
           + augmentation_kappa(cp, delta, T, c1, L, m.D) * expected_excess(m, s2);
}

inline double s1_star(const CostParams& cp, const DemandModel& m) {
    return inverse_cdf(m, quantile_level(cp));
}

// largest upstream target the learner is allowed; below D by a density-controlled margin
inline double s_max(const CostParams& cp, const DemandModel& m) {
    if (m.kind == DemandKind::discrete) return m.D;
    return m.D - cp.h2 / (m.Gamma * (cp.h2 + cp.p1));
}

namespace detail {

inline double s2_star_discrete(const CostParams& cp, const DemandModel& m, double s1) {
    // piecewise-linear in s2: kinks at atoms and at atom-pair offsets a_i + a_j - s1
    std::vector<double> cand = m.atoms;
    for (double ai : m.atoms)
        for (double aj : m.atoms) {
            const double c = ai + aj - s1;
            if (c > m.d && c < m.D) cand.push_back(c);
        }
    cand.push_back(m.d);
    cand.push_back(m.D);
    double best_s = m.d, best_v = h_expected(cp, m, s1, m.d);
    for (double c : cand) {
        const double v = h_expected(cp, m, s1, c);
        if (v < best_v - 1e-15 || (std::abs(v - best_v) <= 1e-15 && c < best_s)) {
            best_v = v;
            best_s = c;
        }
    }
    return best_s;
}

} // namespace detail

inline double s2_star(const CostParams& cp, const DemandModel& m) {
    const double s1 = s1_star(cp, m);
    if (m.kind == DemandKind::discrete) return detail::s2_star_discrete(cp, m, s1);
    double lo = m.d, hi = s_max(cp, m);
    double glo = grad_h_s2(cp, m, s1, lo);
    double ghi = grad_h_s2(cp, m, s1, hi);
    if (!std::isfinite(glo) || !std::isfinite(ghi))
        throw std::runtime_error("gradient evaluation failed at the bracket ends");
    if (glo >= 0.0) return lo;  // objective increasing on the whole bracket
    if (ghi <= 0.0) return hi;  // still decreasing at the cap
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        (grad_h_s2(cp, m, s1, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// transfer price that aligns the upstream agent's pinball optimum with s2_star
inline double omega_star(const CostParams& cp, const DemandModel& m) {
    const double phi = cdf(m, s2_star(cp, m));
    if (phi >= 1.0) return cp.h2 + cp.p1 + 1.0; // cap, matches the contract-maker cap
    return cp.h2 * phi / (1.0 - phi);
}

struct OptimalLevels {
    double s1 = 0.0;
    double s2 = 0.0;
    double omega = 0.0;
    double h_star = 0.0;
};

inline OptimalLevels optimal_levels(const CostParams& cp, const DemandModel& m) {
    OptimalLevels out;
    out.s1 = s1_star(cp, m);
    out.s2 = s2_star(cp, m);
    const double phi = cdf(m, out.s2);
    out.omega = phi >= 1.0 ? cp.h2 + cp.p1 + 1.0 : cp.h2 * phi / (1.0 - phi);
    out.h_star = h_expected(cp, m, out.s1, out.s2);
    return out;
}

/*
    Second-moment control constant for the upstream pinball loss
    f(x) = h2 (x-d)^+ + omega (x-d)^-: the squared subgradient along the
    direction to the optimum is at most B times the expected-gradient term.
*/
inline double bernstein_bound(const CostParams& cp, const DemandModel& m, double omega) {
    if (!(omega >= 0.0)) throw std::invalid_argument("omega must be nonnegative");
    const double num = std::max(omega * omega, cp.h2 * cp.h2);
    if (m.kind != DemandKind::discrete) {
        if (!(m.gamma > 0.0)) throw std::invalid_argument("continuous bound needs gamma > 0");
        return num / (m.gamma * (cp.h2 + omega));
    }
    const double kappa = omega / (cp.h2 + omega);
    double below = 0.0;
    double theta = -1.0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        const double at = below + m.weights[i];
        if (std::abs(below - kappa) < 1e-12 || std::abs(at - kappa) < 1e-12)
            throw std::invalid_argument("quantile level sits exactly on an atom; bound undefined");
        if (below < kappa && kappa < at) {
            theta = std::min(at - kappa, kappa - below);
            break;
        }
        below = at;
    }
    if (theta <= 0.0)
        throw std::invalid_argument("no atom straddles the quantile level");
    return m.D * num / (theta * (cp.h2 + omega));
}

} // namespace echelon

#endif // ECHELON_COSTS_HPP
