#ifndef ECHELON_OCO_HPP
#define ECHELON_OCO_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace echelon {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline double clamp_to(const Interval& dom, double x) {
    if (!(dom.hi >= dom.lo)) throw std::invalid_argument("empty projection interval");
    return std::clamp(x, dom.lo, dom.hi);
}

// projected (sub)gradient step
inline double pgd_step(double x, double g, double eta, const Interval& dom) {
    return clamp_to(dom, x - eta * g);
}

/*
    Scalar online Newton step: the accumulated squared gradients act as an
    adaptive step-size divisor, and the metric projection reduces to plain
    clamping in one dimension.
*/
struct OnsState {
    double x = 0.0;       // current iterate
    double M = 0.0;       // epsilon + sum of squared gradients seen
    double eta = 0.0;
    double epsilon = 0.0;
    Interval domain;
};

inline OnsState make_ons(double x0, double eta, double epsilon, const Interval& dom) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("ONS regularizer must be positive");
    if (!(eta > 0.0)) throw std::invalid_argument("ONS step size must be positive");
    OnsState s;
    s.x = clamp_to(dom, x0);
    s.M = epsilon;
    s.eta = eta;
    s.epsilon = epsilon;
    s.domain = dom;
    return s;
}

inline OnsState ons_step(OnsState s, double g) {
    s.M += g * g;
    s.x = clamp_to(s.domain, s.x - s.eta * g / s.M);
    return s;
}

/*
    Low-switching wrapper: the inner ONS iterate advances every step, but the
    published decision w is rewritten only at steps t = 2^k, to the running
    average of inner iterates 1..t, and takes effect at step t itself (the
    yet-unfed iterate x_t counts into the average). decision() previews the
    decision for the upcoming step; feed() commits the publish and advances
    the inner state with a subgradient that must be evaluated at the inner
    iterate, not at w.
*/
struct LazyOnsState {
    OnsState inner;     // inner.x is the iterate the next feed will use
    long t = 0;         // feeds so far
    long k = 0;         // publishes so far; next publish at feed 2^k
    double sum_x = 0.0; // sum of already-fed inner iterates
    double w = 0.0;     // committed published decision
};

inline LazyOnsState make_lazy_ons(double x0, double eta, double epsilon, const Interval& dom) {
    LazyOnsState s;
    s.inner = make_ons(x0, eta, epsilon, dom);
    s.w = s.inner.x;
    return s;
}

inline double lazy_ons_decision(const LazyOnsState& s) {
    if (s.t + 1 == (1L << s.k))
        return (s.sum_x + s.inner.x) / static_cast<double>(s.t + 1);
    return s.w;
}

inline LazyOnsState lazy_ons_feed(LazyOnsState s, double g) {
    const long t = s.t + 1;
    if (t == (1L << s.k)) {
        s.w = (s.sum_x + s.inner.x) / static_cast<double>(t);
        s.k += 1;
    }
    s.sum_x += s.inner.x;
    s.inner = ons_step(s.inner, g);
    s.t = t;
    return s;
}

} // namespace echelon

#endif // ECHELON_OCO_HPP
