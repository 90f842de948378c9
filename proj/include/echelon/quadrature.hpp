#ifndef ECHELON_QUADRATURE_HPP
#define ECHELON_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace echelon {

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm))
        throw std::runtime_error("integrand returned a non-finite value");
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-8, int max_depth = 30) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
        throw std::runtime_error("integrand returned a non-finite value");
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/*
    Integrate with known kink locations pre-split out, so the adaptive rule
    converges at full order on each smooth piece.
*/
template <class F>
double integrate_piecewise(const F& f, double a, double b, std::vector<double> kinks,
                           double tol = 1e-8, int max_depth = 30) {
    if (!(b > a)) return 0.0;
    kinks.push_back(a);
    kinks.push_back(b);
    std::sort(kinks.begin(), kinks.end());
    double total = 0.0;
    double lo = a;
    for (double k : kinks) {
        const double hi = std::clamp(k, a, b);
        if (hi > lo + 1e-14) {
            total += integrate(f, lo, hi, tol, max_depth);
            lo = hi;
        }
    }
    if (b > lo + 1e-14) total += integrate(f, lo, b, tol, max_depth);
    return total;
}

} // namespace echelon

#endif // ECHELON_QUADRATURE_HPP
