#ifndef ECHELON_DEMAND_HPP
#define ECHELON_DEMAND_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "echelon/rng.hpp"

namespace echelon {

enum class DemandKind { uniform, truncated_gaussian, truncated_exponential, discrete };

/*
    Demand law on a bounded support [d, D]. Truncated kinds are the base law
    conditioned on [d, D] (rejection sampling, renormalized density), so the
    density stays inside [gamma, Gamma]. Discrete kind is a finite atom list;
    gamma/Gamma are not defined for it and stay 0.
*/
struct DemandModel {
    DemandKind kind = DemandKind::uniform;
    double d = 0.0;              // support lower end
    double D = 0.0;              // support upper end
    double mu = 0.0;             // gaussian mean
    double sigma = 0.0;          // gaussian std
    double rate = 0.0;           // exponential rate
    std::vector<double> atoms;   // discrete support, sorted ascending
    std::vector<double> weights; // discrete probabilities, sum 1
    double gamma = 0.0;          // min density on [d, D] (continuous kinds)
    double Gamma = 0.0;          // max density on [d, D] (continuous kinds)
    double mean = 0.0;           // E[x]
    std::string label;           // config-facing name

    bool continuous() const { return kind != DemandKind::discrete; }
};

namespace detail {

inline double std_normal_pdf(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
}

inline double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.7071067811865476);
}

inline void require_support(double d, double D) {
    if (!(d > 0.0) || !(D > d) || !std::isfinite(D))
        throw std::invalid_argument("demand support must satisfy 0 < d < D < inf");
}

// compact number text for labels and file names (no trailing zero padding)
inline std::string label_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace detail

inline DemandModel make_uniform_demand(double d, double D) {
    detail::require_support(d, D);
    DemandModel m;
    m.kind = DemandKind::uniform;
    m.d = d;
    m.D = D;
    m.gamma = m.Gamma = 1.0 / (D - d);
    m.mean = 0.5 * (d + D);
    m.label = "uniform:" + detail::label_num(d) + ":" + detail::label_num(D);
    return m;
}

inline DemandModel make_truncated_gaussian_demand(double d, double D, double mu, double sigma) {
    detail::require_support(d, D);
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian std must be positive");
    DemandModel m;
    m.kind = DemandKind::truncated_gaussian;
    m.d = d;
    m.D = D;
    m.mu = mu;
    m.sigma = sigma;
    const double a = (d - mu) / sigma;
    const double b = (D - mu) / sigma;
    const double Z = detail::std_normal_cdf(b) - detail::std_normal_cdf(a);
    if (!(Z > 1e-12)) throw std::invalid_argument("gaussian truncation leaves negligible mass");
    // density is unimodal: max at the point of [d,D] closest to mu, min at the far end
    const double zmode = std::clamp(mu, d, D);
    m.Gamma = detail::std_normal_pdf((zmode - mu) / sigma) / (sigma * Z);
    m.gamma = std::min(detail::std_normal_pdf(a), detail::std_normal_pdf(b)) / (sigma * Z);
    m.mean = mu + sigma * (detail::std_normal_pdf(a) - detail::std_normal_pdf(b)) / Z;
    m.label = "tgauss:" + detail::label_num(d) + ":" + detail::label_num(D) + ":"
              + detail::label_num(mu) + ":" + detail::label_num(sigma);
    return m;
}

inline DemandModel make_truncated_exponential_demand(double d, double D, double rate) {
    detail::require_support(d, D);
    if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
    DemandModel m;
    m.kind = DemandKind::truncated_exponential;
    m.d = d;
    m.D = D;
    m.rate = rate;
    const double Z = std::exp(-rate * d) - std::exp(-rate * D);
    m.Gamma = rate * std::exp(-rate * d) / Z; // density decreasing
    m.gamma = rate * std::exp(-rate * D) / Z;
    m.mean = (std::exp(-rate * d) * (d + 1.0 / rate) - std::exp(-rate * D) * (D + 1.0 / rate)) / Z;
    m.label = "texp:" + detail::label_num(d) + ":" + detail::label_num(D) + ":"
              + detail::label_num(rate);
    return m;
}

inline DemandModel make_discrete_demand(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.empty() || atoms.size() != weights.size())
        throw std::invalid_argument("discrete demand needs matching nonempty atom/weight lists");
    std::vector<std::size_t> idx(atoms.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    DemandModel m;
    m.kind = DemandKind::discrete;
    double wsum = 0.0;
    for (std::size_t i : idx) {
        if (!(atoms[i] > 0.0)) throw std::invalid_argument("discrete atoms must be positive");
        if (!(weights[i] > 0.0)) throw std::invalid_argument("discrete weights must be positive");
        if (!m.atoms.empty() && atoms[i] <= m.atoms.back())
            throw std::invalid_argument("discrete atoms must be distinct");
        m.atoms.push_back(atoms[i]);
        m.weights.push_back(weights[i]);
        wsum += weights[i];
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("discrete weights must sum to 1");
    for (double& w : m.weights) w /= wsum;
    m.d = m.atoms.front();
    m.D = m.atoms.back();
    m.mean = 0.0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) m.mean += m.atoms[i] * m.weights[i];
    m.label = "discrete:" + std::to_string(m.atoms.size()) + "atoms";
    return m;
}

inline double cdf(const DemandModel& m, double x) {
    if (x < m.d) return 0.0;
    if (x >= m.D) return 1.0;
    switch (m.kind) {
    case DemandKind::uniform:
        return (x - m.d) / (m.D - m.d);
    case DemandKind::truncated_gaussian: {
        const double lo = detail::std_normal_cdf((m.d - m.mu) / m.sigma);
        const double hi = detail::std_normal_cdf((m.D - m.mu) / m.sigma);
        return (detail::std_normal_cdf((x - m.mu) / m.sigma) - lo) / (hi - lo);
    }
    case DemandKind::truncated_exponential: {
        const double Z = std::exp(-m.rate * m.d) - std::exp(-m.rate * m.D);
        return (std::exp(-m.rate * m.d) - std::exp(-m.rate * x)) / Z;
    }
    case DemandKind::discrete: {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.atoms.size() && m.atoms[i] <= x; ++i) acc += m.weights[i];
        return acc;
    }
    }
    return 0.0;
}

// density; only meaningful for continuous kinds (0 outside [d, D])
inline double pdf(const DemandModel& m, double x) {
    if (x < m.d || x > m.D) return 0.0;
    switch (m.kind) {
    case DemandKind::uniform:
        return 1.0 / (m.D - m.d);
    case DemandKind::truncated_gaussian: {
        const double lo = detail::std_normal_cdf((m.d - m.mu) / m.sigma);
        const double hi = detail::std_normal_cdf((m.D - m.mu) / m.sigma);
        return detail::std_normal_pdf((x - m.mu) / m.sigma) / (m.sigma * (hi - lo));
    }
    case DemandKind::truncated_exponential: {
        const double Z = std::exp(-m.rate * m.d) - std::exp(-m.rate * m.D);
        return m.rate * std::exp(-m.rate * x) / Z;
    }
    case DemandKind::discrete:
        throw std::invalid_argument("pdf undefined for discrete demand");
    }
    return 0.0;
}

// min{z : cdf(z) >= kappa}, clamped to [d, D]
inline double inverse_cdf(const DemandModel& m, double kappa) {
    if (!(kappa >= 0.0 && kappa <= 1.0))
        throw std::invalid_argument("quantile level must lie in [0,1]");
    if (kappa <= 0.0) return m.d;
    if (kappa >= 1.0) return m.D;
    switch (m.kind) {
    case DemandKind::uniform:
        return m.d + kappa * (m.D - m.d);
    case DemandKind::truncated_exponential: {
        const double Z = std::exp(-m.rate * m.d) - std::exp(-m.rate * m.D);
        return -std::log(std::exp(-m.rate * m.d) - kappa * Z) / m.rate;
    }
    case DemandKind::truncated_gaussian: {
        double lo = m.d, hi = m.D;
        for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
            const double mid = 0.5 * (lo + hi);
            (cdf(m, mid) < kappa ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    case DemandKind::discrete: {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            acc += m.weights[i];
            if (acc >= kappa - 1e-12) return m.atoms[i];
        }
        return m.atoms.back();
    }
    }
    return m.d;
}

inline double sample(const DemandModel& m, RngStream& rng) {
    switch (m.kind) {
    case DemandKind::uniform:
        return m.d + (m.D - m.d) * rng.uniform01();
    case DemandKind::truncated_gaussian: {
        std::normal_distribution<double> law(m.mu, m.sigma);
        for (int tries = 0; tries < 100000; ++tries) {
            const double x = law(rng);
            if (x >= m.d && x <= m.D) return x;
        }
        throw std::runtime_error("rejection sampling retry cap hit (gaussian parameters "
                                 "put almost no mass on the support)");
    }
    case DemandKind::truncated_exponential: {
        std::exponential_distribution<double> law(m.rate);
        for (int tries = 0; tries < 100000; ++tries) {
            const double x = law(rng);
            if (x >= m.d && x <= m.D) return x;
        }
        throw std::runtime_error("rejection sampling retry cap hit (exponential rate "
                                 "puts almost no mass on the support)");
    }
    case DemandKind::discrete: {
        const double u = rng.uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            acc += m.weights[i];
            if (u < acc) return m.atoms[i];
        }
        return m.atoms.back();
    }
    }
    return m.d;
}

/*
    Empirical CDF of a sample set: eval(x) = (#samples <= x)/L, and the
    min-z inverse used for empirical quantiles.
*/
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
        if (sorted_.empty()) throw std::invalid_argument("empirical CDF needs at least one sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    double eval(double x) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    // min{z : eval(z) >= kappa}; kappa = 0 gives the smallest sample
    double inverse(double kappa) const {
        if (!(kappa >= 0.0 && kappa <= 1.0))
            throw std::invalid_argument("quantile level must lie in [0,1]");
        const double L = static_cast<double>(sorted_.size());
        std::size_t idx = 0;
        if (kappa > 0.0) {
            const double k = std::ceil(kappa * L - 1e-9);
            idx = static_cast<std::size_t>(std::max(1.0, k)) - 1;
            idx = std::min(idx, sorted_.size() - 1);
        }
        return sorted_[idx];
    }

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

// deterministic stand-in for "no data yet": quantile midpoints of uniform[d, D]
inline std::vector<double> prior_pseudo_samples(const DemandModel& m, std::size_t n = 256) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = m.d + (static_cast<double>(i) + 0.5) * (m.D - m.d) / static_cast<double>(n);
    return out;
}

} // namespace echelon

#endif // ECHELON_DEMAND_HPP
