#pragma once

// Exact samplers for one-sided stable laws, exponentially tilted stable
// subordinators, gamma-time-changed (generalized positive Linnik) vectors,
// and the stable-ratio occupation representation.

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace spider_linnik {

inline constexpr double kKanterClampLo = 1e-12;
inline constexpr double kKanterClampHi = 1.0 - 1e-12;

// Kanter integrand kernel for the one-sided stable(alpha) law with Laplace
// transform exp(-lambda^alpha):
//
//   K_alpha(u) = (sin(pi a u) / sin(pi u))^(1/(1-a)) * sin((1-a) pi u) / sin(pi a u)
//              = sin(pi a u)^(a/(1-a)) * sin((1-a) pi u) / sin(pi u)^(1/(1-a)).
//
// K_alpha(0+) = a^(a/(1-a)) * (1-a); K_alpha(u) increases without bound as
// u -> 1-, but every integrand below multiplies it by exp(-c K) with c > 0.
// Arguments outside [1e-12, 1-1e-12] are clamped to that range.
inline double kanter_log_k(double alpha, double u) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("kanter_k: alpha must lie in (0,1)");
    if (!std::isfinite(u)) throw std::invalid_argument("kanter_k: u must be finite");
    u = std::clamp(u, kKanterClampLo, kKanterClampHi);
    const double pi = 3.14159265358979323846;
    const double one_minus = 1.0 - alpha;
    // Log-space evaluation keeps the u -> 1 blow-up exact instead of overflowing.
    return (alpha / one_minus) * std::log(std::sin(pi * alpha * u)) +
           std::log(std::sin(one_minus * pi * u)) -
           (1.0 / one_minus) * std::log(std::sin(pi * u));
}

inline double kanter_k(double alpha, double u) { return std::exp(kanter_log_k(alpha, u)); }

// Stable(alpha) subordinator value at unit time, LT exp(-lambda^alpha):
// T = (K_alpha(U)/E)^((1-alpha)/alpha) with U uniform and E standard exponential.
inline double sample_stable(double alpha, RandomSource& rng) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("sample_stable: alpha must lie in (0,1)");
    const double k = kanter_k(alpha, rng.uniform());
    const double e = rng.exponential();
    return std::pow(k / e, (1.0 - alpha) / alpha);
}

// Exponentially tilted stable subordinator at time/scale u:
// LT exp(-u * ((nu + lambda)^alpha - nu^alpha)).
struct TiltSpec {
    double alpha = 0.5;  // (0,1)
    double nu = 0.0;     // tilt rate, >= 0
    double u = 1.0;      // subordinator time, > 0

    void validate() const {
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw std::invalid_argument("TiltSpec: alpha must lie in (0,1)");
        if (!(nu >= 0.0) || !std::isfinite(nu))
            throw std::invalid_argument("TiltSpec: nu must be finite and >= 0");
        if (!(u > 0.0) || !std::isfinite(u))
            throw std::invalid_argument("TiltSpec: u must be finite and > 0");
    }
};

// One tilted chunk: propose (u_chunk)^{1/alpha} * stable, accept w.p. e^{-nu s}.
// Acceptance probability is exp(-u_chunk * nu^alpha).
inline double tilted_chunk_(double alpha, double nu, double u_chunk, RandomSource& rng) {
    const double scale = std::pow(u_chunk, 1.0 / alpha);
    for (;;) {
        const double s = scale * sample_stable(alpha, rng);
        if (rng.exponential() > nu * s) return s;
    }
}

// Tilted sampler with an explicit chunk count (k >= 1): the subordinator at
// time u equals the sum of k independent copies at time u/k, and each chunk is
// drawn by rejection.  Exposed so the chunk-invariance property is testable.
inline double sample_tilted_stable_chunks(const TiltSpec& spec, std::int64_t k,
                                          RandomSource& rng) {
    spec.validate();
    if (k < 1) throw std::invalid_argument("sample_tilted_stable_chunks: k must be >= 1");
    if (spec.nu == 0.0)
        return std::pow(spec.u, 1.0 / spec.alpha) * sample_stable(spec.alpha, rng);
    const double u_chunk = spec.u / static_cast<double>(k);
    double total = 0.0;
    for (std::int64_t i = 0; i < k; ++i)
        total += tilted_chunk_(spec.alpha, spec.nu, u_chunk, rng);
    return total;
}

// Default chunking k = ceil(u * nu^alpha) keeps per-chunk acceptance >= 1/e.
inline double sample_tilted_stable(const TiltSpec& spec, RandomSource& rng) {
    spec.validate();
    if (spec.nu == 0.0) return sample_tilted_stable_chunks(spec, 1, rng);
    const double mass = spec.u * std::pow(spec.nu, spec.alpha);
    const std::int64_t k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(mass)));
    return sample_tilted_stable_chunks(spec, k, rng);
}

// Weighted family of tilted subordinators run on a common gamma clock:
// C_i = T^{(nu_i)}(gamma_t), observed through weights mu as mu . C.
struct LinnikSpec {
    double alpha = 0.5;
    std::vector<double> mu;  // component weights, >= 0
    std::vector<double> nu;  // component tilts, >= 0 (all-zero is legal: untilted)
    double t = 1.0;          // gamma-clock shape, > 0

    std::size_t dim() const { return nu.size(); }

    double sigma() const {
        double s = 0.0;
        for (double v : nu) s += std::pow(v, alpha);
        return s;
    }

    bool sigma_is_one() const { return std::abs(sigma() - 1.0) < 1e-12; }

    void validate() const {
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw std::invalid_argument("LinnikSpec: alpha must lie in (0,1)");
        if (nu.empty()) throw std::invalid_argument("LinnikSpec: nu must be non-empty");
        if (!mu.empty() && mu.size() != nu.size())
            throw std::invalid_argument("LinnikSpec: mu and nu dimensions differ");
        for (double v : nu)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("LinnikSpec: nu entries must be finite and >= 0");
        for (double v : mu)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("LinnikSpec: mu entries must be finite and >= 0");
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::invalid_argument("LinnikSpec: t must be finite and > 0");
    }
};

struct LinnikDraw {
    std::vector<double> components;
    double gamma_time = 0.0;

    double weighted_total(const std::vector<double>& mu) const {
        double s = 0.0;
        for (std::size_t i = 0; i < components.size(); ++i) s += mu[i] * components[i];
        return s;
    }
};

// Draws the full component vector at a shared gamma(t) time.  An optional
// time divisor m > 0 evaluates the components at gamma_t / m while reporting
// the undivided gamma_time (used by the time-change identity with m != 1).
inline LinnikDraw sample_linnik_marginal(const LinnikSpec& spec, RandomSource& rng,
                                         double time_divisor = 1.0) {
    spec.validate();
    if (!(time_divisor > 0.0))
        throw std::invalid_argument("sample_linnik_marginal: time divisor must be > 0");
    LinnikDraw draw;
    draw.gamma_time = rng.gamma(spec.t);
    draw.components.reserve(spec.dim());
    const double u = draw.gamma_time / time_divisor;
    for (double nu_i : spec.nu) {
        if (u == 0.0) {
            draw.components.push_back(0.0);  // gamma underflow for tiny t: point mass at 0
            continue;
        }
        draw.components.push_back(sample_tilted_stable({spec.alpha, nu_i, u}, rng));
    }
    return draw;
}

// Closed-form scalar marginals of the two canonical alpha = 1/2 examples.
//   example_id 1: gamma(t/2) / beta(1/2, (1+t)/2)   (LT: (sqrt(1+l) - sqrt(l))^t)
//   example_id 2: gamma(t/2) * beta((1+t)/2, (1+t)/2) (LT: 2^t / (1 + sqrt(1+l))^t)
inline double sample_exact_marginal(int example_id, double t, RandomSource& rng) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("sample_exact_marginal: t must be finite and > 0");
    switch (example_id) {
        case 1:
            return rng.gamma(0.5 * t) / rng.beta(0.5, 0.5 * (1.0 + t));
        case 2:
            return rng.gamma(0.5 * t) * rng.beta(0.5 * (1.0 + t), 0.5 * (1.0 + t));
        default:
            throw std::invalid_argument("sample_exact_marginal: example_id must be 1 or 2");
    }
}

// Ratio of two independent stable(alpha) variables; density
// f(r) = (sin(pi a)/pi) r^{a-1} / (r^{2a} + 2 r^a cos(pi a) + 1).
inline double sample_lamperti_ratio(double alpha, RandomSource& rng) {
    return sample_stable(alpha, rng) / sample_stable(alpha, rng);
}

// Stable-ratio representation of spider occupation fractions:
//   fractions_i   = p_i^{1/a} T_i / Sigma,   Sigma = sum_j p_j^{1/a} T_j,
//   local_time_pow = 1 / Sigma              (the L^{1/a} slot of the joint law).
struct OccupationDraw {
    std::vector<double> fractions;
    double local_time_pow = 0.0;
};

inline OccupationDraw sample_spider_occupation(double alpha, const std::vector<double>& p,
                                               RandomSource& rng) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("sample_spider_occupation: alpha must lie in (0,1)");
    if (p.empty()) throw std::invalid_argument("sample_spider_occupation: p must be non-empty");
    double psum = 0.0;
    for (double pi : p) {
        if (!(pi >= 0.0) || !std::isfinite(pi))
            throw std::invalid_argument("sample_spider_occupation: p entries must be >= 0");
        psum += pi;
    }
    if (!(psum > 0.0))
        throw std::invalid_argument("sample_spider_occupation: p must have positive mass");
    if (std::abs(psum - 1.0) > 1e-9)
        throw std::invalid_argument("sample_spider_occupation: p must sum to 1");

    OccupationDraw draw;
    draw.fractions.resize(p.size());
    double sigma = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = p[i] > 0.0 ? std::pow(p[i], 1.0 / alpha) * sample_stable(alpha, rng) : 0.0;
        draw.fractions[i] = w;
        sigma += w;
    }
    for (double& f : draw.fractions) f /= sigma;
    draw.local_time_pow = 1.0 / sigma;
    return draw;
}

}  // namespace spider_linnik
