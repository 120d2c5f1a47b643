#pragma once

// Closed-form Laplace objects and quadrature-backed densities for the
// tilted-stable / gamma-Linnik family.

#include "quadrature.hpp"
#include "rng.hpp"
#include "samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spider_linnik {

namespace detail {
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kExpUnderflow = 745.0;  // exp(-x) underflows past this

// Largest y such that exp(-c * K(alpha, 1 - e^{-y})) is representable;
// K is increasing in u, so bisection in y is valid.  Returns the clamp
// boundary when even the clamped kernel keeps the integrand alive.
inline double tail_cut_y(double alpha, double c) {
    const double y_hi = -std::log(1.0 - kKanterClampHi);  // ~27.63
    if (c <= 0.0) return y_hi;
    auto dead = [&](double y) {
        return c * std::exp(kanter_log_k(alpha, 1.0 - std::exp(-y))) > kExpUnderflow;
    };
    if (!dead(y_hi)) return y_hi;
    double lo = 1e-12, hi = y_hi;
    if (dead(lo)) return lo;  // entire integrand underflows
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dead(mid) ? hi : lo) = mid;
    }
    return hi;
}

// I(c) = int_0^1 exp(-c K(u)) K(u) du, evaluated under u = 1 - e^{-y} so the
// near-u=1 spike (width ~ c^{1-alpha} in u) becomes O(1) wide on the y scale.
inline double kanter_integral(double alpha, double c, const QuadratureConfig& cfg) {
    const double y_max = tail_cut_y(alpha, c);
    if (y_max <= 1e-10) return 0.0;
    auto integrand = [&](double y) {
        const double eu = std::exp(-y);
        const double log_k = kanter_log_k(alpha, 1.0 - eu);
        const double log_term = -c * std::exp(log_k) + log_k - y;
        return log_term < -kExpUnderflow ? 0.0 : std::exp(log_term);
    };
    return integrate(integrand, 0.0, y_max, cfg).value;
}
}  // namespace detail

// u * ((nu + lambda)^alpha - nu^alpha): the Laplace exponent of the tilted
// subordinator at time u.
inline double tilted_exponent(double alpha, double nu, double u, double lambda) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("tilted_exponent: alpha must lie in (0,1)");
    if (!(nu >= 0.0) || !(u >= 0.0) || !(lambda >= 0.0))
        throw std::invalid_argument("tilted_exponent: nu, u, lambda must be >= 0");
    return u * (std::pow(nu + lambda, alpha) - std::pow(nu, alpha));
}

// Laplace transform of mu . C at argument lambda:
// (1 + sum_i ((nu_i + lambda mu_i)^alpha - nu_i^alpha))^{-t}.
inline double linnik_laplace(const LinnikSpec& spec, double lambda) {
    spec.validate();
    if (spec.mu.size() != spec.nu.size())
        throw std::invalid_argument("linnik_laplace: spec.mu must match spec.nu in size");
    if (!(lambda >= 0.0)) throw std::invalid_argument("linnik_laplace: lambda must be >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.nu.size(); ++i)
        acc += std::pow(spec.nu[i] + lambda * spec.mu[i], spec.alpha) -
               std::pow(spec.nu[i], spec.alpha);
    return std::pow(1.0 + acc, -spec.t);
}

// Density of the stable(alpha) law with LT exp(-lambda^alpha):
// f(s) = a/(1-a) s^{-1/(1-a)} int_0^1 exp(-s^{-a/(1-a)} K(u)) K(u) du.
inline double stable_density(double alpha, double s, const QuadratureConfig& cfg = {}) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("stable_density: alpha must lie in (0,1)");
    if (!(s > 0.0)) throw std::invalid_argument("stable_density: s must be > 0");
    const double p = alpha / (1.0 - alpha);
    const double c = std::pow(s, -p);
    if (!std::isfinite(c)) return 0.0;
    const double integral = detail::kanter_integral(alpha, c, cfg);
    if (integral <= 0.0) return 0.0;
    return (alpha / (1.0 - alpha)) * std::pow(s, -1.0 / (1.0 - alpha)) * integral;
}

// Total mass of stable_density over (0, infinity): log-scale quadrature up to
// S = e^{10/a} (inside the reliable window of the kernel quadrature, whose
// spike degenerates once a log s exceeds ~14), plus the analytic tail
//
//   int_S^inf f = sum_k (-1)^{k+1} Gamma(k a) sin(k pi a) / (pi k!) S^{-k a},
//
// truncated after k = 3 (the k = 4 term is below 1e-18 at this cutoff).
inline double stable_density_mass(double alpha, const QuadratureConfig& cfg = {}) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("stable_density_mass: alpha must lie in (0,1)");
    const double x_hi = 10.0 / alpha;
    // Below s_lo the integrand has already underflowed: s^{-p} K(0+) > 745.
    const double p = alpha / (1.0 - alpha);
    const double k0 = std::pow(alpha, alpha / (1.0 - alpha)) * (1.0 - alpha);
    const double x_lo = std::log(k0 / detail::kExpUnderflow) / p - 1.0;
    auto integrand = [&](double x) {
        const double s = std::exp(x);
        return stable_density(alpha, s, cfg) * s;
    };
    const double body = integrate(integrand, x_lo, x_hi, cfg).value;
    double tail = 0.0, sign = 1.0, kfact = 1.0;
    for (int k = 1; k <= 3; ++k, sign = -sign) {
        kfact *= k;
        tail += sign * std::tgamma(k * alpha) * std::sin(k * detail::kPi * alpha) /
                (detail::kPi * kfact) * std::exp(-k * 10.0);
    }
    return body + tail;
}

// Density of the ratio R = T/T' of two independent stable(alpha) variables.
inline double lamperti_density(double alpha, double r) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("lamperti_density: alpha must lie in (0,1)");
    if (!(r > 0.0)) throw std::invalid_argument("lamperti_density: r must be > 0");
    const double ra = std::pow(r, alpha);
    const double denom = ra * ra + 2.0 * ra * std::cos(detail::kPi * alpha) + 1.0;
    return std::sin(detail::kPi * alpha) / detail::kPi * std::pow(r, alpha - 1.0) / denom;
}

namespace detail {
// r^{2a} + 2 r^a cos(pi a) + 1: the Lamperti denominator, needed as an explicit
// factor by the conditional density and the h-function below.
inline double lamperti_denominator(double alpha, double r) {
    const double ra = std::pow(r, alpha);
    return ra * ra + 2.0 * ra * std::cos(kPi * alpha) + 1.0;
}
}  // namespace detail

// Conditional density of T' at s given the ratio R = T/T' equals r:
//
//   f(s | r) = (pi / sin(pi a)) (r^{2a} + 2 r^a cos(pi a) + 1) r^{-a(2-a)/(1-a)}
//              (a/(1-a))^2 s^{1 - 2/(1-a)} I((rs)^{-a/(1-a)}) I(s^{-a/(1-a)}),
//   I(c)     = int_0^1 exp(-c K(u)) K(u) du,
//
// which is the quadrature expansion of s f_a(rs) f_a(s) / f_R(r).  The double
// integral factorizes exactly, so each factor is a 1d kernel integral.
inline double conditional_density_tprime(double alpha, double r, double s,
                                         const QuadratureConfig& cfg = {}) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("conditional_density_tprime: alpha must lie in (0,1)");
    if (!(r > 0.0) || !(s > 0.0))
        throw std::invalid_argument("conditional_density_tprime: r and s must be > 0");
    const double p = alpha / (1.0 - alpha);
    const double c1 = std::pow(r * s, -p);  // multiplies K(u1)
    const double c2 = std::pow(s, -p);      // multiplies K(u2)
    if (!std::isfinite(c1) || !std::isfinite(c2)) return 0.0;

    const double i1 = detail::kanter_integral(alpha, c1, cfg);
    if (i1 <= 0.0) return 0.0;
    const double i2 = detail::kanter_integral(alpha, c2, cfg);
    if (i2 <= 0.0) return 0.0;

    const double ratio = alpha / (1.0 - alpha);
    const double prefactor = detail::kPi / std::sin(detail::kPi * alpha) *
                             detail::lamperti_denominator(alpha, r) *
                             std::pow(r, -alpha * (2.0 - alpha) / (1.0 - alpha)) * ratio * ratio *
                             std::pow(s, 1.0 - 2.0 / (1.0 - alpha));
    return prefactor * i1 * i2;
}

// h_{at}(r) = E[(T')^{-a t} | R = r]:
//
//   h_{at}(r) = (pi / sin(pi a)) (r^{2a} + 2 r^a cos(pi a) + 1) r^{-a(2-a)/(1-a)}
//               (a/(1-a)) Gamma(t(1-a)+2) D_{a,at}(r),
//   D_{a,at}(r) = intint [r^{-a/(1-a)} K(u1) + K(u2)]^{-(t(1-a)+2)} K(u1) K(u2) du1 du2.
inline double h_alpha_t(double alpha, double t, double r, const QuadratureConfig& cfg = {}) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("h_alpha_t: alpha must lie in (0,1)");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("h_alpha_t: t must be finite and >= 0");
    if (!(r > 0.0)) throw std::invalid_argument("h_alpha_t: r must be > 0");
    const double p = alpha / (1.0 - alpha);
    const double q = t * (1.0 - alpha) + 2.0;
    const double log_a = -p * std::log(r);

    auto integrand = [&](double y1, double y2) {
        const double lk1 = kanter_log_k(alpha, 1.0 - std::exp(-y1));
        const double lk2 = kanter_log_k(alpha, 1.0 - std::exp(-y2));
        // log(a K1 + K2) via the larger term, overflow-free for extreme r.
        const double l1 = log_a + lk1;
        const double m = std::max(l1, lk2);
        const double log_sum = m + std::log1p(std::exp(std::min(l1, lk2) - m));
        const double log_term = -q * log_sum + lk1 + lk2 - y1 - y2;
        return log_term < -detail::kExpUnderflow ? 0.0 : std::exp(log_term);
    };
    const double y_max = -std::log(1.0 - kKanterClampHi);
    QuadratureConfig inner = cfg;
    inner.rel_tol = cfg.rel_tol * 0.1;
    auto outer = [&](double y1) {
        return integrate([&](double y2) { return integrand(y1, y2); }, 0.0, y_max, inner).value;
    };
    const double dbl = integrate(outer, 0.0, y_max, cfg).value;

    return detail::kPi / std::sin(detail::kPi * alpha) * detail::lamperti_denominator(alpha, r) *
           std::pow(r, -alpha * (2.0 - alpha) / (1.0 - alpha)) * (alpha / (1.0 - alpha)) *
           std::tgamma(q) * dbl;
}

namespace detail {
// P(R > r0) for the stable ratio law, in closed form via w = r^{-alpha}:
// (1/(pi a)) [atan((r0^{-a} + cos(pi a)) / sin(pi a)) - (pi/2 - pi a)].
inline double lamperti_upper_tail(double alpha, double r0) {
    const double s = std::sin(kPi * alpha);
    const double w = std::pow(r0, -alpha);
    return (std::atan((w + std::cos(kPi * alpha)) / s) - (kPi / 2.0 - kPi * alpha)) /
           (kPi * alpha);
}
}  // namespace detail

// int_0^inf h_{at}(r) f_R(r) dr, integrated on the log scale.  Equals the
// unconditional negative moment Gamma(t+1)/Gamma(at+1).
//
// The integrand decays like r^{a(t+1)} as r -> 0 and saturates to a constant
// times f_R (so ~ r^{-a}) as r -> inf; h is evaluated only on the window where
// its nested quadrature is reliable (|a log r| <~ 16) and the saturated tail
// beyond the window is added via the closed-form ratio tail mass.
inline double h_alpha_t_moment(double alpha, double t, const QuadratureConfig& cfg = {}) {
    const double x_lo = std::max(-(20.0 / (alpha * (t + 1.0)) + 6.0), -16.0 / alpha);
    const double x_hi = 14.0 / alpha;
    QuadratureConfig point = cfg;
    point.rel_tol = std::max(cfg.rel_tol, 1e-7);
    auto integrand = [&](double x) {
        const double r = std::exp(x);
        return h_alpha_t(alpha, t, r, point) * lamperti_density(alpha, r) * r;
    };
    QuadratureConfig outer = cfg;
    outer.rel_tol = std::max(cfg.rel_tol, 1e-7);
    outer.max_subdivisions = std::min(cfg.max_subdivisions, 10);
    const double body = integrate(integrand, x_lo, x_hi, outer).value;
    const double r_hi = std::exp(x_hi);
    const double tail = h_alpha_t(alpha, t, r_hi, point) * detail::lamperti_upper_tail(alpha, r_hi);
    return body + tail;
}

// Lévy density of the subordinator whose marginal is mu . C at gamma time:
// ell(x) = alpha x^{-1} E[exp(-x G)], G = (nu . T)/(mu . T) over iid stable T.
// N = 1 is closed form, N = 2 integrates against the Lamperti density, and
// N > 2 falls back to antithetic Monte Carlo (std_error reported; 0 otherwise).
struct LevyQuery {
    double alpha = 0.5;
    std::vector<double> mu;
    std::vector<double> nu;
    double x = 1.0;
    int mc_n = 100000;

    void validate() const {
        LinnikSpec probe{alpha, mu, nu, 1.0};
        probe.validate();
        if (mu.size() != nu.size())
            throw std::invalid_argument("LevyQuery: mu must match nu in size");
        if (!(x > 0.0)) throw std::invalid_argument("LevyQuery: x must be > 0");
        if (mc_n < 10000) throw std::invalid_argument("LevyQuery: mc_n must be >= 10000");
        double mu_mass = 0.0;
        for (double m : mu) mu_mass += m;
        if (!(mu_mass > 0.0)) throw std::invalid_argument("LevyQuery: mu must have positive mass");
    }
};

struct LevyDensityResult {
    double value = 0.0;
    double std_error = 0.0;
};

inline LevyDensityResult levy_density(const LevyQuery& query, RandomSource* rng = nullptr,
                                      const QuadratureConfig& cfg = {}) {
    query.validate();
    const double a = query.alpha;
    const std::size_t n_dim = query.nu.size();
    if (n_dim == 1)
        return {a / query.x * std::exp(-query.x * query.nu[0] / query.mu[0]), 0.0};
    if (n_dim == 2) {
        auto ratio = [&](double r) {
            return (query.nu[0] * r + query.nu[1]) / (query.mu[0] * r + query.mu[1]);
        };
        const double span = 40.0 / a;
        auto integrand = [&](double y) {
            const double r = std::exp(y);
            return std::exp(-query.x * ratio(r)) * lamperti_density(a, r) * r;
        };
        const double mean_exp = integrate(integrand, -span, span, cfg).value;
        return {a / query.x * mean_exp, 0.0};
    }
    if (rng == nullptr)
        throw std::invalid_argument("levy_density: N > 2 requires a RandomSource for Monte Carlo");
    // Antithetic pairs: each stable draw uses (u, v) and its mirrored (1-u, 1-v).
    double sum = 0.0, sum_sq = 0.0;
    const int pairs = query.mc_n / 2;
    for (int i = 0; i < pairs; ++i) {
        double g_pos = 0.0, g_neg = 0.0, m_pos = 0.0, m_neg = 0.0;
        for (std::size_t j = 0; j < n_dim; ++j) {
            const double u = rng->uniform();
            const double v = rng->uniform();
            const double exponent = (1.0 - a) / a;
            const double t_pos = std::pow(kanter_k(a, u) / -std::log(v), exponent);
            const double t_neg = std::pow(kanter_k(a, 1.0 - u) / -std::log1p(-v), exponent);
            g_pos += query.nu[j] * t_pos;
            g_neg += query.nu[j] * t_neg;
            m_pos += query.mu[j] * t_pos;
            m_neg += query.mu[j] * t_neg;
        }
        const double val =
            0.5 * (std::exp(-query.x * g_pos / m_pos) + std::exp(-query.x * g_neg / m_neg));
        sum += val;
        sum_sq += val * val;
    }
    const double mean = sum / pairs;
    const double var = std::max(0.0, sum_sq / pairs - mean * mean) / std::max(1, pairs - 1);
    return {a / query.x * mean, a / query.x * std::sqrt(var)};
}

// Two routes to the Laplace exponent of the mu-projected subordinator when
// sigma = sum nu_i^alpha = 1:
//   lhs: alpha E[log(1 + lambda (mu.T)/(nu.T))] by antithetic Monte Carlo,
//   rhs: log(1 + sum_i ((nu_i + lambda mu_i)^alpha - nu_i^alpha)) in closed form.
struct ExponentCheck {
    double lhs = 0.0;
    double lhs_std_error = 0.0;
    double rhs = 0.0;
};

inline ExponentCheck levy_exponent_check(const LinnikSpec& spec, double lambda, int n,
                                         RandomSource& rng) {
    spec.validate();
    if (spec.mu.size() != spec.nu.size())
        throw std::invalid_argument("levy_exponent_check: spec.mu must match spec.nu in size");
    if (!spec.sigma_is_one())
        throw std::invalid_argument("levy_exponent_check: requires sigma = sum nu_i^alpha = 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("levy_exponent_check: lambda must be > 0");
    if (n < 100) throw std::invalid_argument("levy_exponent_check: n must be >= 100");

    const double a = spec.alpha;
    const std::size_t n_dim = spec.nu.size();
    double sum = 0.0, sum_sq = 0.0;
    const int pairs = n / 2;
    for (int i = 0; i < pairs; ++i) {
        double g_pos = 0.0, g_neg = 0.0, m_pos = 0.0, m_neg = 0.0;
        for (std::size_t j = 0; j < n_dim; ++j) {
            const double u = rng.uniform();
            const double v = rng.uniform();
            const double exponent = (1.0 - a) / a;
            const double t_pos = std::pow(kanter_k(a, u) / -std::log(v), exponent);
            const double t_neg = std::pow(kanter_k(a, 1.0 - u) / -std::log1p(-v), exponent);
            g_pos += spec.nu[j] * t_pos;
            g_neg += spec.nu[j] * t_neg;
            m_pos += spec.mu[j] * t_pos;
            m_neg += spec.mu[j] * t_neg;
        }
        const double val =
            0.5 * a * (std::log1p(lambda * m_pos / g_pos) + std::log1p(lambda * m_neg / g_neg));
        sum += val;
        sum_sq += val * val;
    }
    ExponentCheck out;
    out.lhs = sum / pairs;
    const double var = std::max(0.0, sum_sq / pairs - out.lhs * out.lhs) / std::max(1, pairs - 1);
    out.lhs_std_error = std::sqrt(var);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_dim; ++i)
        acc += std::pow(spec.nu[i] + lambda * spec.mu[i], spec.alpha) -
               std::pow(spec.nu[i], spec.alpha);
    out.rhs = std::log1p(acc);
    return out;
}

}  // namespace spider_linnik
