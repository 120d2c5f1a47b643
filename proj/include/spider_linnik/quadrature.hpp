#pragma once

// Adaptive quadrature used by the analytic evaluators.
//
// 1D integration is boost's adaptive Gauss-Kronrod (15-point); the 2D rule on
// the open unit square is the nested (tensor-product) adaptive form with a
// tightened inner tolerance.  Non-convergence is an error carrying the
// achieved estimate rather than a silent bad value.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace spider_linnik {

struct QuadratureConfig {
    double abs_tol = 1e-10;     // accept when the estimated error is below this
    double rel_tol = 1e-9;      // refinement target handed to the adaptive rule
    double rel_accept = 1e-6;   // accept when est. error / |value| is below this
    int max_subdivisions = 15;  // Gauss-Kronrod recursion depth (2^depth panels)
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& what, double value, double achieved)
        : std::runtime_error(what + " (value=" + std::to_string(value) +
                             ", achieved error estimate=" + std::to_string(achieved) + ")"),
          value_(value),
          achieved_(achieved) {}

    double value() const { return value_; }
    double achieved_error() const { return achieved_; }

private:
    double value_;
    double achieved_;
};

template <typename F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
    using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    double error = 0.0;
    const double value =
        rule::integrate(f, a, b, static_cast<unsigned>(cfg.max_subdivisions), cfg.rel_tol, &error);
    if (!std::isfinite(value))
        throw quadrature_error("integrate: non-finite result", value, error);
    if (error > cfg.abs_tol && error > cfg.rel_accept * std::abs(value))
        throw quadrature_error("integrate: requested tolerance not reached", value, error);
    return {value, error};
}

// Integral of f over (0,1)^2.  The inner integral runs at a tighter tolerance
// so its error does not pollute the outer adaptive refinement; integrands with
// steep edge behavior (the stable kernel blows up toward u = 1) are handled by
// the adaptivity of both levels.
template <typename F>
QuadratureResult integrate_2d_unit_square(F&& f, const QuadratureConfig& cfg = {}) {
    QuadratureConfig inner = cfg;
    inner.rel_tol = cfg.rel_tol * 0.1;
    inner.abs_tol = cfg.abs_tol * 0.1;
    double worst_inner_error = 0.0;
    auto outer_integrand = [&](double u1) {
        auto r = integrate([&](double u2) { return f(u1, u2); }, 0.0, 1.0, inner);
        if (r.error_estimate > worst_inner_error) worst_inner_error = r.error_estimate;
        return r.value;
    };
    auto outer = integrate(outer_integrand, 0.0, 1.0, cfg);
    outer.error_estimate += worst_inner_error;
    return outer;
}

}  // namespace spider_linnik
