#include <spider_linnik/quadrature.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using spider_linnik::QuadratureConfig;
using spider_linnik::integrate;
using spider_linnik::integrate_2d_unit_square;
using spider_linnik::quadrature_error;

TEST_CASE("polynomial integral on [0,1]") {
    const auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    REQUIRE(r.value == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sharp interior feature is resolved adaptively") {
    // int_0^1 exp(-10^4 (x - 0.3)^2) dx = sqrt(pi)/100 up to 1e-84 truncation.
    const auto r = integrate([](double x) { return std::exp(-1e4 * (x - 0.3) * (x - 0.3)); },
                             0.0, 1.0);
    REQUIRE(r.value == Catch::Approx(std::sqrt(3.14159265358979323846) / 100.0).epsilon(1e-10));
}

TEST_CASE("endpoint singularities are refused, not silently mis-integrated") {
    // The rule targets bounded (or substitution-tamed) integrands; a raw
    // x^{-1/2} endpoint singularity must surface as an error.
    REQUIRE_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0),
                      quadrature_error);
    // The standard taming substitution x = t^2 turns it into int_0^1 2 dt.
    const auto r = integrate([](double) { return 2.0; }, 0.0, 1.0);
    REQUIRE(r.value == Catch::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("semi-infinite tail") {
    const auto r = integrate([](double x) { return std::exp(-x); }, 0.0,
                             std::numeric_limits<double>::infinity());
    REQUIRE(r.value == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("2d product integral over the unit square") {
    const auto r = integrate_2d_unit_square([](double x, double y) { return x * y; });
    REQUIRE(r.value == Catch::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("unreachable tolerance raises quadrature_error with diagnostics") {
    QuadratureConfig cfg;
    cfg.abs_tol = 1e-30;
    cfg.rel_tol = 1e-30;
    cfg.rel_accept = 1e-30;
    cfg.max_subdivisions = 2;
    bool threw = false;
    try {
        // Oscillatory integrand that two bisections cannot resolve to 1e-30.
        integrate([](double x) { return std::cos(200.0 * x * x); }, 0.0, 20.0, cfg);
    } catch (const quadrature_error& e) {
        threw = true;
        REQUIRE(std::isfinite(e.value()));
        REQUIRE(e.achieved_error() > cfg.abs_tol);
    }
    REQUIRE(threw);
}
