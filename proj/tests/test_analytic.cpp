#include <spider_linnik/analytic.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

#include <cmath>
#include <vector>

using namespace spider_linnik;

namespace {
constexpr double kPi = 3.14159265358979323846;

// alpha = 1/2 closed forms: the law with LT exp(-sqrt(lambda)) has density
// s^{-3/2} exp(-1/(4s)) / (2 sqrt(pi)); the ratio of two independent copies
// has density r^{-1/2} / (pi (1+r)); conditioned on ratio r, the denominator
// T' satisfies 1/T' ~ Exp(rate b) with b = (1+r)/(4r).
double half_density(double s) {
    return std::pow(s, -1.5) * std::exp(-0.25 / s) / (2.0 * std::sqrt(kPi));
}
double half_conditional(double r, double s) {
    const double b = (1.0 + r) / (4.0 * r);
    return b * std::pow(s, -2.0) * std::exp(-b / s);
}
double half_h(double t, double r) {
    return std::tgamma(1.0 + 0.5 * t) * std::pow(4.0 * r / (1.0 + r), 0.5 * t);
}
}  // namespace

TEST_CASE("tilted exponent closed form") {
    REQUIRE(tilted_exponent(0.5, 0.0, 1.0, 4.0) == Catch::Approx(2.0));
    REQUIRE(tilted_exponent(0.5, 1.0, 3.0, 0.0) == 0.0);
    REQUIRE(tilted_exponent(0.3, 2.0, 1.5, 0.7) ==
            Catch::Approx(1.5 * (std::pow(2.7, 0.3) - std::pow(2.0, 0.3))).epsilon(1e-14));
    REQUIRE_THROWS_AS(tilted_exponent(0.5, -1.0, 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(tilted_exponent(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("gamma-mixture transform properties") {
    const LinnikSpec spec{0.5, {1.0, 2.0}, {1.0, 0.5}, 1.3};
    REQUIRE(linnik_laplace(spec, 0.0) == 1.0);
    double prev = 1.0;
    for (double lam : {0.1, 0.5, 1.0, 2.0, 8.0}) {
        const double v = linnik_laplace(spec, lam);
        REQUIRE(v < prev);
        REQUIRE(v > 0.0);
        prev = v;
    }
    const LinnikSpec bad{0.5, {1.0}, {1.0, 0.5}, 1.0};
    REQUIRE_THROWS_AS(linnik_laplace(bad, 1.0), std::invalid_argument);
}

TEST_CASE("stable density reference values") {
    REQUIRE(stable_density(0.5, 0.25) == Catch::Approx(0.830214994841189).epsilon(1e-8));
    REQUIRE(stable_density(0.5, 1.0) == Catch::Approx(0.219695644733861).epsilon(1e-8));
    REQUIRE(stable_density(0.5, 4.0) == Catch::Approx(0.0331254415430036).epsilon(1e-8));
    REQUIRE(stable_density(0.7, 1.0) == Catch::Approx(0.387395010146592).epsilon(1e-8));
    REQUIRE(stable_density(0.3, 1.0) == Catch::Approx(0.117157002565916).epsilon(1e-8));
    REQUIRE(stable_density(0.6, 2.0) == Catch::Approx(0.100849051088418).epsilon(1e-8));
    for (double s : {0.1, 0.5, 2.0, 10.0})
        REQUIRE(stable_density(0.5, s) == Catch::Approx(half_density(s)).epsilon(1e-8));
    REQUIRE_THROWS_AS(stable_density(0.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(stable_density(1.2, 1.0), std::invalid_argument);
}

TEST_CASE("stable density integrates to one") {
    for (double alpha : {0.3, 0.5, 0.7, 0.9})
        REQUIRE(stable_density_mass(alpha) == Catch::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("stable density reproduces the Laplace transform by quadrature") {
    const auto r = integrate(
        [](double x) {
            const double s = std::exp(x);
            return std::exp(-s) * stable_density(0.6, s) * s;
        },
        -10.0, 8.0);
    REQUIRE(r.value == Catch::Approx(std::exp(-1.0)).epsilon(1e-7));
}

TEST_CASE("ratio density closed forms and symmetry") {
    REQUIRE(lamperti_density(0.3, 2.0) == Catch::Approx(0.040000112187742771).epsilon(1e-13));
    for (double r : {0.2, 1.0, 5.0})
        REQUIRE(lamperti_density(0.5, r) ==
                Catch::Approx(std::pow(r, -0.5) / (kPi * (1.0 + r))).epsilon(1e-13));
    // R and 1/R share the law: f(r) = r^{-2} f(1/r).
    for (double r : {0.3, 0.8, 2.0, 7.0})
        REQUIRE(lamperti_density(0.7, r) ==
                Catch::Approx(std::pow(r, -2.0) * lamperti_density(0.7, 1.0 / r)).epsilon(1e-12));
    const auto mass = integrate(
        [](double x) {
            const double r = std::exp(x);
            return lamperti_density(0.45, r) * r;
        },
        -60.0, 60.0);
    REQUIRE(mass.value == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE_THROWS_AS(lamperti_density(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("conditional denominator density matches the alpha = 1/2 closed form") {
    for (auto [r, s] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {1.0, 2.0}, {2.5, 1.0}})
        REQUIRE(conditional_density_tprime(0.5, r, s) ==
                Catch::Approx(half_conditional(r, s)).epsilon(1e-7));
}

TEST_CASE("conditional denominator density factorizes through the marginals") {
    // f(s | r) = s f(rs) f(s) / f_R(r): the 2d quadrature form must agree with
    // the product of independently computed 1d quadrature densities.
    const double alpha = 0.6, r = 2.5, s = 1.2;
    const double product = s * stable_density(alpha, r * s) * stable_density(alpha, s) /
                           lamperti_density(alpha, r);
    REQUIRE(conditional_density_tprime(alpha, r, s) == Catch::Approx(product).epsilon(1e-7));
    REQUIRE_THROWS_AS(conditional_density_tprime(0.5, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("conditional denominator density integrates to one") {
    // Upper cutoff e^24: the tail decays like s^{-2a}, so the truncated mass
    // is below 1e-9 for both parameter points.
    for (auto [alpha, r] : std::vector<std::pair<double, double>>{{0.5, 1.0}, {0.6, 2.5}}) {
        const auto mass = integrate(
            [&](double x) {
                const double s = std::exp(x);
                return conditional_density_tprime(alpha, r, s) * s;
            },
            -8.0, 24.0);
        REQUIRE(mass.value == Catch::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("conditional negative moment function h") {
    // t = 0 forces h = 1 regardless of alpha and r.
    for (auto [alpha, r] : std::vector<std::pair<double, double>>{{0.3, 0.7}, {0.5, 1.0}, {0.8, 3.0}})
        REQUIRE(h_alpha_t(alpha, 0.0, r) == Catch::Approx(1.0).epsilon(1e-6));
    // alpha = 1/2 closed form.
    for (auto [t, r] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 0.5}, {3.0, 2.0}})
        REQUIRE(h_alpha_t(0.5, t, r) == Catch::Approx(half_h(t, r)).epsilon(1e-7));
    REQUIRE_THROWS_AS(h_alpha_t(0.5, -1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(h_alpha_t(0.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("h integrates against the ratio density to the global moment") {
    // int h_{at} f_R = Gamma(t+1)/Gamma(at+1).
    REQUIRE(h_alpha_t_moment(0.5, 2.0) == Catch::Approx(2.0).epsilon(1e-4));
    REQUIRE(h_alpha_t_moment(0.7, 1.5) == Catch::Approx(1.3004960632613396).epsilon(1e-4));
}

TEST_CASE("levy density closed forms") {
    // One component: ell(x) = a x^{-1} exp(-x nu/mu).
    const LevyQuery one{0.5, {2.0}, {3.0}, 1.5, 100000};
    REQUIRE(levy_density(one).value ==
            Catch::Approx(0.5 / 1.5 * std::exp(-1.5 * 1.5)).epsilon(1e-13));

    // Two components, quadrature path.
    const LevyQuery ex1{0.5, {1.0, 1.0}, {1.0, 0.0}, 1.0, 100000};
    REQUIRE(levy_density(ex1).value == Catch::Approx(0.322517635224574).epsilon(1e-8));
    const LevyQuery ex2{0.5, {0.25, 0.0}, {0.25, 0.25}, 1.0, 100000};
    REQUIRE(levy_density(ex2).value == Catch::Approx(0.0786496035251423).epsilon(1e-8));

    // x -> 0: x ell(x) -> alpha.
    const LevyQuery tiny{0.5, {1.0, 1.0}, {1.0, 0.0}, 1e-8, 100000};
    REQUIRE(tiny.x * levy_density(tiny).value == Catch::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("levy density Monte Carlo path agrees with quadrature") {
    // Padding with a zero-weight third component forces the MC branch while
    // leaving the law untouched.
    const LevyQuery ex1_3d{0.5, {1.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, 1.0, 200000};
    RandomSource rng(201, 0);
    const auto mc = levy_density(ex1_3d, &rng);
    REQUIRE(mc.std_error > 0.0);
    REQUIRE(std::abs(mc.value - 0.322517635224574) < 4.0 * mc.std_error + 1e-9);
    REQUIRE_THROWS_AS(levy_density(ex1_3d, nullptr), std::invalid_argument);

    const LevyQuery bad_x{0.5, {1.0}, {1.0}, 0.0, 100000};
    REQUIRE_THROWS_AS(levy_density(bad_x), std::invalid_argument);
    const LevyQuery bad_mc{0.5, {1.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, 1.0, 100};
    REQUIRE_THROWS_AS(levy_density(bad_mc, &rng), std::invalid_argument);
    const LevyQuery no_mass{0.5, {0.0, 0.0}, {1.0, 0.0}, 1.0, 100000};
    REQUIRE_THROWS_AS(levy_density(no_mass), std::invalid_argument);
}

TEST_CASE("laplace exponent routes agree when the tilt mass is one") {
    const LinnikSpec ex1{0.5, {1.0, 1.0}, {1.0, 0.0}, 1.0};
    REQUIRE(ex1.sigma_is_one());
    RandomSource rng(202, 0);
    for (double lambda : {0.5, 1.0, 2.0}) {
        const auto check = levy_exponent_check(ex1, lambda, 200000, rng);
        REQUIRE(check.rhs ==
                Catch::Approx(std::log1p(std::sqrt(1.0 + lambda) - 1.0 + std::sqrt(lambda)))
                    .epsilon(1e-12));
        REQUIRE(std::abs(check.lhs - check.rhs) < 4.0 * check.lhs_std_error);
    }
    const LinnikSpec off{0.5, {1.0}, {4.0}, 1.0};
    REQUIRE_FALSE(off.sigma_is_one());
    REQUIRE_THROWS_AS(levy_exponent_check(off, 1.0, 1000, rng), std::invalid_argument);
}
