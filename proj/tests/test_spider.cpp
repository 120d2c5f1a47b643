#include <spider_linnik/spider.hpp>
#include <spider_linnik/weighted.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

using namespace spider_linnik;
using test_support::z_against;

namespace {
constexpr double kPi = 3.14159265358979323846;

SpiderConfig make_config(std::vector<double> p, std::int64_t n_steps) {
    SpiderConfig cfg;
    cfg.p = std::move(p);
    cfg.n_steps = n_steps;
    return cfg;
}

std::int64_t total_occupation(const SpiderPathSummary& s) {
    std::int64_t total = 0;
    for (std::int64_t c : s.occupation) total += c;
    return total;
}
}  // namespace

TEST_CASE("spider config validation") {
    REQUIRE_THROWS_AS(make_config({}, 10).validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(make_config({0.7, 0.2}, 10).validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(make_config({1.2, -0.2}, 10).validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(make_config({1.0}, 11).validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(make_config({1.0}, 0).validate(), std::invalid_argument);
    SpiderConfig bad_scale = make_config({1.0}, 10);
    bad_scale.local_time_scale = 0.0;
    REQUIRE_THROWS_AS(bad_scale.validate(), std::invalid_argument);
    REQUIRE_NOTHROW(make_config({0.5, 0.3, 0.2}, 10).validate());
}

TEST_CASE("free walk path invariants") {
    const SpiderConfig cfg = make_config({0.5, 0.3, 0.2}, 2000);
    RandomSource rng(11, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const SpiderPathSummary s = simulate_spider(cfg, rng);
        REQUIRE(s.n_steps == cfg.n_steps);
        REQUIRE(total_occupation(s) == cfg.n_steps);
        REQUIRE(s.zero_visits >= 1);
        REQUIRE(s.end_distance >= 0);
        if (s.end_distance == 0) {
            REQUIRE(s.end_ray == -1);
        } else {
            REQUIRE(s.end_ray >= 0);
            REQUIRE(s.end_ray < 3);
            REQUIRE(s.occupation[static_cast<std::size_t>(s.end_ray)] > 0);
        }
        const std::vector<double> f = s.fractions();
        double mass = 0.0;
        for (double v : f) mass += v;
        REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("free walk is reproducible per seed and stream") {
    const SpiderConfig cfg = make_config({0.4, 0.6}, 1000);
    RandomSource a(99, 7), b(99, 7), c(99, 8);
    const SpiderPathSummary sa = simulate_spider(cfg, a);
    const SpiderPathSummary sb = simulate_spider(cfg, b);
    const SpiderPathSummary sc = simulate_spider(cfg, c);
    REQUIRE(sa.occupation == sb.occupation);
    REQUIRE(sa.zero_visits == sb.zero_visits);
    REQUIRE(sa.end_distance == sb.end_distance);
    REQUIRE((sa.occupation != sc.occupation || sa.end_distance != sc.end_distance));
}

TEST_CASE("zero entries in p are never chosen") {
    const SpiderConfig cfg = make_config({0.0, 1.0}, 2000);
    RandomSource rng(5, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const SpiderPathSummary s = simulate_spider(cfg, rng);
        REQUIRE(s.occupation[0] == 0);
        REQUIRE(s.occupation[1] == cfg.n_steps);
    }
}

TEST_CASE("endpoint distance and hub visits balance in expectation") {
    // Pathwise, distance-at-n minus hub visits is a mean-zero martingale
    // (discrete Tanaka), so the paired difference has exact mean 0.
    const SpiderConfig cfg = make_config({1.0}, 400);
    RandomSource rng(2024, 1);
    std::vector<double> diff;
    diff.reserve(4000);
    for (int rep = 0; rep < 4000; ++rep) {
        const SpiderPathSummary s = simulate_spider(cfg, rng);
        diff.push_back(static_cast<double>(s.end_distance - s.zero_visits));
    }
    REQUIRE(std::abs(z_against(diff, 0.0)) < 4.0);
}

TEST_CASE("normalized hub local time matches its limit moments") {
    // With scale sqrt(2), L at unit time is distributed as sqrt(2)|Z|:
    // mean 2/sqrt(pi), second moment 2.
    const SpiderConfig cfg = make_config({1.0}, 10000);
    RandomSource rng(31, 4);
    std::vector<double> lt, lt2;
    lt.reserve(3000);
    lt2.reserve(3000);
    for (int rep = 0; rep < 3000; ++rep) {
        const SpiderPathSummary s = simulate_spider(cfg, rng);
        const double value = local_time(s, cfg.local_time_scale, static_cast<double>(cfg.n_steps));
        lt.push_back(value);
        lt2.push_back(value * value);
    }
    REQUIRE(std::abs(z_against(lt, 2.0 / std::sqrt(kPi))) < 4.0);
    REQUIRE(std::abs(z_against(lt2, 2.0)) < 4.0);
}

TEST_CASE("two equal rays give arcsine occupation") {
    const SpiderConfig cfg = make_config({0.5, 0.5}, 20000);
    RandomSource rng(7, 2);
    std::vector<double> frac;
    frac.reserve(2000);
    for (int rep = 0; rep < 2000; ++rep)
        frac.push_back(simulate_spider(cfg, rng).fractions()[0]);
    const auto ks = one_sample_ks(
        frac, [](double x) { return 2.0 / kPi * std::asin(std::sqrt(x)); }, 0.01);
    REQUIRE(ks.pass);
}

TEST_CASE("mean occupation fractions equal the ray probabilities") {
    const SpiderConfig cfg = make_config({0.5, 0.3, 0.2}, 2000);
    RandomSource rng(13, 3);
    std::vector<std::vector<double>> frac(3);
    for (int rep = 0; rep < 2000; ++rep) {
        const std::vector<double> f = simulate_spider(cfg, rng).fractions();
        for (std::size_t i = 0; i < 3; ++i) frac[i].push_back(f[i]);
    }
    for (std::size_t i = 0; i < 3; ++i)
        REQUIRE(std::abs(z_against(frac[i], cfg.p[i])) < 4.0);
}

TEST_CASE("bridge path invariants") {
    const SpiderConfig cfg = make_config({0.25, 0.75}, 2000);
    RandomSource rng(17, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const SpiderPathSummary s = simulate_spider_bridge(cfg, rng);
        REQUIRE(total_occupation(s) == cfg.n_steps);
        REQUIRE(s.end_distance == 0);
        REQUIRE(s.end_ray == -1);
        REQUIRE(s.zero_visits >= 1);
    }
    RandomSource a(42, 9), b(42, 9);
    const SpiderPathSummary sa = simulate_spider_bridge(cfg, a);
    const SpiderPathSummary sb = simulate_spider_bridge(cfg, b);
    REQUIRE(sa.occupation == sb.occupation);
    REQUIRE(sa.zero_visits == sb.zero_visits);
}

TEST_CASE("bridge with two equal rays gives uniform occupation") {
    const SpiderConfig cfg = make_config({0.5, 0.5}, 2000);
    RandomSource rng(23, 5);
    std::vector<double> frac;
    frac.reserve(2500);
    for (int rep = 0; rep < 2500; ++rep)
        frac.push_back(simulate_spider_bridge(cfg, rng).fractions()[0]);
    const auto ks = one_sample_ks(
        frac, [](double x) { return std::min(1.0, std::max(0.0, x)); }, 0.01);
    REQUIRE(ks.pass);
    REQUIRE(std::abs(z_against(frac, 0.5)) < 4.0);
}

TEST_CASE("killed walk bookkeeping") {
    const SpiderConfig cfg = make_config({0.5, 0.5}, 4000);
    RandomSource rng(3, 6);
    for (int rep = 0; rep < 200; ++rep) {
        const KilledSpiderPath k = simulate_killed_spider(cfg, 1.0, rng);
        REQUIRE(k.last_zero_time <= k.kill_time);
        REQUIRE(k.last_zero_time % 2 == 0);
        REQUIRE(total_occupation(k.to_last_zero) == k.last_zero_time);
        REQUIRE(k.to_last_zero.n_steps == k.last_zero_time);
        REQUIRE(k.to_last_zero.end_ray == -1);
        REQUIRE(k.to_last_zero.zero_visits >= 0);
    }
    RandomSource bad(1, 1);
    REQUIRE_THROWS_AS(simulate_killed_spider(cfg, 0.0, bad), std::invalid_argument);
    REQUIRE_THROWS_AS(simulate_killed_spider(cfg, 4000.0, bad), std::invalid_argument);
}

TEST_CASE("local time at a unit-rate kill is exponential") {
    // Radial local time stopped at an independent rate-theta clock is
    // exponential with rate theta^(1/2); theta = 1 gives Exp(1).
    const SpiderConfig cfg = make_config({1.0}, 10000);
    RandomSource rng(29, 8);
    std::vector<double> lt;
    lt.reserve(2500);
    for (int rep = 0; rep < 2500; ++rep) {
        const KilledSpiderPath k = simulate_killed_spider(cfg, 1.0, rng);
        lt.push_back(local_time(k.to_last_zero, cfg.local_time_scale,
                                static_cast<double>(cfg.n_steps)));
    }
    const auto ks = one_sample_ks(lt, [](double x) { return 1.0 - std::exp(-x); }, 0.01);
    REQUIRE(ks.pass);
}
