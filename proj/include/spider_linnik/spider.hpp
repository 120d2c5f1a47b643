#pragma once

// Lattice walks on a spider graph: N half-line rays glued at a hub.  The
// radial part is a reflected simple random walk; each excursion from the hub
// runs on an independently chosen ray.  Paths are reduced to the per-ray
// step-occupation counts, the hub-visit count, and the endpoint.

#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace spider_linnik {

struct SpiderConfig {
    std::vector<double> p;          // ray-choice probabilities, sum to 1
    std::int64_t n_steps = 10000;   // even path length / lattice time scale
    // Hub-visit normalization L = scale * visits / sqrt(n_steps).  sqrt(2)
    // makes L converge to the local time whose inverse is the stable(1/2)
    // subordinator with exponent theta^(1/2) (so L at unit time has mean
    // 2/sqrt(pi) and second moment 2).
    double local_time_scale = 1.4142135623730951;

    void validate() const {
        if (p.empty()) throw std::invalid_argument("SpiderConfig: p must be non-empty");
        double mass = 0.0;
        for (double v : p) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("SpiderConfig: p entries must be finite and >= 0");
            mass += v;
        }
        if (std::abs(mass - 1.0) > 1e-9)
            throw std::invalid_argument("SpiderConfig: p must sum to 1");
        if (n_steps < 2 || n_steps % 2 != 0)
            throw std::invalid_argument("SpiderConfig: n_steps must be even and >= 2");
        if (!(local_time_scale > 0.0))
            throw std::invalid_argument("SpiderConfig: local_time_scale must be > 0");
    }
};

// Occupation is counted per step: the step leaving the hub belongs to the ray
// it opens, so the counts over rays always sum to the number of steps taken.
struct SpiderPathSummary {
    std::vector<std::int64_t> occupation;
    std::int64_t zero_visits = 0;  // times k in [0, n_steps) with the walk at the hub
    std::int64_t n_steps = 0;
    std::int64_t end_ray = -1;     // -1 when the path ends at the hub
    std::int64_t end_distance = 0;

    std::vector<double> fractions() const {
        std::vector<double> f(occupation.size(), 0.0);
        if (n_steps == 0) return f;
        for (std::size_t i = 0; i < occupation.size(); ++i)
            f[i] = static_cast<double>(occupation[i]) / static_cast<double>(n_steps);
        return f;
    }
};

// L = scale * zero_visits / sqrt(time_scale); time_scale is the lattice time
// unit, which for killed paths differs from the recorded path length.
inline double local_time(const SpiderPathSummary& path, double scale, double time_scale) {
    return scale * static_cast<double>(path.zero_visits) / std::sqrt(time_scale);
}

namespace detail {
inline std::size_t pick_ray(const std::vector<double>& p, RandomSource& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last_positive = i;
        if (u <= acc) return i;
    }
    return last_positive;  // guards the ~1e-9 slack in the mass check
}
}  // namespace detail

inline SpiderPathSummary simulate_spider(const SpiderConfig& cfg, RandomSource& rng) {
    cfg.validate();
    SpiderPathSummary out;
    out.occupation.assign(cfg.p.size(), 0);
    out.n_steps = cfg.n_steps;
    std::int64_t m = 0;
    std::size_t ray = 0;
    for (std::int64_t k = 0; k < cfg.n_steps; ++k) {
        if (m == 0) {
            ++out.zero_visits;
            ray = detail::pick_ray(cfg.p, rng);
            ++out.occupation[ray];
            m = 1;
        } else {
            ++out.occupation[ray];
            m += rng.uniform() < 0.5 ? 1 : -1;
        }
    }
    out.end_distance = m;
    out.end_ray = m > 0 ? static_cast<std::int64_t>(ray) : -1;
    return out;
}

// Bridge: the radial signed walk is a uniformly random arrangement of
// n_steps/2 up-steps and n_steps/2 down-steps (exchangeability makes this an
// exact bridge sampler), and every excursion gets a fresh ray label.
inline SpiderPathSummary simulate_spider_bridge(const SpiderConfig& cfg, RandomSource& rng) {
    cfg.validate();
    const std::int64_t n = cfg.n_steps;
    std::vector<std::int8_t> steps(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) steps[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : -1;
    for (std::int64_t i = 0; i < n - 1; ++i) {
        const std::int64_t j = i + static_cast<std::int64_t>(
                                       rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(steps[static_cast<std::size_t>(i)], steps[static_cast<std::size_t>(j)]);
    }

    SpiderPathSummary out;
    out.occupation.assign(cfg.p.size(), 0);
    out.n_steps = n;
    std::int64_t s = 0;
    std::size_t ray = 0;
    for (std::int64_t k = 0; k < n; ++k) {
        if (s == 0) {
            ++out.zero_visits;
            ray = detail::pick_ray(cfg.p, rng);
        }
        ++out.occupation[ray];
        s += steps[static_cast<std::size_t>(k)];
    }
    if (s != 0) throw std::logic_error("simulate_spider_bridge: endpoint must be the hub");
    out.end_distance = 0;
    out.end_ray = -1;
    return out;
}

// Walk killed at an independent geometric time with per-step hazard
// theta / n_steps (the lattice version of an exponential clock of rate theta).
struct KilledSpiderPath {
    SpiderPathSummary to_last_zero;  // occupation of completed excursions only
    std::int64_t kill_time = 0;
    std::int64_t last_zero_time = 0;
};

inline KilledSpiderPath simulate_killed_spider(const SpiderConfig& cfg, double theta,
                                               RandomSource& rng) {
    cfg.validate();
    const double hazard = theta / static_cast<double>(cfg.n_steps);
    if (!(hazard > 0.0) || !(hazard < 1.0))
        throw std::invalid_argument("simulate_killed_spider: need 0 < theta < n_steps");
    const std::int64_t kill = static_cast<std::int64_t>(
        std::floor(std::log(rng.uniform()) / std::log1p(-hazard)));

    KilledSpiderPath out;
    out.kill_time = kill;
    out.to_last_zero.occupation.assign(cfg.p.size(), 0);
    std::vector<std::int64_t> occ(cfg.p.size(), 0);
    std::int64_t m = 0, zeros = 0;
    std::size_t ray = 0;
    for (std::int64_t k = 0; k < kill; ++k) {
        if (m == 0) {
            out.to_last_zero.occupation = occ;
            out.last_zero_time = k;
            ++zeros;
            ray = detail::pick_ray(cfg.p, rng);
            ++occ[ray];
            m = 1;
        } else {
            ++occ[ray];
            m += rng.uniform() < 0.5 ? 1 : -1;
        }
    }
    if (m == 0) {
        out.to_last_zero.occupation = occ;
        out.last_zero_time = kill;
    }
    out.to_last_zero.zero_visits = zeros;  // the hub is not revisited afterwards
    out.to_last_zero.n_steps = out.last_zero_time;
    return out;
}

}  // namespace spider_linnik
