#pragma once

// Seeded random streams with explicit variate algorithms.
//
// Every variate is derived from raw 64-bit Mersenne Twister output through
// fully specified code paths (no std::*_distribution objects), so a given
// (master_seed, stream_index) pair yields a bit-identical sequence on any
// conforming standard library.  Distinct stream indices give independent
// streams; parallel drivers assign one stream per work chunk.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace spider_linnik {

class RandomSource {
public:
    RandomSource(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_seed_(master_seed), stream_index_(stream_index) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(master_seed),
            static_cast<std::uint32_t>(master_seed >> 32),
            static_cast<std::uint32_t>(stream_index),
            static_cast<std::uint32_t>(stream_index >> 32),
            0x9e3779b9u};
        gen_.seed(seq);
    }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1); 53-bit resolution, never 0 or 1.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform()); }

    double normal() {
        // Box-Muller; two uniforms per variate keeps the stream stateless.
        const double r = std::sqrt(2.0 * exponential());
        const double theta = 6.283185307179586476925286766559 * uniform();
        return r * std::cos(theta);
    }

    // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 is boosted.
    double gamma(double shape) {
        if (!(shape > 0.0) || !std::isfinite(shape))
            throw std::invalid_argument("gamma: shape must be positive and finite");
        if (shape < 1.0) {
            // gamma(a) =d gamma(a+1) * U^{1/a}; computed in log space since
            // U^{1/a} underflows for small shapes, which is fine (the law
            // concentrates at 0) but must not produce NaN.
            const double g = gamma(shape + 1.0);
            const double log_u = -exponential();
            return g * std::exp(log_u / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
                return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    // Integer in [0, bound) by rejection; unbiased.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("below: bound must be positive");
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % bound;
        for (;;) {
            const std::uint64_t x = gen_();
            if (x < limit) return x % bound;
        }
    }

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 gen_;
};

}  // namespace spider_linnik
