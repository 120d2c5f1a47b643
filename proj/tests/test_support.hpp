#pragma once

// Shared helpers for the unit suite.

#include <spider_linnik/rng.hpp>
#include <spider_linnik/weighted.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace test_support {

inline std::vector<double> draw(std::uint64_t n, std::uint64_t seed, std::uint64_t stream,
                                const std::function<double(spider_linnik::RandomSource&)>& gen) {
    spider_linnik::RandomSource rng(seed, stream);
    std::vector<double> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(gen(rng));
    return out;
}

// |sample mean - target| in units of the estimated standard error.
inline double z_against(const std::vector<double>& values, double target) {
    const auto est = spider_linnik::plain_mean(values);
    if (est.std_error == 0.0) return values.front() == target ? 0.0 : 1e18;
    return std::abs(est.mean - target) / est.std_error;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace test_support
