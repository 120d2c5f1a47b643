#pragma once

// Weighted Monte Carlo estimates and the distribution-comparison toolkit used
// by the identity batteries: self-normalized means with delta-method errors,
// effective sample size, one/two-sample Kolmogorov-Smirnov tests, a weighted
// two-sample KS with label-resampling threshold, and Laplace-transform bands.

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace spider_linnik {

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;  // empty means unit weights

    bool weighted() const { return !weights.empty(); }

    void validate() const {
        if (values.empty()) throw std::invalid_argument("WeightedSample: empty sample");
        if (!weights.empty() && weights.size() != values.size())
            throw std::invalid_argument("WeightedSample: weight/value size mismatch");
        for (double w : weights)
            if (!(w >= 0.0) || !std::isfinite(w))
                throw std::invalid_argument("WeightedSample: weights must be finite and >= 0");
    }
};

inline double effective_sample_size(const std::vector<double>& weights) {
    double sum = 0.0, sum_sq = 0.0;
    for (double w : weights) {
        sum += w;
        sum_sq += w * w;
    }
    if (sum_sq <= 0.0) return 0.0;
    return sum * sum / sum_sq;
}

inline MCEstimate plain_mean(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("plain_mean: empty sample");
    const auto n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = n > 1 ? ss / (static_cast<double>(n) * static_cast<double>(n - 1)) : 0.0;
    return {mean, std::sqrt(var), n};
}

// Self-normalized estimate sum(w v)/sum(w) with the delta-method standard
// error sqrt(sum w_i^2 (v_i - mean)^2) / sum w.
inline MCEstimate weighted_mean(const std::vector<double>& values,
                                const std::vector<double>& weights) {
    if (weights.empty()) return plain_mean(values);
    if (values.size() != weights.size())
        throw std::invalid_argument("weighted_mean: size mismatch");
    double w_sum = 0.0, wv_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        w_sum += weights[i];
        wv_sum += weights[i] * values[i];
    }
    if (!(w_sum > 0.0)) throw std::invalid_argument("weighted_mean: zero total weight");
    const double mean = wv_sum / w_sum;
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        ss += weights[i] * weights[i] * d * d;
    }
    return {mean, std::sqrt(ss) / w_sum, values.size()};
}

inline double normal_two_sided_p(double z) {
    return std::erfc(std::abs(z) / 1.4142135623730951);
}

// Asymptotic Kolmogorov tail: P(sqrt(n_eff) D > x).
inline double kolmogorov_p(double d, double n_eff) {
    const double lambda = d * std::sqrt(n_eff);
    if (lambda < 1e-8) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    double p_value = 0.0;
    double ess_a = 0.0;
    double ess_b = 0.0;
};

namespace detail {
constexpr double kKsCritical01 = 1.6276236115189504;  // sqrt(-log(0.005)/2)

struct PooledItem {
    double value;
    double weight;
    bool from_a;
};

inline double weighted_ks_statistic(const std::vector<PooledItem>& sorted_pool, double w_a,
                                    double w_b) {
    double cum_a = 0.0, cum_b = 0.0, d_max = 0.0;
    std::size_t i = 0;
    while (i < sorted_pool.size()) {
        const double v = sorted_pool[i].value;
        while (i < sorted_pool.size() && sorted_pool[i].value == v) {
            (sorted_pool[i].from_a ? cum_a : cum_b) += sorted_pool[i].weight;
            ++i;
        }
        d_max = std::max(d_max, std::abs(cum_a / w_a - cum_b / w_b));
    }
    return d_max;
}
}  // namespace detail

// Classical unweighted two-sample KS with the asymptotic level-0.01 threshold.
inline KsResult two_sample_ks(std::vector<double> a, std::vector<double> b,
                              double level = 0.01) {
    if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d_max = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d_max = std::max(d_max, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double n_eff = na * nb / (na + nb);
    const double crit = std::sqrt(-std::log(level / 2.0) / 2.0);
    KsResult r;
    r.statistic = d_max;
    r.threshold = crit / std::sqrt(n_eff);
    r.pass = r.statistic <= r.threshold;
    r.p_value = kolmogorov_p(d_max, n_eff);
    r.ess_a = na;
    r.ess_b = nb;
    return r;
}

inline KsResult one_sample_ks(std::vector<double> sample,
                              const std::function<double(double)>& cdf, double level = 0.01) {
    if (sample.empty()) throw std::invalid_argument("one_sample_ks: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d_max = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d_max = std::max(d_max, std::abs(f - static_cast<double>(i + 1) / n));
        d_max = std::max(d_max, std::abs(f - static_cast<double>(i) / n));
    }
    KsResult r;
    r.statistic = d_max;
    r.threshold = std::sqrt(-std::log(level / 2.0) / 2.0) / std::sqrt(n);
    r.pass = r.statistic <= r.threshold;
    r.p_value = kolmogorov_p(d_max, n);
    r.ess_a = n;
    r.ess_b = n;
    return r;
}

// Weighted two-sample KS.  The statistic compares self-normalized weighted
// empirical CDFs; the null threshold is calibrated by resampling the group
// labels of the pooled sample (n_resamples times) and taking the level
// quantile of the resampled statistics.  With 200 resamples at level 0.01 the
// threshold is the second-largest resampled value.
inline KsResult weighted_two_sample_ks(const WeightedSample& a, const WeightedSample& b,
                                       RandomSource& rng, double level = 0.01,
                                       int n_resamples = 200) {
    a.validate();
    b.validate();
    if (n_resamples < 10) throw std::invalid_argument("weighted_two_sample_ks: too few resamples");

    std::vector<detail::PooledItem> pool;
    pool.reserve(a.values.size() + b.values.size());
    double w_a = 0.0, w_b = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double w = a.weighted() ? a.weights[i] : 1.0;
        pool.push_back({a.values[i], w, true});
        w_a += w;
    }
    for (std::size_t i = 0; i < b.values.size(); ++i) {
        const double w = b.weighted() ? b.weights[i] : 1.0;
        pool.push_back({b.values[i], w, false});
        w_b += w;
    }
    if (!(w_a > 0.0) || !(w_b > 0.0))
        throw std::invalid_argument("weighted_two_sample_ks: zero total weight");
    std::sort(pool.begin(), pool.end(),
              [](const detail::PooledItem& x, const detail::PooledItem& y) {
                  return x.value < y.value;
              });

    KsResult r;
    r.statistic = detail::weighted_ks_statistic(pool, w_a, w_b);
    r.ess_a = a.weighted() ? effective_sample_size(a.weights)
                           : static_cast<double>(a.values.size());
    r.ess_b = b.weighted() ? effective_sample_size(b.weights)
                           : static_cast<double>(b.values.size());

    // Label resampling: permute which pooled items belong to group A, keeping
    // the group sizes; weights travel with their values.
    const std::size_t n_a = a.values.size();
    std::vector<std::uint32_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<char> is_a(pool.size());
    std::vector<double> resampled;
    resampled.reserve(n_resamples);
    for (int rep = 0; rep < n_resamples; ++rep) {
        for (std::size_t i = 0; i < n_a; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        std::fill(is_a.begin(), is_a.end(), 0);
        for (std::size_t i = 0; i < n_a; ++i) is_a[idx[i]] = 1;
        double cum_a = 0.0, cum_b = 0.0, d = 0.0, wa = 0.0, wb = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            (is_a[i] ? wa : wb) += pool[i].weight;
        std::size_t i = 0;
        while (i < pool.size()) {
            const double v = pool[i].value;
            while (i < pool.size() && pool[i].value == v) {
                (is_a[i] ? cum_a : cum_b) += pool[i].weight;
                ++i;
            }
            d = std::max(d, std::abs(cum_a / wa - cum_b / wb));
        }
        resampled.push_back(d);
    }
    std::sort(resampled.begin(), resampled.end());
    const std::size_t cut = static_cast<std::size_t>(
        std::ceil((1.0 - level) * (n_resamples + 1))) - 1;
    r.threshold = resampled[std::min(cut, resampled.size() - 1)];
    int ge = 0;
    for (double d : resampled)
        if (d >= r.statistic) ++ge;
    r.p_value = static_cast<double>(ge + 1) / static_cast<double>(n_resamples + 1);
    r.pass = r.statistic <= r.threshold;
    return r;
}

// Laplace-transform band: at each lambda on the grid, the weighted estimate of
// E[exp(-lambda X)] must sit within z_mult standard errors of the target curve.
struct LtBandMember {
    double lambda = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double z = 0.0;
};

struct LtBandReport {
    std::vector<LtBandMember> members;
    double max_z = 0.0;
    double z_mult = 3.0;
    bool pass = false;
};

inline LtBandReport lt_band(const WeightedSample& sample,
                            const std::function<double(double)>& closed_form,
                            const std::vector<double>& lambdas, double z_mult = 3.0) {
    sample.validate();
    if (lambdas.empty()) throw std::invalid_argument("lt_band: empty lambda grid");
    LtBandReport report;
    report.z_mult = z_mult;
    std::vector<double> transformed(sample.values.size());
    for (double lambda : lambdas) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("lt_band: lambda must be >= 0");
        for (std::size_t i = 0; i < sample.values.size(); ++i)
            transformed[i] = std::exp(-lambda * sample.values[i]);
        const MCEstimate est = weighted_mean(transformed, sample.weights);
        LtBandMember m;
        m.lambda = lambda;
        m.estimate = est.mean;
        m.std_error = est.std_error;
        m.target = closed_form(lambda);
        const double diff = std::abs(m.estimate - m.target);
        m.z = est.std_error > 0.0 ? diff / est.std_error
                                  : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        report.members.push_back(m);
        report.max_z = std::max(report.max_z, m.z);
    }
    report.pass = report.max_z <= z_mult;
    return report;
}

// Holm step-down verdict: true when no hypothesis in the family is rejected
// at the given level (reported alongside the per-member raw thresholds).
inline bool holm_all_pass(const std::vector<double>& p_values, double level = 0.01) {
    if (p_values.empty()) return true;
    // The step-down cascade rejects nothing iff the smallest p-value clears
    // the Bonferroni bar level/m.
    const double p_min = *std::min_element(p_values.begin(), p_values.end());
    return p_min * static_cast<double>(p_values.size()) > level;
}

}  // namespace spider_linnik
