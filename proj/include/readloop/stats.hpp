#pragma once

// Paired comparisons over learners.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "readloop/errors.hpp"
#include "readloop/rng.hpp"

namespace readloop::stats {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline std::vector<double> paired_differences(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("paired samples differ in length");
    if (a.size() < 2) throw Error("paired statistics need at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

struct TTest {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Two-sided paired t-test on a - b. Zero variance gives p = 1 when the
/// mean difference is 0 and p = 0 otherwise.
inline TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
    const auto d = paired_differences(a, b);
    const double n = static_cast<double>(d.size());
    const double m = mean(d);
    const double sd = sample_sd(d);
    TTest r;
    r.df = n - 1.0;
    if (sd == 0.0) {
        r.t = m == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m);
        r.p_value = m == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = m / (sd / std::sqrt(n));
    const boost::math::students_t dist(r.df);
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

/// Quantile with linear interpolation between order statistics (sorted input).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap CI for the mean paired difference, resampling pairs.
inline Interval bootstrap_ci(std::span<const double> differences, int resamples, std::uint64_t seed, double level = 0.95) {
    if (differences.empty()) throw Error("bootstrap needs at least one difference");
    if (resamples < 1) throw Error("bootstrap needs at least one resample");
    Rng rng(seed);
    const auto n = differences.size();
    std::vector<double> means(static_cast<std::size_t>(resamples));
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += differences[rng.below(n)];
        m = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

/// Wilcoxon signed-rank test, normal approximation with tie correction.
/// Zero differences are dropped.
inline double wilcoxon_signed_rank_p(std::span<const double> a, std::span<const double> b) {
    const auto d = paired_differences(a, b);
    std::vector<double> nz;
    for (double x : d)
        if (x != 0.0) nz.push_back(x);
    const std::size_t n = nz.size();
    if (n == 0) return 1.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(nz[i]) < std::abs(nz[j]); });
    std::vector<double> rank(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (nz[i] > 0.0) w_plus += rank[i];
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) return 1.0;
    const double z = (w_plus - mu) / std::sqrt(var);
    const boost::math::normal_distribution<> norm;
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(norm, std::abs(z))));
}

struct PairedComparison {
    std::string metric;
    std::size_t n = 0;
    double adaptive_mean = 0.0;
    double control_mean = 0.0;
    double delta = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double t = 0.0;
    double p_value = 1.0;
    std::optional<double> wilcoxon_p;  // reported when n >= 10
};

inline constexpr int kDefaultResamples = 10000;

inline PairedComparison paired_stats(std::string metric, std::span<const double> adaptive, std::span<const double> control, std::uint64_t seed,
                                     int resamples = kDefaultResamples) {
    const auto d = paired_differences(adaptive, control);
    PairedComparison c;
    c.metric = std::move(metric);
    c.n = d.size();
    c.adaptive_mean = mean(adaptive);
    c.control_mean = mean(control);
    c.delta = mean(d);
    const auto tt = paired_t_test(adaptive, control);
    c.t = tt.t;
    c.p_value = tt.p_value;
    const auto ci = bootstrap_ci(d, resamples, seed);
    c.ci_lo = ci.lo;
    c.ci_hi = ci.hi;
    if (c.n >= 10) c.wilcoxon_p = wilcoxon_signed_rank_p(adaptive, control);
    return c;
}

}  // namespace readloop::stats
