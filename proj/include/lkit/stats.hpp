#pragma once

// Descriptive statistics shared by the feature sets. Undefined results are
// reported as NaN; the feature layer turns NaN into a missing value.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lkit/error.hpp"

namespace lkit::stats {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline double mean(std::span<const double> v) {
    if (v.empty()) return nan;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample variance (n - 1 denominator).
inline double variance(std::span<const double> v) {
    if (v.size() < 2) return nan;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double sd(std::span<const double> v) { return std::sqrt(variance(v)); }

inline double min(std::span<const double> v) {
    return v.empty() ? nan : *std::min_element(v.begin(), v.end());
}

inline double max(std::span<const double> v) {
    return v.empty() ? nan : *std::max_element(v.begin(), v.end());
}

/// Quantile with linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile(std::span<const double> v, double q) {
    if (v.empty()) return nan;
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

/// Pearson correlation; NaN when either side has zero variance.
inline double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) return nan;
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return nan;
    return sab / std::sqrt(saa * sbb);
}

/// a / b, NaN unless both are finite and b is non-zero.
inline double ratio(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || b == 0.0) return nan;
    return a / b;
}

/// m3 / m2^1.5 with population central moments.
inline double skewness(std::span<const double> v) {
    if (v.size() < 2) return nan;
    const double m = mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    if (m2 <= 0.0) return nan;
    return m3 / std::pow(m2, 1.5);
}

/// Excess kurtosis m4 / m2^2 - 3 with population central moments.
inline double kurtosis(std::span<const double> v) {
    if (v.size() < 2) return nan;
    const double m = mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(v.size());
    m4 /= static_cast<double>(v.size());
    if (m2 <= 0.0) return nan;
    return m4 / (m2 * m2) - 3.0;
}

/// Values with NaN entries removed.
inline std::vector<double> finite_only(std::span<const double> v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double x : v)
        if (!std::isnan(x)) out.push_back(x);
    return out;
}

inline std::size_t count_nan(std::span<const double> v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }));
}

enum class Stat { min, q25, mean, median, q75, max, sd };

inline double compute(Stat s, std::span<const double> v) {
    switch (s) {
    case Stat::min: return min(v);
    case Stat::q25: return quantile(v, 0.25);
    case Stat::mean: return mean(v);
    case Stat::median: return median(v);
    case Stat::q75: return quantile(v, 0.75);
    case Stat::max: return max(v);
    case Stat::sd: return sd(v);
    }
    return nan;
}

inline const char* suffix(Stat s) {
    switch (s) {
    case Stat::min: return "min";
    case Stat::q25: return "lq";
    case Stat::mean: return "mean";
    case Stat::median: return "median";
    case Stat::q75: return "uq";
    case Stat::max: return "max";
    case Stat::sd: return "sd";
    }
    return "";
}

/// Bandwidth by Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
inline double silverman_bandwidth(std::span<const double> v) {
    const double s = sd(v);
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    double lo = std::min(s, iqr / 1.34);
    if (!(lo > 0.0)) lo = s;
    if (!(lo > 0.0)) lo = std::abs(v.empty() ? 1.0 : v[0]);
    if (!(lo > 0.0)) lo = 1.0;
    return 0.9 * lo * std::pow(static_cast<double>(v.size()), -0.2);
}

struct DensityPeaks {
    std::size_t peaks = 0;
    double skewness = nan;
    double kurtosis = nan;
    double bandwidth = nan;
};

/// Gaussian kernel density on a 512-point grid over [min - 3h, max + 3h].
/// A peak is a strict interior local maximum of the density whose prominence
/// (height above the higher of its two surrounding bases) is at least
/// `min_prominence` times the global density maximum. Sampling noise in the
/// tails produces maxima far below 1% prominence.
inline DensityPeaks kde_peak_count(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
                                   double min_prominence = 0.01) {
    if (values.size() < 4) throw InvalidArgument("kde_peak_count needs at least 4 values");
    DensityPeaks out;
    const double lo = min(values);
    const double hi = max(values);
    if (!(hi > lo)) {
        out.peaks = 1;
        return out;
    }
    out.skewness = skewness(values);
    out.kurtosis = kurtosis(values);
    const double h = bandwidth.value_or(silverman_bandwidth(values));
    out.bandwidth = h;

    constexpr std::size_t grid = 512;
    const double a = lo - 3.0 * h;
    const double b = hi + 3.0 * h;
    const double step = (b - a) / static_cast<double>(grid - 1);
    std::vector<double> dens(grid, 0.0);
    for (std::size_t g = 0; g < grid; ++g) {
        const double x = a + step * static_cast<double>(g);
        double s = 0.0;
        for (double v : values) {
            const double z = (x - v) / h;
            s += std::exp(-0.5 * z * z);
        }
        dens[g] = s;
    }
    const double top = *std::max_element(dens.begin(), dens.end());

    for (std::size_t g = 1; g + 1 < grid; ++g) {
        if (!(dens[g] > dens[g - 1] && dens[g] > dens[g + 1])) continue;
        double left = dens[g];
        std::size_t k = g;
        while (k > 0 && dens[k] <= dens[g]) left = std::min(left, dens[--k]);
        double right = dens[g];
        k = g;
        while (k + 1 < grid && dens[k] <= dens[g]) right = std::min(right, dens[++k]);
        if (dens[g] - std::max(left, right) >= min_prominence * top) ++out.peaks;
    }
    out.peaks = std::max<std::size_t>(out.peaks, 1);
    return out;
}

} // namespace lkit::stats
