#pragma once

// Signal-fidelity and detection-accuracy metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apxsig/errors.hpp"
#include "apxsig/signal_io.hpp"

namespace apxsig {

enum class MetricId { PSNR, SSIM1D, PEAK_ACC };

inline std::string to_string(MetricId m) {
    switch (m) {
    case MetricId::PSNR: return "PSNR";
    case MetricId::SSIM1D: return "SSIM1D";
    case MetricId::PEAK_ACC: return "PEAK_ACC";
    }
    return "?";
}

inline MetricId metric_from_string(std::string_view s) {
    if (s == "PSNR") return MetricId::PSNR;
    if (s == "SSIM1D" || s == "SSIM") return MetricId::SSIM1D;
    if (s == "PEAK_ACC") return MetricId::PEAK_ACC;
    throw ConfigError("unknown metric '" + std::string(s) + "' (expected PSNR|SSIM1D|PEAK_ACC)");
}

namespace detail {

inline double dynamic_range(std::span<const std::int32_t> ref) {
    const auto [lo, hi] = std::minmax_element(ref.begin(), ref.end());
    return static_cast<double>(*hi) - static_cast<double>(*lo);
}

inline void require_pair(const Signal& ref, const Signal& test, std::size_t min_len, const char* what) {
    if (ref.size() != test.size())
        throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(ref.size()) + " vs " +
                            std::to_string(test.size()) + ")");
    if (ref.size() < min_len)
        throw ArgumentError(std::string(what) + ": need at least " + std::to_string(min_len) + " samples");
}

} // namespace detail

/// PSNR in dB with the reference's observed range as peak; +inf for identical signals.
inline double psnr(const Signal& ref, const Signal& test) {
    detail::require_pair(ref, test, 1, "psnr");
    const double range = detail::dynamic_range(ref.samples);
    if (range == 0.0) throw UndefinedMetricError("psnr: reference signal is constant");
    double sse = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = static_cast<double>(ref.samples[i]) - static_cast<double>(test.samples[i]);
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(ref.size());
    return 10.0 * std::log10(range * range / mse);
}

/// Mean sliding-window (stride 1) SSIM with C1 = (0.01 L)^2 and C2 = (0.03 L)^2,
/// L being the reference's observed range.
inline double ssim1d(const Signal& ref, const Signal& test, std::size_t window = 8) {
    if (window < 2) throw ArgumentError("ssim1d: window must be at least 2");
    detail::require_pair(ref, test, window, "ssim1d");
    const double range = detail::dynamic_range(ref.samples);
    if (range == 0.0) throw UndefinedMetricError("ssim1d: reference signal is constant");
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    const double w = static_cast<double>(window);

    double total = 0.0;
    const std::size_t count = ref.size() - window + 1;
    for (std::size_t s = 0; s < count; ++s) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = s; i < s + window; ++i) {
            mx += ref.samples[i];
            my += test.samples[i];
        }
        mx /= w;
        my /= w;
        double vx = 0.0, vy = 0.0, cxy = 0.0;
        for (std::size_t i = s; i < s + window; ++i) {
            const double dx = ref.samples[i] - mx, dy = test.samples[i] - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
        vx /= w;
        vy /= w;
        cxy /= w;
        total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(count);
}

struct PeakMatch {
    double accuracy = 100.0; // percent of truth peaks matched
    std::size_t matched = 0;
    std::size_t missed = 0;
    std::size_t false_positives = 0;
};

/// Greedy one-to-one matching of sorted index lists within +/- tol samples.
/// An empty truth set scores 100%.
inline PeakMatch peak_accuracy(std::span<const std::size_t> truth, std::span<const std::size_t> detected,
                               std::size_t tol_samples = 10) {
    PeakMatch r;
    std::size_t i = 0, j = 0;
    while (i < truth.size() && j < detected.size()) {
        if (detected[j] + tol_samples < truth[i]) {
            ++r.false_positives;
            ++j;
        } else if (detected[j] > truth[i] + tol_samples) {
            ++r.missed;
            ++i;
        } else {
            ++r.matched;
            ++i;
            ++j;
        }
    }
    r.missed += truth.size() - i;
    r.false_positives += detected.size() - j;
    if (!truth.empty())
        r.accuracy = 100.0 * static_cast<double>(r.matched) / static_cast<double>(truth.size());
    return r;
}

} // namespace apxsig
