#pragma once

// Fixed-point five-stage QRS detector in which every addition and
// multiplication goes through a composite approximate unit.
//
// Scaling: 16-bit samples, Q15 coefficients, 32-bit accumulation,
// arithmetic right shift to renormalize, symmetric saturation to 16 bits at
// every stage output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "apxsig/arith.hpp"
#include "apxsig/energy.hpp"
#include "apxsig/library.hpp"
#include "apxsig/signal_io.hpp"
#include "apxsig/stage.hpp"

namespace apxsig {

inline constexpr std::size_t lpf_taps = 11;
inline constexpr std::size_t hpf_taps = 32;
inline constexpr std::size_t mwi_window = 32;
inline constexpr unsigned mwi_shift = 5;
inline constexpr unsigned diff_shift = 3;
inline constexpr unsigned sqr_shift = 16;
inline constexpr unsigned q15_shift = 15;

inline std::int32_t saturate16(std::int64_t v) noexcept {
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(v, -32768, 32767));
}

namespace detail {

// Hamming-windowed sinc, normalized to unit DC gain, centred at (taps-1)/2.
inline std::vector<double> windowed_sinc(std::size_t taps, double fc, double fs) {
    const double centre = static_cast<double>(taps - 1) / 2.0;
    const double wc = 2.0 * fc / fs;
    std::vector<double> h(taps);
    double sum = 0.0;
    for (std::size_t n = 0; n < taps; ++n) {
        const double t = static_cast<double>(n) - centre;
        const double sinc = t == 0.0 ? wc : std::sin(std::numbers::pi * wc * t) / (std::numbers::pi * t);
        const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                                  static_cast<double>(taps - 1));
        h[n] = sinc * w;
        sum += h[n];
    }
    for (auto& v : h) v /= sum;
    return h;
}

// Rounds to Q15 and moves the rounding residue onto the two centre taps so the
// taps sum to exactly `target`.
inline std::vector<std::int32_t> quantize_q15(const std::vector<double>& h, std::int32_t target) {
    std::vector<std::int32_t> q(h.size());
    std::int32_t sum = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        q[i] = static_cast<std::int32_t>(std::lround(h[i] * 32768.0));
        sum += q[i];
    }
    const std::int32_t residue = target - sum;
    const std::size_t c0 = (h.size() - 1) / 2, c1 = h.size() / 2;
    if (c0 == c1) {
        q[c0] += residue;
    } else {
        q[c0] += residue / 2;
        q[c1] += residue - residue / 2;
    }
    return q;
}

} // namespace detail

/// 11-tap low-pass, fc = 12 Hz at 200 Hz, Q15, taps sum to exactly 1.0.
inline const std::vector<std::int32_t>& lpf_coefficients() {
    static const auto q = detail::quantize_q15(detail::windowed_sinc(lpf_taps, 12.0, 200.0), 32768);
    return q;
}

/// 32-tap high-pass, fc = 5 Hz at 200 Hz: half-sample-delay impulse minus a
/// 32-tap low-pass. Taps sum to exactly zero.
inline const std::vector<std::int32_t>& hpf_coefficients() {
    static const auto q = [] {
        auto lp = detail::quantize_q15(detail::windowed_sinc(hpf_taps, 5.0, 200.0), 32768);
        for (auto& v : lp) v = -v;
        lp[hpf_taps / 2 - 1] += 16384;
        lp[hpf_taps / 2] += 16384;
        return lp;
    }();
    return q;
}

/// Composite units of one stage, resolved once against the library.
class StageArithmetic {
public:
    StageArithmetic(const StageConfig& cfg, const ModuleLibrary& lib)
        : adder_(stage_adder_config(cfg, lib)), mult_(stage_mult_config(cfg, lib)) {}

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept {
        return static_cast<std::uint32_t>(
            detail::ripple_add(adder_.cell_spec.table, adder_.width, adder_.k_approx, a, b, 0).sum);
    }

    /// Two's-complement subtraction a - b through the same adder.
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const noexcept {
        return static_cast<std::uint32_t>(
            detail::ripple_add(adder_.cell_spec.table, adder_.width, adder_.k_approx, a, ~b, 1).sum);
    }

    std::int64_t mul(std::int32_t a, std::int32_t b) const { return mult_.signed_product(a, b); }

private:
    CompositeAdderConfig adder_;
    RecursiveMultiplier mult_;
};

namespace detail {

inline std::uint32_t bits(std::int64_t v) noexcept { return static_cast<std::uint32_t>(v); }
inline std::int32_t as_signed(std::uint32_t v) noexcept { return static_cast<std::int32_t>(v); }

inline void require_stage(const StageConfig& cfg, StageId want) {
    if (cfg.stage != want)
        throw ArgumentError("stage config for " + to_string(cfg.stage) + " passed to " + to_string(want));
}

// Direct-form FIR: one multiplier per tap, taps-1 accumulation adders.
inline Signal run_fir(const Signal& x, const std::vector<std::int32_t>& coef, const StageConfig& cfg,
                      const ModuleLibrary& lib) {
    cfg.validate(lib);
    const StageArithmetic unit(cfg, lib);
    Signal y{std::vector<std::int32_t>(x.size()), x.fs, 16};
    for (std::size_t n = 0; n < x.size(); ++n) {
        std::uint32_t acc = bits(unit.mul(coef[0], x.samples[n]));
        for (std::size_t t = 1; t < coef.size(); ++t) {
            const std::int32_t xv = n >= t ? x.samples[n - t] : 0;
            acc = unit.add(acc, bits(unit.mul(coef[t], xv)));
        }
        y.samples[n] = saturate16(as_signed(acc) >> q15_shift);
    }
    return y;
}

} // namespace detail

inline Signal run_lpf(const Signal& x, const StageConfig& cfg, const ModuleLibrary& lib) {
    detail::require_stage(cfg, StageId::LPF);
    return detail::run_fir(x, lpf_coefficients(), cfg, lib);
}

inline Signal run_hpf(const Signal& x, const StageConfig& cfg, const ModuleLibrary& lib) {
    detail::require_stage(cfg, StageId::HPF);
    return detail::run_fir(x, hpf_coefficients(), cfg, lib);
}

/// y(n) = (2x(n) + x(n-1) - x(n-3) - 2x(n-4)) >> 3 with doubling done by self-addition.
inline Signal run_diff(const Signal& x, const StageConfig& cfg, const ModuleLibrary& lib) {
    detail::require_stage(cfg, StageId::DIFF);
    cfg.validate(lib);
    const StageArithmetic unit(cfg, lib);
    auto at = [&](std::size_t n, std::size_t d) -> std::uint32_t {
        return n >= d ? detail::bits(x.samples[n - d]) : 0u;
    };
    Signal y{std::vector<std::int32_t>(x.size()), x.fs, 16};
    for (std::size_t n = 0; n < x.size(); ++n) {
        const auto x0 = at(n, 0), x4 = at(n, 4);
        auto s = unit.add(unit.add(x0, x0), at(n, 1));
        s = unit.sub(s, at(n, 3));
        s = unit.sub(s, unit.add(x4, x4));
        y.samples[n] = saturate16(detail::as_signed(s) >> diff_shift);
    }
    return y;
}

/// y(n) = x(n)^2 >> 16 on a single 16x16 multiplier.
inline Signal run_sqr(const Signal& x, const StageConfig& cfg, const ModuleLibrary& lib) {
    detail::require_stage(cfg, StageId::SQR);
    cfg.validate(lib);
    const StageArithmetic unit(cfg, lib);
    Signal y{std::vector<std::int32_t>(x.size()), x.fs, 16};
    for (std::size_t n = 0; n < x.size(); ++n)
        y.samples[n] = saturate16(unit.mul(x.samples[n], x.samples[n]) >> sqr_shift);
    return y;
}

/// 32-sample moving window: each output sums its window through a chain of 31 adders.
inline Signal run_mwi(const Signal& x, const StageConfig& cfg, const ModuleLibrary& lib) {
    detail::require_stage(cfg, StageId::MWI);
    cfg.validate(lib);
    const StageArithmetic unit(cfg, lib);
    Signal y{std::vector<std::int32_t>(x.size()), x.fs, 16};
    for (std::size_t n = 0; n < x.size(); ++n) {
        std::uint32_t acc = detail::bits(x.samples[n]);
        for (std::size_t t = 1; t < mwi_window; ++t)
            acc = unit.add(acc, n >= t ? detail::bits(x.samples[n - t]) : 0u);
        y.samples[n] = saturate16(detail::as_signed(acc) >> mwi_shift);
    }
    return y;
}

// ---------------------------------------------------------------------------
// Peak decision

struct PeakParams {
    double refractory_s = 0.2;
    /// Maximum distance between an MWI peak and its HPF counterpart.
    double alignment_s = 0.15;
    /// Initial signal/noise levels are learned over this prefix.
    double learning_s = 2.0;
    /// Group delay of LPF + HPF, subtracted to report peaks in input coordinates.
    std::size_t preprocessing_delay = (lpf_taps - 1) / 2 + (hpf_taps - 1) / 2;
};

/// Adaptive-threshold QRS decision on the integrated signal, confirmed against
/// the band-passed signal. Returns R-peak indices in input-sample coordinates.
inline std::vector<std::size_t> detect_peaks(const Signal& hpf, const Signal& mwi, const PeakParams& p = {}) {
    if (hpf.size() != mwi.size()) throw ArgumentError("detect_peaks: HPF and MWI lengths differ");
    const std::size_t n = mwi.size();
    std::vector<std::size_t> peaks;
    if (n < 3) return peaks;

    const double fs = mwi.fs;
    const auto refractory = static_cast<std::size_t>(std::llround(p.refractory_s * fs));
    const auto align = static_cast<std::size_t>(std::llround(p.alignment_s * fs));
    const std::size_t half = std::max<std::size_t>(refractory / 2, 1);
    const auto& m = mwi.samples;
    const auto& h = hpf.samples;

    const std::size_t learn = std::min(n, static_cast<std::size_t>(std::llround(p.learning_s * fs)));
    double spk = 0.0, npk = 0.0;
    if (learn > 0) {
        spk = *std::max_element(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(learn)) / 3.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < learn; ++i) sum += m[i];
        npk = sum / static_cast<double>(learn) / 2.0;
    }
    double threshold = npk + 0.25 * (spk - npk);

    // HPF maximum strictly inside the alignment window, or nothing.
    auto aligned_hpf_peak = [&](std::size_t i) -> std::optional<std::size_t> {
        const std::size_t lo = i >= align ? i - align : 0;
        const std::size_t hi = std::min(n - 1, i + align);
        std::size_t best = lo;
        for (std::size_t j = lo + 1; j <= hi; ++j)
            if (h[j] > h[best]) best = j;
        if (h[best] <= 0 || best == lo || best == hi) return std::nullopt;
        return best;
    };

    std::optional<std::size_t> last;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (m[i] <= 0 || m[i] <= m[i - 1]) continue;
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        if (*std::max_element(m.begin() + static_cast<std::ptrdiff_t>(lo),
                              m.begin() + static_cast<std::ptrdiff_t>(hi) + 1) != m[i])
            continue;

        const double v = m[i];
        if (v > threshold) {
            if (const auto j = aligned_hpf_peak(i)) {
                const std::size_t r = *j >= p.preprocessing_delay ? *j - p.preprocessing_delay : 0;
                if (!last || r >= *last + refractory) {
                    peaks.push_back(r);
                    last = r;
                    spk = 0.125 * v + 0.875 * spk;
                }
            } else {
                npk = 0.125 * v + 0.875 * npk;
            }
        } else {
            npk = 0.125 * v + 0.875 * npk;
        }
        threshold = npk + 0.25 * (spk - npk);
    }
    return peaks;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineOutput {
    Signal lpf_out;
    Signal hpf_out;
    Signal diff_out;
    Signal sqr_out;
    Signal mwi_out;
    std::vector<std::size_t> detected_peaks;
};

inline void require_pipeline_input(const Signal& x) {
    if (x.adc_bits > 16) throw ArgumentError("pipeline input must be at most 16-bit");
    x.validate();
}

/// DIFF -> SQR -> MWI -> decision on an already band-passed signal.
inline PipelineOutput run_back_end(const Signal& lpf_out, const Signal& hpf_out, const Design& design,
                                   const ModuleLibrary& lib, const PeakParams& params = {}) {
    PipelineOutput out;
    out.lpf_out = lpf_out;
    out.hpf_out = hpf_out;
    out.diff_out = run_diff(hpf_out, design[StageId::DIFF], lib);
    out.sqr_out = run_sqr(out.diff_out, design[StageId::SQR], lib);
    out.mwi_out = run_mwi(out.sqr_out, design[StageId::MWI], lib);
    out.detected_peaks = detect_peaks(out.hpf_out, out.mwi_out, params);
    return out;
}

inline PipelineOutput run_pipeline(const Signal& x, const Design& design, const ModuleLibrary& lib,
                                   const PeakParams& params = {}) {
    require_pipeline_input(x);
    design.validate(lib);
    auto lpf = run_lpf(x, design[StageId::LPF], lib);
    auto hpf = run_hpf(lpf, design[StageId::HPF], lib);
    return run_back_end(lpf, hpf, design, lib, params);
}

} // namespace apxsig
