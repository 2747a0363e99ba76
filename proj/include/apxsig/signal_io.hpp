#pragma once

// ECG ingestion (WFDB format 212, single-column CSV) and a seeded synthetic
// ECG generator with exact R-peak ground truth.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apxsig/errors.hpp"

namespace apxsig {

struct Signal {
    std::vector<std::int32_t> samples;
    double fs = 200.0;
    unsigned adc_bits = 16;

    std::int32_t min_value() const noexcept { return -(std::int32_t{1} << (adc_bits - 1)); }
    std::int32_t max_value() const noexcept { return (std::int32_t{1} << (adc_bits - 1)) - 1; }
    std::size_t size() const noexcept { return samples.size(); }

    /// Throws when a sample falls outside the declared two's-complement range.
    void validate() const {
        if (!(fs > 0.0)) throw ArgumentError("signal sample rate must be positive");
        if (adc_bits < 2 || adc_bits > 31) throw ArgumentError("signal adc_bits must be in [2, 31]");
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (samples[i] < min_value() || samples[i] > max_value())
                throw ArgumentError("sample " + std::to_string(i) + " = " + std::to_string(samples[i]) +
                                    " does not fit in " + std::to_string(adc_bits) + " bits");
    }
};

/// Sorted sample indices of true R-peaks.
struct BeatTruth {
    std::vector<std::size_t> indices;
};

// ---------------------------------------------------------------------------
// WFDB

struct WfdbSignalSpec {
    std::string file;
    int format = 0;
    unsigned adc_resolution = 12;
};

struct WfdbHeader {
    std::string record_name;
    std::size_t n_signals = 0;
    double fs = 0.0;
    std::size_t n_samples = 0; // 0 when the header leaves it unspecified
    std::vector<WfdbSignalSpec> signals;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

// Leading numeric prefix of tokens such as "212x2" or "360/1(0)".
template <typename T>
bool leading_number(std::string_view tok, T& out) {
    const auto* first = tok.data();
    const auto res = std::from_chars(first, first + tok.size(), out);
    return res.ec == std::errc{} && res.ptr != first;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline WfdbHeader parse_wfdb_header(std::string_view text) {
    WfdbHeader h;
    bool have_record = false;
    std::size_t line_no = 0;
    for (auto raw : detail::split_lines(text)) {
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto tok = detail::split_ws(line);
        if (!have_record) {
            if (tok.size() < 3) throw ParseError("record line needs name, signal count and sample rate", line_no);
            h.record_name = tok[0];
            if (!detail::leading_number(tok[1], h.n_signals)) throw ParseError("bad signal count", line_no);
            if (!detail::leading_number(tok[2], h.fs) || !(h.fs > 0.0)) throw ParseError("bad sample rate", line_no);
            if (tok.size() >= 4 && !detail::leading_number(tok[3], h.n_samples))
                throw ParseError("bad sample count", line_no);
            have_record = true;
            continue;
        }
        if (h.signals.size() == h.n_signals) break;
        if (tok.size() < 2) throw ParseError("signal line needs file name and format", line_no);
        WfdbSignalSpec s;
        s.file = tok[0];
        if (!detail::leading_number(tok[1], s.format)) throw ParseError("bad format code", line_no);
        if (tok.size() >= 4 && !detail::leading_number(tok[3], s.adc_resolution))
            throw ParseError("bad ADC resolution", line_no);
        if (s.adc_resolution == 0) s.adc_resolution = 12;
        h.signals.push_back(std::move(s));
    }
    if (!have_record) throw ParseError("missing record line");
    if (h.signals.size() != h.n_signals)
        throw ParseError("header declares " + std::to_string(h.n_signals) + " signals but describes " +
                         std::to_string(h.signals.size()));
    return h;
}

inline std::int32_t sign_extend12(unsigned v) noexcept {
    return static_cast<std::int32_t>(v & 0x800u ? static_cast<int>(v) - 0x1000 : static_cast<int>(v));
}

/// Unpacks a format-212 byte stream into the interleaved 12-bit sample sequence.
inline std::vector<std::int32_t> decode_212(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 3 != 0)
        throw ParseError("format 212 stream length " + std::to_string(bytes.size()) + " is not a multiple of 3");
    std::vector<std::int32_t> out;
    out.reserve(bytes.size() / 3 * 2);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        const unsigned b0 = bytes[i], b1 = bytes[i + 1], b2 = bytes[i + 2];
        out.push_back(sign_extend12(b0 | ((b1 & 0x0Fu) << 8)));
        out.push_back(sign_extend12(b2 | ((b1 & 0xF0u) << 4)));
    }
    return out;
}

/// Packs 12-bit samples pairwise; an odd trailing sample is paired with zero.
inline std::vector<std::uint8_t> encode_212(std::span<const std::int32_t> samples) {
    std::vector<std::uint8_t> out;
    out.reserve((samples.size() + 1) / 2 * 3);
    for (std::size_t i = 0; i < samples.size(); i += 2) {
        const std::int32_t s0 = samples[i];
        const std::int32_t s1 = i + 1 < samples.size() ? samples[i + 1] : 0;
        for (auto s : {s0, s1})
            if (s < -2048 || s > 2047) throw ArgumentError("sample " + std::to_string(s) + " does not fit in 12 bits");
        const auto u0 = static_cast<unsigned>(s0) & 0xFFFu;
        const auto u1 = static_cast<unsigned>(s1) & 0xFFFu;
        out.push_back(static_cast<std::uint8_t>(u0 & 0xFFu));
        out.push_back(static_cast<std::uint8_t>(((u0 >> 8) & 0x0Fu) | ((u1 >> 4) & 0xF0u)));
        out.push_back(static_cast<std::uint8_t>(u1 & 0xFFu));
    }
    return out;
}

inline Signal read_wfdb212(std::string_view header_text, std::span<const std::uint8_t> data, std::size_t channel) {
    const auto h = parse_wfdb_header(header_text);
    if (channel >= h.n_signals)
        throw ArgumentError("channel " + std::to_string(channel) + " requested but header declares " +
                            std::to_string(h.n_signals) + " signals");
    for (const auto& s : h.signals)
        if (s.format != 212)
            throw UnsupportedFormatError("unsupported WFDB format " + std::to_string(s.format) + " (only 212)");

    const auto stream = decode_212(data);
    std::size_t frames = stream.size() / h.n_signals;
    if (h.n_samples) {
        if (frames < h.n_samples)
            throw ParseError("data holds " + std::to_string(frames) + " frames, header declares " +
                             std::to_string(h.n_samples));
        frames = h.n_samples;
    }
    Signal sig;
    sig.fs = h.fs;
    sig.adc_bits = h.signals[channel].adc_resolution;
    sig.samples.reserve(frames);
    for (std::size_t f = 0; f < frames; ++f) sig.samples.push_back(stream[f * h.n_signals + channel]);
    sig.validate();
    return sig;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    const auto s = read_text_file(path);
    return {s.begin(), s.end()};
}

/// Loads `<record>.hea` and the .dat file it names, resolved relative to the header.
inline Signal load_wfdb212(const std::string& header_path, std::size_t channel) {
    const auto text = read_text_file(header_path);
    const auto h = parse_wfdb_header(text);
    if (channel >= h.signals.size())
        throw ArgumentError("channel " + std::to_string(channel) + " out of range for '" + header_path + "'");
    const auto slash = header_path.find_last_of('/');
    const std::string dir = slash == std::string::npos ? "" : header_path.substr(0, slash + 1);
    const auto data = read_binary_file(dir + h.signals[channel].file);
    return read_wfdb212(text, data, channel);
}

/// Left-shifts samples to fill a 16-bit range.
inline Signal scale_to_16bit(Signal s) {
    if (s.adc_bits >= 16) return s;
    const unsigned shift = 16 - s.adc_bits;
    for (auto& v : s.samples) v = static_cast<std::int32_t>(static_cast<std::uint32_t>(v) << shift);
    s.adc_bits = 16;
    return s;
}

/// Linear-interpolation resampling onto a new rate; samples are rounded and
/// clamped to the signal's range.
inline Signal resample_linear(const Signal& s, double fs_out) {
    if (!(fs_out > 0.0)) throw ArgumentError("resample: target rate must be positive");
    if (fs_out == s.fs || s.samples.empty()) {
        Signal out = s;
        out.fs = fs_out;
        return out;
    }
    const double ratio = s.fs / fs_out;
    const auto n = static_cast<std::size_t>(std::floor(static_cast<double>(s.size() - 1) / ratio)) + 1;
    Signal out{std::vector<std::int32_t>(n), fs_out, s.adc_bits};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * ratio;
        const auto i0 = std::min(static_cast<std::size_t>(t), s.size() - 1);
        const auto i1 = std::min(i0 + 1, s.size() - 1);
        const double f = t - static_cast<double>(i0);
        const double v = (1.0 - f) * s.samples[i0] + f * s.samples[i1];
        out.samples[i] = static_cast<std::int32_t>(
            std::clamp<long long>(std::llround(v), s.min_value(), s.max_value()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

/// One integer sample per line, with an optional leading `fs=<Hz>` line.
/// Defaults are fs = 200 Hz and 16-bit samples.
inline Signal read_csv(std::string_view text) {
    Signal sig;
    std::size_t line_no = 0;
    bool first_content = true;
    for (auto raw : detail::split_lines(text)) {
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty()) continue;
        if (first_content && line.starts_with("fs=")) {
            first_content = false;
            const auto v = line.substr(3);
            double fs = 0.0;
            const auto res = std::from_chars(v.data(), v.data() + v.size(), fs);
            if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !(fs > 0.0))
                throw ParseError("bad sample rate '" + std::string(v) + "'", line_no);
            sig.fs = fs;
            continue;
        }
        first_content = false;
        long long value = 0;
        const auto res = std::from_chars(line.data(), line.data() + line.size(), value);
        if (res.ec != std::errc{} || res.ptr != line.data() + line.size())
            throw ParseError("not an integer sample: '" + std::string(line) + "'", line_no);
        if (value < sig.min_value() || value > sig.max_value())
            throw ParseError("sample " + std::to_string(value) + " exceeds 16-bit range", line_no);
        sig.samples.push_back(static_cast<std::int32_t>(value));
    }
    return sig;
}

inline std::string write_csv(const Signal& s) {
    std::string out = "fs=" + std::to_string(static_cast<long long>(s.fs)) + "\n";
    for (auto v : s.samples) out += std::to_string(v) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic ECG

struct SynthParams {
    double duration_s = 30.0;
    double heart_rate_bpm = 72.0;
    /// Peak of the uniform noise, as a fraction of the R-wave amplitude.
    double noise_amplitude = 0.0;
    std::uint64_t seed = 1;
    /// R-wave amplitude in ADC counts.
    double r_amplitude = 20000.0;
};

namespace detail {

struct Wave {
    double offset_s; // relative to the R peak
    double amplitude; // relative to the R wave
    double sigma_s;
};

// P, Q, R, S, T as Gaussian bumps; T moves closer at high rates.
inline std::array<Wave, 5> beat_morphology(double rr_s) {
    return {{{-0.18, 0.12, 0.025},
             {-0.035, -0.12, 0.010},
             {0.0, 1.0, 0.011},
             {0.035, -0.22, 0.012},
             {0.16 + 0.12 * rr_s, 0.30, 0.045}}};
}

} // namespace detail

inline std::pair<Signal, BeatTruth> synth_ecg(const SynthParams& p) {
    if (!(p.duration_s > 0.0)) throw ArgumentError("synthetic duration must be positive");
    if (!(p.heart_rate_bpm >= 30.0 && p.heart_rate_bpm <= 220.0))
        throw ArgumentError("heart rate must be within [30, 220] bpm");
    if (!(p.noise_amplitude >= 0.0 && p.noise_amplitude <= 1.0))
        throw ArgumentError("noise amplitude must be within [0, 1]");
    if (!(p.r_amplitude > 0.0 && p.r_amplitude <= 32767.0))
        throw ArgumentError("R amplitude must be within (0, 32767]");

    constexpr double fs = 200.0;
    const auto n = static_cast<std::size_t>(std::llround(p.duration_s * fs));
    const double rr = 60.0 / p.heart_rate_bpm;
    const auto waves = detail::beat_morphology(rr);

    BeatTruth truth;
    std::vector<double> acc(n, 0.0);
    for (std::size_t beat = 0;; ++beat) {
        const double t = (static_cast<double>(beat) + 0.5) * rr;
        if (t + 0.3 > p.duration_s) break;
        if (t < 0.2) continue;
        const auto r_idx = static_cast<std::size_t>(std::llround(t * fs));
        if (r_idx >= n) break;
        truth.indices.push_back(r_idx);
        for (const auto& w : waves) {
            const double centre = static_cast<double>(r_idx) + w.offset_s * fs;
            const double sigma = w.sigma_s * fs;
            const auto lo = static_cast<long long>(std::floor(centre - 6.0 * sigma));
            const auto hi = static_cast<long long>(std::ceil(centre + 6.0 * sigma));
            for (long long i = std::max(lo, 0LL); i <= hi && i < static_cast<long long>(n); ++i) {
                const double z = (static_cast<double>(i) - centre) / sigma;
                acc[static_cast<std::size_t>(i)] += w.amplitude * p.r_amplitude * std::exp(-0.5 * z * z);
            }
        }
    }

    Signal sig;
    sig.fs = fs;
    sig.adc_bits = 16;
    sig.samples.resize(n);
    std::mt19937_64 rng(p.seed);
    const double noise_peak = p.noise_amplitude * p.r_amplitude;
    for (std::size_t i = 0; i < n; ++i) {
        double v = acc[i];
        if (noise_peak > 0.0) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            v += (2.0 * u - 1.0) * noise_peak;
        }
        sig.samples[i] = static_cast<std::int32_t>(std::clamp<long long>(std::llround(v), -32768, 32767));
    }
    return {std::move(sig), std::move(truth)};
}

} // namespace apxsig
