#pragma once

// Test-side oracles and generators. Nothing here calls into the fast paths it
// is used to check.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "apxsig/apxsig.hpp"

namespace oracle {

// Cell-by-cell ripple carry over the full width, no native arithmetic.
inline std::pair<std::uint64_t, unsigned> ripple(const apxsig::FullAdderSpec& cell, unsigned width, unsigned k,
                                                 std::uint64_t x, std::uint64_t y, unsigned cin) {
    const auto exact = apxsig::tables::accurate_fa();
    std::uint64_t sum = 0;
    unsigned c = cin;
    for (unsigned i = 0; i < width; ++i) {
        const auto& spec = i < k ? cell : exact;
        const auto o = spec(static_cast<unsigned>((x >> i) & 1u), static_cast<unsigned>((y >> i) & 1u), c);
        sum |= std::uint64_t{o.sum} << i;
        c = o.cout;
    }
    return {sum, c};
}

// Straight transcription of the block recursion with every adder simulated
// cell by cell and no exact shortcut.
inline std::uint64_t mult(const apxsig::RecursiveMultConfig& cfg, std::uint64_t x, std::uint64_t y, unsigned n,
                          unsigned ox, unsigned oy) {
    if (n == 2) {
        if (ox + oy < cfg.k_approx) return cfg.elem_spec.table[(x << 2) | y];
        return x * y;
    }
    const unsigned h = n / 2;
    const std::uint64_t mask_h = (std::uint64_t{1} << h) - 1;
    const auto ll = mult(cfg, x & mask_h, y & mask_h, h, ox, oy);
    const auto lh = mult(cfg, x & mask_h, y >> h, h, ox, oy + h);
    const auto hl = mult(cfg, x >> h, y & mask_h, h, ox + h, oy);
    const auto hh = mult(cfg, x >> h, y >> h, h, ox + h, oy + h);
    const unsigned w = 2 * n;
    const unsigned kc = std::min(cfg.k_approx, w);
    const std::uint64_t m = w >= 64 ? ~0ULL : (std::uint64_t{1} << w) - 1;
    const auto a1 = ripple(cfg.internal_adder_spec, w, kc, (lh << h) & m, (hl << h) & m, 0).first;
    const auto a2 = ripple(cfg.internal_adder_spec, w, kc, ll, (hh << n) & m, 0).first;
    return ripple(cfg.internal_adder_spec, w, kc, a1, a2, 0).first;
}

inline std::uint64_t mult(const apxsig::RecursiveMultConfig& cfg, std::uint64_t x, std::uint64_t y) {
    return mult(cfg, x, y, cfg.width, 0, 0);
}

// Independent energy tally: count instances by walking the block tree.
struct Tally {
    double elem_approx = 0, elem_exact = 0, cell_approx = 0, cell_exact = 0;
};

inline void tally_mult(unsigned n, unsigned offset, unsigned k, Tally& t) {
    if (n == 2) {
        (offset < k ? t.elem_approx : t.elem_exact) += 1;
        return;
    }
    const unsigned h = n / 2;
    tally_mult(h, offset, k, t);
    tally_mult(h, offset + h, k, t);
    tally_mult(h, offset + h, k, t);
    tally_mult(h, offset + n, k, t);
    const unsigned w = 2 * n;
    const unsigned kc = std::min(k, w);
    t.cell_approx += 3.0 * kc;
    t.cell_exact += 3.0 * (w - kc);
}

// Plain-integer reference of the five stages, built from the same difference
// equations with native arithmetic.
inline std::vector<std::int32_t> fir(const std::vector<std::int32_t>& x, const std::vector<std::int32_t>& c) {
    std::vector<std::int32_t> y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        std::int64_t acc = 0;
        for (std::size_t t = 0; t < c.size(); ++t)
            if (n >= t) acc += static_cast<std::int64_t>(c[t]) * x[n - t];
        acc = static_cast<std::int32_t>(static_cast<std::uint32_t>(acc)); // 32-bit accumulator
        y[n] = static_cast<std::int32_t>(std::clamp<std::int64_t>(acc >> 15, -32768, 32767));
    }
    return y;
}

inline std::vector<std::int32_t> diff(const std::vector<std::int32_t>& x) {
    std::vector<std::int32_t> y(x.size());
    auto at = [&](std::size_t n, std::size_t d) -> std::int64_t { return n >= d ? x[n - d] : 0; };
    for (std::size_t n = 0; n < x.size(); ++n) {
        const std::int64_t v = 2 * at(n, 0) + at(n, 1) - at(n, 3) - 2 * at(n, 4);
        y[n] = static_cast<std::int32_t>(std::clamp<std::int64_t>(v >> 3, -32768, 32767));
    }
    return y;
}

inline std::vector<std::int32_t> sqr(const std::vector<std::int32_t>& x) {
    std::vector<std::int32_t> y(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        const std::int64_t v = x[n];
        y[n] = static_cast<std::int32_t>(std::clamp<std::int64_t>((v * v) >> 16, -32768, 32767));
    }
    return y;
}

inline std::vector<std::int32_t> mwi(const std::vector<std::int32_t>& x) {
    std::vector<std::int32_t> y(x.size());
    std::int64_t window = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        window += x[n];
        if (n >= 32) window -= x[n - 32];
        y[n] = static_cast<std::int32_t>(std::clamp<std::int64_t>(window >> 5, -32768, 32767));
    }
    return y;
}

// Brute-force Pareto membership.
inline std::vector<std::size_t> pareto(const std::vector<double>& q, const std::vector<double>& e) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < q.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < q.size() && !dominated; ++j)
            dominated = q[j] >= q[i] && e[j] <= e[i] && (q[j] > q[i] || e[j] < e[i]);
        if (!dominated) out.push_back(i);
    }
    return out;
}

} // namespace oracle

namespace gen {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::uint64_t bits(std::mt19937_64& r, unsigned width) {
    return width >= 64 ? r() : r() & ((std::uint64_t{1} << width) - 1);
}

inline unsigned below(std::mt19937_64& r, unsigned n) { return static_cast<unsigned>(r() % n); }

inline apxsig::FullAdderSpec random_fa(std::mt19937_64& r) {
    apxsig::FullAdderSpec s{"Random", {}};
    for (auto& e : s.table) e = static_cast<std::uint8_t>(r() & 3u);
    return s;
}

inline apxsig::Mult2x2Spec random_mult(std::mt19937_64& r) {
    apxsig::Mult2x2Spec s{"Random", {}};
    for (auto& e : s.table) e = static_cast<std::uint8_t>(r() & 15u);
    return s;
}

inline std::vector<std::int32_t> samples(std::mt19937_64& r, std::size_t n, std::int32_t lo, std::int32_t hi) {
    std::uniform_int_distribution<std::int32_t> d(lo, hi);
    std::vector<std::int32_t> v(n);
    for (auto& s : v) s = d(r);
    return v;
}

inline apxsig::Design random_design(std::mt19937_64& r, const apxsig::ModuleLibrary& lib) {
    apxsig::Design d;
    for (auto s : apxsig::all_stages) {
        auto& c = d[s];
        c.k_approx = below(r, apxsig::traits(s).max_k + 1);
        c.adder_spec = lib.adders()[below(r, static_cast<unsigned>(lib.adders().size()))].spec.name;
        c.mult_spec = lib.mults()[below(r, static_cast<unsigned>(lib.mults().size()))].spec.name;
    }
    return d;
}

} // namespace gen

inline apxsig::Signal make_signal(std::vector<std::int32_t> v, double fs = 200.0) {
    return apxsig::Signal{std::move(v), fs, 16};
}
