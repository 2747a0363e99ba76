#pragma once

// Bit-accurate behavioral models of elementary (approximate) full adders and
// 2x2 multipliers, and their composition into ripple-carry adders and
// recursively partitioned multipliers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>

#include "apxsig/errors.hpp"

namespace apxsig {

/// Output of one 1-bit full-adder cell.
struct FaOutput {
    unsigned sum;
    unsigned cout;
    friend bool operator==(const FaOutput&, const FaOutput&) = default;
};

/// Truth table of a 1-bit full adder. Entry `a<<2 | b<<1 | cin` packs
/// `sum` in bit 0 and `cout` in bit 1.
struct FullAdderSpec {
    std::string name;
    std::array<std::uint8_t, 8> table{};

    static constexpr unsigned index(unsigned a, unsigned b, unsigned cin) noexcept {
        return ((a & 1u) << 2) | ((b & 1u) << 1) | (cin & 1u);
    }

    FaOutput operator()(unsigned a, unsigned b, unsigned cin) const noexcept {
        const auto e = table[index(a, b, cin)];
        return {e & 1u, (e >> 1) & 1u};
    }

    /// True when every entry agrees with binary addition.
    bool is_exact() const noexcept {
        for (unsigned i = 0; i < 8; ++i) {
            const unsigned total = ((i >> 2) & 1u) + ((i >> 1) & 1u) + (i & 1u);
            if (table[i] != total) return false;
        }
        return true;
    }

    friend bool operator==(const FullAdderSpec&, const FullAdderSpec&) = default;
};

/// Truth table of an elementary 2x2 multiplier; entry `a<<2 | b` holds the 4-bit product.
struct Mult2x2Spec {
    std::string name;
    std::array<std::uint8_t, 16> table{};

    static constexpr unsigned index(unsigned a, unsigned b) noexcept {
        return ((a & 3u) << 2) | (b & 3u);
    }

    unsigned operator()(unsigned a, unsigned b) const noexcept { return table[index(a, b)]; }

    bool is_exact() const noexcept {
        for (unsigned i = 0; i < 16; ++i)
            if (table[i] != (i >> 2) * (i & 3u)) return false;
        return true;
    }

    bool preserves_zero() const noexcept {
        for (unsigned v = 0; v < 4; ++v)
            if (table[index(0, v)] != 0 || table[index(v, 0)] != 0) return false;
        return true;
    }

    friend bool operator==(const Mult2x2Spec&, const Mult2x2Spec&) = default;
};

/// Built-in elementary tables. ApproxAdd1..5 follow the approximate mirror
/// adder family; AppMultV1 is the single-error (3x3 -> 7) multiplier.
namespace tables {

inline FullAdderSpec make_fa(std::string name, const std::array<std::pair<int, int>, 8>& rows) {
    FullAdderSpec s{std::move(name), {}};
    for (std::size_t i = 0; i < 8; ++i)
        s.table[i] = static_cast<std::uint8_t>((rows[i].first & 1) | ((rows[i].second & 1) << 1));
    return s;
}

// rows are (sum, cout) for abc = 000, 001, 010, 011, 100, 101, 110, 111
inline FullAdderSpec accurate_fa() {
    return make_fa("Accurate", {{{0, 0}, {1, 0}, {1, 0}, {0, 1}, {1, 0}, {0, 1}, {0, 1}, {1, 1}}});
}
inline FullAdderSpec approx_add1() {
    return make_fa("ApproxAdd1", {{{0, 0}, {1, 0}, {0, 1}, {0, 1}, {0, 0}, {0, 1}, {0, 1}, {1, 1}}});
}
inline FullAdderSpec approx_add2() {
    return make_fa("ApproxAdd2", {{{1, 0}, {1, 0}, {1, 0}, {0, 1}, {1, 0}, {0, 1}, {0, 1}, {0, 1}}});
}
inline FullAdderSpec approx_add3() {
    return make_fa("ApproxAdd3", {{{1, 0}, {1, 0}, {0, 1}, {0, 1}, {1, 0}, {0, 1}, {0, 1}, {0, 1}}});
}
inline FullAdderSpec approx_add4() {
    return make_fa("ApproxAdd4", {{{0, 0}, {1, 0}, {1, 0}, {1, 0}, {0, 1}, {0, 1}, {0, 1}, {1, 1}}});
}
// sum = b, cout = a: pure wiring
inline FullAdderSpec approx_add5() {
    return make_fa("ApproxAdd5", {{{0, 0}, {0, 0}, {1, 0}, {1, 0}, {0, 1}, {0, 1}, {1, 1}, {1, 1}}});
}

inline Mult2x2Spec accurate_mult() {
    Mult2x2Spec s{"Accurate", {}};
    for (unsigned i = 0; i < 16; ++i) s.table[i] = static_cast<std::uint8_t>((i >> 2) * (i & 3u));
    return s;
}
inline Mult2x2Spec app_mult_v1() {
    auto s = accurate_mult();
    s.name = "AppMultV1";
    s.table[Mult2x2Spec::index(3, 3)] = 7;
    return s;
}
// V1 plus a dropped product LSB whenever one operand is 1 and the other 3
inline Mult2x2Spec app_mult_v2() {
    auto s = app_mult_v1();
    s.name = "AppMultV2";
    s.table[Mult2x2Spec::index(1, 3)] = 2;
    s.table[Mult2x2Spec::index(3, 1)] = 2;
    return s;
}

} // namespace tables

inline FaOutput eval_full_adder(const FullAdderSpec& spec, unsigned a, unsigned b, unsigned cin) noexcept {
    return spec(a, b, cin);
}

inline unsigned eval_mult2x2(const Mult2x2Spec& spec, unsigned a, unsigned b) noexcept {
    return spec(a, b);
}

inline constexpr unsigned max_adder_width = 63;

struct CompositeAdderConfig {
    unsigned width = 32;
    unsigned k_approx = 0;
    FullAdderSpec cell_spec = tables::accurate_fa();

    void validate() const {
        if (width == 0 || width > max_adder_width)
            throw ArgumentError("adder width must be in [1, 63], got " + std::to_string(width));
        if (k_approx > width)
            throw ArgumentError("adder k_approx " + std::to_string(k_approx) + " exceeds width " +
                                std::to_string(width));
    }
};

struct AdderResult {
    std::uint64_t sum;
    unsigned cout;
    friend bool operator==(const AdderResult&, const AdderResult&) = default;
};

namespace detail {

constexpr std::uint64_t low_mask(unsigned bits) noexcept {
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Cells [0, k) come from `table`; cells [k, width) are exact, so the upper
// segment collapses to one native addition fed by the approximate carry.
inline AdderResult ripple_add(const std::array<std::uint8_t, 8>& table, unsigned width, unsigned k,
                              std::uint64_t x, std::uint64_t y, unsigned cin) noexcept {
    std::uint64_t sum = 0;
    unsigned carry = cin & 1u;
    for (unsigned i = 0; i < k; ++i) {
        const unsigned idx = static_cast<unsigned>(((x >> i) & 1u) << 2 | ((y >> i) & 1u) << 1) | carry;
        const unsigned e = table[idx];
        sum |= std::uint64_t{e & 1u} << i;
        carry = e >> 1;
    }
    if (k < width) {
        const unsigned upper = width - k;
        const std::uint64_t m = low_mask(upper);
        const std::uint64_t hi = ((x >> k) & m) + ((y >> k) & m) + carry;
        sum |= (hi & m) << k;
        carry = static_cast<unsigned>((hi >> upper) & 1u);
    }
    return {sum, carry};
}

} // namespace detail

/// W-bit ripple-carry adder whose `k_approx` least significant cells use `cell_spec`.
inline AdderResult eval_composite_adder(const CompositeAdderConfig& cfg, std::uint64_t x, std::uint64_t y,
                                        unsigned cin = 0) {
    cfg.validate();
    const auto m = detail::low_mask(cfg.width);
    return detail::ripple_add(cfg.cell_spec.table, cfg.width, cfg.k_approx, x & m, y & m, cin);
}

struct RecursiveMultConfig {
    unsigned width = 16;
    unsigned k_approx = 0;
    Mult2x2Spec elem_spec = tables::accurate_mult();
    FullAdderSpec internal_adder_spec = tables::accurate_fa();

    void validate() const {
        if (width < 2 || width > 16 || (width & (width - 1)) != 0)
            throw ArgumentError("multiplier width must be a power of two in [2, 16], got " +
                                std::to_string(width));
        if (k_approx > 2 * width)
            throw ArgumentError("multiplier k_approx " + std::to_string(k_approx) + " exceeds 2*width");
    }
};

/// Precomputed evaluator for a recursive multiplier configuration.
///
/// An N x N block splits both operands into halves and forms
///   a1 = (xl*yh << N/2) + (xh*yl << N/2)
///   a2 = xl*yl + (xh*yh << N)
///   p  = a1 + a2
/// with three 2N-bit ripple-carry adders. The elementary 2x2 module at operand
/// bit offsets (i, j) is approximate iff i + j < k; every block adder
/// approximates its min(k, 2N) least significant cells.
class RecursiveMultiplier {
public:
    explicit RecursiveMultiplier(RecursiveMultConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        adder_exact_ = cfg_.internal_adder_spec.is_exact();
        elem_exact_ = cfg_.elem_spec.is_exact();
    }

    const RecursiveMultConfig& config() const noexcept { return cfg_; }

    std::uint64_t operator()(std::uint64_t x, std::uint64_t y) const noexcept {
        const auto m = detail::low_mask(cfg_.width);
        return block(x & m, y & m, cfg_.width, 0, 0);
    }

    /// Sign-magnitude wrapper: magnitudes (at most 2^(W-1)) run through the
    /// unsigned core and the sign is applied afterwards.
    std::int64_t signed_product(std::int64_t x, std::int64_t y) const {
        const std::int64_t lo = -(std::int64_t{1} << (cfg_.width - 1));
        const std::int64_t hi = (std::int64_t{1} << (cfg_.width - 1)) - 1;
        if (x < lo || x > hi || y < lo || y > hi)
            throw ArgumentError("signed operand out of range for " + std::to_string(cfg_.width) + "-bit multiplier");
        auto magnitude = [](std::int64_t v) -> std::uint64_t { return static_cast<std::uint64_t>(v < 0 ? -v : v); };
        const auto p = static_cast<std::int64_t>((*this)(magnitude(x), magnitude(y)));
        return ((x < 0) != (y < 0)) ? -p : p;
    }

private:
    std::uint64_t block(std::uint64_t x, std::uint64_t y, unsigned n, unsigned ox, unsigned oy) const noexcept {
        const unsigned k = cfg_.k_approx;
        if (n == 2)
            return (ox + oy < k) ? cfg_.elem_spec(static_cast<unsigned>(x), static_cast<unsigned>(y)) : x * y;
        if (k == 0 || (adder_exact_ && (elem_exact_ || ox + oy >= k))) return x * y;

        const unsigned h = n / 2;
        const std::uint64_t hm = detail::low_mask(h);
        const std::uint64_t xl = x & hm, xh = x >> h, yl = y & hm, yh = y >> h;
        const std::uint64_t ll = block(xl, yl, h, ox, oy);
        const std::uint64_t lh = block(xl, yh, h, ox, oy + h);
        const std::uint64_t hl = block(xh, yl, h, ox + h, oy);
        const std::uint64_t hh = block(xh, yh, h, ox + h, oy + h);

        const unsigned w = 2 * n;
        const unsigned kc = std::min(k, w);
        const auto& t = cfg_.internal_adder_spec.table;
        const std::uint64_t m = detail::low_mask(w);
        const auto a1 = detail::ripple_add(t, w, kc, (lh << h) & m, (hl << h) & m, 0).sum;
        const auto a2 = detail::ripple_add(t, w, kc, ll, (hh << n) & m, 0).sum;
        return detail::ripple_add(t, w, kc, a1, a2, 0).sum;
    }

    RecursiveMultConfig cfg_;
    bool adder_exact_ = true;
    bool elem_exact_ = true;
};

inline std::uint64_t eval_recursive_mult(const RecursiveMultConfig& cfg, std::uint64_t x, std::uint64_t y) {
    return RecursiveMultiplier(cfg)(x, y);
}

inline std::int64_t eval_signed_mult(const RecursiveMultConfig& cfg, std::int64_t x, std::int64_t y) {
    return RecursiveMultiplier(cfg).signed_product(x, y);
}

/// Exhaustive comparison of an elementary module against exact arithmetic.
struct ErrorStats {
    std::size_t cases = 0;
    std::size_t wrong = 0;
    unsigned max_abs_error = 0;

    double error_rate() const noexcept { return cases ? static_cast<double>(wrong) / static_cast<double>(cases) : 0.0; }
};

inline ErrorStats characterize(const FullAdderSpec& spec) {
    ErrorStats st;
    for (unsigned i = 0; i < 8; ++i) {
        const unsigned a = (i >> 2) & 1u, b = (i >> 1) & 1u, c = i & 1u;
        const auto out = spec(a, b, c);
        const int got = static_cast<int>(out.sum + 2 * out.cout);
        const int want = static_cast<int>(a + b + c);
        ++st.cases;
        if (got != want) ++st.wrong;
        st.max_abs_error = std::max(st.max_abs_error, static_cast<unsigned>(std::abs(got - want)));
    }
    return st;
}

inline ErrorStats characterize(const Mult2x2Spec& spec) {
    ErrorStats st;
    for (unsigned a = 0; a < 4; ++a) {
        for (unsigned b = 0; b < 4; ++b) {
            const int got = static_cast<int>(spec(a, b));
            const int want = static_cast<int>(a * b);
            ++st.cases;
            if (got != want) ++st.wrong;
            st.max_abs_error = std::max(st.max_abs_error, static_cast<unsigned>(std::abs(got - want)));
        }
    }
    return st;
}

} // namespace apxsig
