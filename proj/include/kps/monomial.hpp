#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace kps {

/// Exponent vector with trailing zeros trimmed, so a monomial is independent
/// of later environment extensions.  Position i is the i-th symbol/variable
/// of whatever ring the polynomial lives in.
using Mono = std::vector<unsigned>;

inline void mono_trim(Mono& m) {
    while (!m.empty() && m.back() == 0) m.pop_back();
}

inline unsigned mono_get(const Mono& m, std::size_t i) { return i < m.size() ? m[i] : 0u; }

inline long mono_deg(const Mono& m) {
    long d = 0;
    for (unsigned e : m) d += e;
    return d;
}

inline Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r(std::max(a.size(), b.size()), 0u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = mono_get(a, i) + mono_get(b, i);
    return r;
}

inline bool mono_divides(const Mono& a, const Mono& b) { // a | b
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > mono_get(b, i)) return false;
    return true;
}

inline Mono mono_div(const Mono& b, const Mono& a) { // b / a, assumes a | b
    Mono r(b.size(), 0u);
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - mono_get(a, i);
    mono_trim(r);
    return r;
}

inline Mono mono_lcm(const Mono& a, const Mono& b) {
    Mono r(std::max(a.size(), b.size()), 0u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(mono_get(a, i), mono_get(b, i));
    mono_trim(r);
    return r;
}

inline bool mono_coprime(const Mono& a, const Mono& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] && b[i]) return false;
    return true;
}

/// Structural key comparison for canonical (order-independent) term storage.
struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const {
        std::size_t n = std::max(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i) {
            unsigned ea = mono_get(a, i), eb = mono_get(b, i);
            if (ea != eb) return ea < eb;
        }
        return false;
    }
};

/// Monomial order: graded reverse lexicographic, optionally preceded by a
/// block-elimination comparison (total degree in the eliminated block first).
/// Position 0 is the most significant variable.
class Order {
public:
    static Order grevlex() { return Order{}; }

    static Order block(std::vector<char> eliminate_mask) {
        Order o;
        o.block_ = true;
        o.mask_ = std::move(eliminate_mask);
        return o;
    }

    bool is_block() const { return block_; }
    const std::vector<char>& mask() const { return mask_; }

    /// +1 if a > b, -1 if a < b, 0 if equal.
    int cmp(const Mono& a, const Mono& b) const {
        if (block_) {
            int c = cmp_masked(a, b, true);
            if (c) return c;
            return cmp_masked(a, b, false);
        }
        return grevlex_cmp(a, b);
    }

private:
    static int grevlex_cmp(const Mono& a, const Mono& b) {
        long da = mono_deg(a), db = mono_deg(b);
        if (da != db) return da < db ? -1 : 1;
        std::size_t n = std::max(a.size(), b.size());
        for (std::size_t i = n; i-- > 0;) {
            unsigned ea = mono_get(a, i), eb = mono_get(b, i);
            if (ea != eb) return ea < eb ? 1 : -1; // smaller at the rightmost difference wins
        }
        return 0;
    }

    bool in_mask(std::size_t i, bool sel) const {
        bool m = i < mask_.size() && mask_[i];
        return m == sel;
    }

    int cmp_masked(const Mono& a, const Mono& b, bool sel) const {
        long da = 0, db = 0;
        std::size_t n = std::max(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i)
            if (in_mask(i, sel)) {
                da += mono_get(a, i);
                db += mono_get(b, i);
            }
        if (da != db) return da < db ? -1 : 1;
        for (std::size_t i = n; i-- > 0;)
            if (in_mask(i, sel)) {
                unsigned ea = mono_get(a, i), eb = mono_get(b, i);
                if (ea != eb) return ea < eb ? 1 : -1;
            }
        return 0;
    }

    bool block_ = false;
    std::vector<char> mask_;
};

} // namespace kps
