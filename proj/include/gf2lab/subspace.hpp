#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "common.hpp"
#include "matrix.hpp"
#include "rational.hpp"

namespace gf2lab {

/// Gaussian binomial [n choose k]_2.
inline BigInt gaussian_binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    BigInt num = 1, den = 1;
    for (unsigned i = 0; i < k; ++i) {
        num *= (BigInt(1) << (n - i)) - 1;
        den *= (BigInt(1) << (i + 1)) - 1;
    }
    return num / den;
}

/// Canonical enumeration of the k-dimensional subspaces of F2^n (n <= 64).
///
/// Each subspace is emitted as its reduced row echelon basis: row i has its
/// lowest set bit at pivot p_i, p_0 < ... < p_{k-1}, and every pivot column is
/// zero in the other rows. Order: pivot patterns in lexicographic order, then
/// the free entries read as a binary counter (row 0 lowest column = bit 0).
/// Index ranges map to contiguous slices of this order.
class SubspaceEnumerator {
public:
    SubspaceEnumerator(unsigned n, unsigned k) : n_(n), k_(k) {
        if (n > 64) throw std::invalid_argument("SubspaceEnumerator: n > 64");
        if (k > n) throw std::invalid_argument("SubspaceEnumerator: k > n");
        std::vector<unsigned> piv(k);
        for (unsigned i = 0; i < k; ++i) piv[i] = i;
        std::uint64_t acc = 0;
        for (;;) {
            Pattern p;
            p.pivots = piv;
            std::uint64_t pivot_mask = 0;
            for (auto c : piv) pivot_mask |= std::uint64_t{1} << c;
            for (unsigned i = 0; i < k; ++i)
                for (unsigned c = piv[i] + 1; c < n; ++c)
                    if (!((pivot_mask >> c) & 1)) p.free.push_back({i, c});
            if (p.free.size() >= 64) throw std::invalid_argument("SubspaceEnumerator: too many free entries");
            p.first = acc;
            acc += std::uint64_t{1} << p.free.size();
            patterns_.push_back(std::move(p));
            // Next combination in lexicographic order.
            int i = static_cast<int>(k) - 1;
            while (i >= 0 && piv[static_cast<unsigned>(i)] == n - k + static_cast<unsigned>(i)) --i;
            if (i < 0) break;
            ++piv[static_cast<unsigned>(i)];
            for (unsigned j = static_cast<unsigned>(i) + 1; j < k; ++j) piv[j] = piv[j - 1] + 1;
        }
        total_ = acc;
    }

    unsigned n() const noexcept { return n_; }
    unsigned k() const noexcept { return k_; }
    std::uint64_t count() const noexcept { return total_; }

    /// Calls fn(index, rows) for every subspace with index in [begin, end).
    /// `rows` holds k u64 basis vectors valid only during the call.
    template <class Fn>
    void for_each_range(std::uint64_t begin, std::uint64_t end, Fn&& fn) const {
        end = std::min(end, total_);
        if (begin >= end) return;
        std::vector<std::uint64_t> rows(k_);
        std::size_t pi = pattern_of(begin);
        std::uint64_t idx = begin;
        while (idx < end) {
            const Pattern& p = patterns_[pi];
            const std::uint64_t span = std::uint64_t{1} << p.free.size();
            std::uint64_t local = idx - p.first;
            const std::uint64_t stop = std::min<std::uint64_t>(span, end - p.first);
            for (; local < stop; ++local, ++idx) {
                for (unsigned i = 0; i < k_; ++i) rows[i] = std::uint64_t{1} << p.pivots[i];
                for (std::size_t f = 0; f < p.free.size(); ++f)
                    if ((local >> f) & 1) rows[p.free[f].row] |= std::uint64_t{1} << p.free[f].col;
                fn(idx, static_cast<const std::vector<std::uint64_t>&>(rows));
            }
            ++pi;
        }
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for_each_range(0, total_, std::forward<Fn>(fn));
    }

    std::vector<std::uint64_t> at(std::uint64_t index) const {
        std::vector<std::uint64_t> out;
        for_each_range(index, index + 1, [&](std::uint64_t, const std::vector<std::uint64_t>& r) { out = r; });
        return out;
    }

    GF2Matrix matrix_at(std::uint64_t index) const { return GF2Matrix::from_u64_rows(at(index), n_); }

private:
    struct Free {
        unsigned row, col;
    };
    struct Pattern {
        std::vector<unsigned> pivots;
        std::vector<Free> free;
        std::uint64_t first = 0;
    };

    std::size_t pattern_of(std::uint64_t idx) const {
        std::size_t lo = 0, hi = patterns_.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (patterns_[mid].first <= idx) lo = mid;
            else hi = mid;
        }
        return lo;
    }

    unsigned n_, k_;
    std::uint64_t total_ = 0;
    std::vector<Pattern> patterns_;
};

/// Streams every k-dim subspace of F2^n as a GF2Matrix basis in canonical order.
inline void enumerate_subspaces(unsigned n, unsigned k, const Budget& budget,
                                const std::function<void(const GF2Matrix&)>& fn) {
    const BigInt count = gaussian_binomial(n, k);
    budget.require(count > BigInt(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(count), "enumerate_subspaces");
    SubspaceEnumerator e(n, k);
    e.for_each([&](std::uint64_t, const std::vector<std::uint64_t>& rows) { fn(GF2Matrix::from_u64_rows(rows, n)); });
}

/// Pivot mask (lowest set bit of each row) of an echelon basis as produced above.
inline std::uint64_t pivot_mask(const std::vector<std::uint64_t>& rows) {
    std::uint64_t m = 0;
    for (auto r : rows) m |= r & (~r + 1);
    return m;
}

/// Canonical coset representatives of the subspace with the given echelon
/// basis: every vector supported off the pivot columns, in increasing order.
/// Calls fn(rep) for all 2^(n-k) of them.
template <class Fn>
void for_each_coset_rep(unsigned n, const std::vector<std::uint64_t>& rows, Fn&& fn) {
    const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    const std::uint64_t free_cols = full & ~pivot_mask(rows);
    // Enumerate submasks of free_cols in increasing numeric order.
    std::uint64_t s = 0;
    for (;;) {
        fn(s);
        if (s == free_cols) break;
        s = ((s | ~free_cols) + 1) & free_cols;
    }
}

/// All 2^k elements of the span of `rows`, in Gray-code order starting at 0.
inline std::vector<std::uint64_t> span_elements(const std::vector<std::uint64_t>& rows) {
    std::vector<std::uint64_t> out(std::size_t{1} << rows.size());
    std::uint64_t cur = 0;
    out[0] = 0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        cur ^= rows[static_cast<std::size_t>(std::countr_zero(i))];
        out[i] = cur;
    }
    return out;
}

}  // namespace gf2lab
