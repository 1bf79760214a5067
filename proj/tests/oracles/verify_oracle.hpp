#pragma once

// Second brute-forcer for the verify harness. Directions are enumerated in
// the outer loop, xor-bias goes through a Walsh-Hadamard transform restricted
// to the dual of each subspace, and distances are computed from explicit point
// sets with exact rationals. Ties resolve to the smallest (subspace, shift, a).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "gf2lab/subspace.hpp"
#include "gf2lab/verify.hpp"

namespace oracle {

using gf2lab::BigInt;
using gf2lab::BoolFn;
using gf2lab::Rational;

struct Found {
    Rational value = -1;
    std::uint64_t idx = 0, shift = 0, a = 0;
    bool set = false;

    void offer(const Rational& v, std::uint64_t i, std::uint64_t s, std::uint64_t av) {
        if (!set || v > value || (v == value && std::tie(i, s, av) < std::tie(idx, shift, a))) {
            value = v, idx = i, shift = s, a = av, set = true;
        }
    }
};

struct Sub {
    std::vector<std::uint64_t> basis;
    std::vector<std::uint64_t> dual;  // one vector per free column, in column order
    std::vector<unsigned> free_cols;
    std::uint64_t pivots = 0;
};

inline std::vector<Sub> all_subspaces(std::size_t n, std::size_t k) {
    std::vector<Sub> out;
    gf2lab::SubspaceEnumerator en(static_cast<unsigned>(n), static_cast<unsigned>(k));
    en.for_each([&](std::uint64_t, const std::vector<std::uint64_t>& rows) {
        Sub s;
        s.basis = rows;
        std::vector<unsigned> piv_of_row;
        for (auto r : rows) {
            unsigned p = 0;
            while (!((r >> p) & 1)) ++p;
            piv_of_row.push_back(p);
            s.pivots |= std::uint64_t{1} << p;
        }
        for (unsigned c = 0; c < n; ++c) {
            if ((s.pivots >> c) & 1) continue;
            std::uint64_t w = std::uint64_t{1} << c;
            for (std::size_t i = 0; i < rows.size(); ++i)
                if ((rows[i] >> c) & 1) w |= std::uint64_t{1} << piv_of_row[i];
            s.dual.push_back(w);
            s.free_cols.push_back(c);
        }
        out.push_back(std::move(s));
    });
    return out;
}

/// max over (X, a) of |E_X (-1)^{f(x)+f(x+a)}| via Walsh spectra.
inline Found xor_bias_walsh(const BoolFn& f, std::size_t k, bool linear_only = false) {
    const std::size_t n = f.n, N = std::size_t{1} << n;
    const auto subs = all_subspaces(n, k);
    std::int64_t top = -1;
    Found at;
    std::vector<std::int64_t> G(N), H;
    for (std::uint64_t a = 1; a < N; ++a) {
        for (std::uint64_t x = 0; x < N; ++x) G[x] = ((f(x) ^ f(x ^ a)) & 1) ? -1 : 1;
        for (std::size_t h = 1; h < N; h <<= 1)
            for (std::size_t i = 0; i < N; i += 2 * h)
                for (std::size_t j = i; j < i + h; ++j) {
                    const auto u = G[j], v = G[j + h];
                    G[j] = u + v, G[j + h] = u - v;
                }
        for (std::size_t vi = 0; vi < subs.size(); ++vi) {
            const Sub& S = subs[vi];
            const std::size_t D = std::size_t{1} << S.dual.size();
            H.assign(D, 0);
            for (std::size_t j = 0; j < D; ++j) {
                std::uint64_t w = 0;
                for (std::size_t i = 0; i < S.dual.size(); ++i)
                    if ((j >> i) & 1) w ^= S.dual[i];
                H[j] = G[w];
            }
            for (std::size_t h = 1; h < D; h <<= 1)
                for (std::size_t i = 0; i < D; i += 2 * h)
                    for (std::size_t j = i; j < i + h; ++j) {
                        const auto u = H[j], v = H[j + h];
                        H[j] = u + v, H[j + h] = u - v;
                    }
            // Coset sum for shift s is H[t] / 2^{n-k} with t_i = <dual_i, s>.
            for (std::size_t t = 0; t < (linear_only ? 1 : D); ++t) {
                std::uint64_t s = 0;
                for (std::size_t i = 0; i < S.free_cols.size(); ++i)
                    if ((t >> i) & 1) s |= std::uint64_t{1} << S.free_cols[i];
                const std::int64_t sum = std::llabs(H[t]) / static_cast<std::int64_t>(D);
                if (sum > top || (sum == top && std::tie(vi, s, a) < std::tie(at.idx, at.shift, at.a))) {
                    top = sum;
                    at.idx = vi, at.shift = s, at.a = a;
                }
            }
        }
    }
    Found best;
    best.offer(gf2lab::dyadic(BigInt(top), static_cast<unsigned>(k)), at.idx, at.shift, at.a);
    return best;
}

/// Points of s + V listed from the basis.
inline std::vector<std::uint64_t> coset_points(const std::vector<std::uint64_t>& basis, std::uint64_t s) {
    std::vector<std::uint64_t> pts;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << basis.size()); ++mask) {
        std::uint64_t x = s;
        for (std::size_t i = 0; i < basis.size(); ++i)
            if ((mask >> i) & 1) x ^= basis[i];
        pts.push_back(x);
    }
    return pts;
}

/// The shifts in increasing order, each the coset element that is zero on pivots.
inline std::vector<std::uint64_t> shifts(const Sub& S, std::size_t n, bool linear_only) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s)
        if (!(s & S.pivots) && (!linear_only || s == 0)) out.push_back(s);
    return out;
}

/// Conditional distance |(A, B) - (U_m, B)| from an explicit joint list:
/// sum over b, a of |P(a, b) - P(b) / 2^m|, halved.
inline Rational conditional_distance(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& ab, std::size_t m) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, long> joint;
    std::map<std::uint32_t, long> pb;
    for (const auto& [a, b] : ab) ++joint[{a, b}], ++pb[b];
    const long M = 1L << m;
    long d = 0;  // over 2^m |ab|
    for (const auto& [b, cb] : pb)
        for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(M); ++a) {
            auto it = joint.find({a, b});
            d += std::labs((it == joint.end() ? 0 : it->second) * M - cb);
        }
    return Rational(d, 2 * M * static_cast<long>(ab.size()));
}

inline Found joint_by_points(const BoolFn& f, std::size_t k, bool linear_only = false) {
    const std::size_t n = f.n, N = std::size_t{1} << n;
    const auto subs = all_subspaces(n, k);
    Found best;
    for (std::uint64_t a = 1; a < N; ++a)
        for (std::size_t vi = 0; vi < subs.size(); ++vi)
            for (auto s : shifts(subs[vi], n, linear_only)) {
                std::vector<std::pair<std::uint32_t, std::uint32_t>> ab;
                for (auto x : coset_points(subs[vi].basis, s)) ab.emplace_back(f(x), f(x ^ a));
                best.offer(conditional_distance(ab, f.m), vi, s, a);
            }
    return best;
}

inline Found affine_by_points(const BoolFn& f, std::size_t k) {
    const auto subs = all_subspaces(f.n, k);
    Found best;
    for (std::size_t vi = 0; vi < subs.size(); ++vi)
        for (auto s : shifts(subs[vi], f.n, false)) {
            std::map<std::uint32_t, long> p;
            const auto pts = coset_points(subs[vi].basis, s);
            for (auto x : pts) ++p[f(x)];
            const long M = 1L << f.m, K = static_cast<long>(pts.size());
            long l1 = 0;
            for (std::uint32_t z = 0; z < static_cast<std::uint32_t>(M); ++z) l1 += std::labs(p[z] * M - K);
            const Rational d(l1, M * K);
            best.offer(d / 2, vi, s, 0);
        }
    return best;
}

/// First (subspace, shift, a) with no b whose conditional support is full.
inline std::optional<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> disperser_failure(const BoolFn& f,
                                                                                               std::size_t k) {
    const auto subs = all_subspaces(f.n, k);
    for (std::size_t vi = 0; vi < subs.size(); ++vi)
        for (auto s : shifts(subs[vi], f.n, false))
            for (std::uint64_t a = 1; a < (std::uint64_t{1} << f.n); ++a) {
                std::map<std::uint32_t, std::set<std::uint32_t>> supp;
                for (auto x : coset_points(subs[vi].basis, s)) supp[f(x ^ a)].insert(f(x));
                bool ok = false;
                for (const auto& [b, zs] : supp) ok = ok || zs.size() == (std::size_t{1} << f.m);
                if (!ok) return std::make_tuple(std::uint64_t{vi}, s, a);
            }
    return std::nullopt;
}

/// Largest nonempty subset bias by direct parity counting.
inline Rational max_subset_bias(const std::vector<std::uint32_t>& outcomes, std::size_t m) {
    Rational best = 0;
    for (std::uint32_t S = 1; S < (1u << m); ++S) {
        long sum = 0;
        for (auto o : outcomes) sum += (std::popcount(o & S) & 1) ? -1 : 1;
        best = std::max(best, Rational(std::labs(sum), static_cast<long>(outcomes.size())));
    }
    return best;
}

}  // namespace oracle
