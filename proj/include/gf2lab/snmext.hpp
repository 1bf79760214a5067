#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "affine.hpp"
#include "bitvec.hpp"
#include "common.hpp"
#include "field.hpp"
#include "parallel.hpp"
#include "rational.hpp"

namespace gf2lab {

// Seeded non-malleable extractor over GF(2^{n/2}) with the polynomial basis
// b_i = x^{i-1}. Field elements are k-bit integers, bit j = coefficient of x^j.

/// Joint degree of each output bit in (x, y): Y is affine in y, Y^3 quadratic.
inline constexpr unsigned kSnmJointDegree = 3;

/// Seed bits for source length n.
inline std::size_t snm_seed_bits(std::size_t n) {
    if (n < 4 || n % 2 != 0 || n > 128) throw std::invalid_argument("snmext: n must be even, 4 <= n <= 128");
    return n / 2 - 1;
}

/// The seed y (n/2 - 1 bits) names a nonzero field element. F* is enumerated
/// with the 2^{k-1} elements whose top coefficient is set first, in increasing
/// order, so seed i maps to i + 2^{k-1}: nonzero and affine in the seed bits.
inline std::uint64_t snm_seed_element(const BitVec& y, unsigned k) {
    if (y.size() + 1 != k) throw std::invalid_argument("snmext: seed width must be n/2 - 1");
    return y.to_u64() | (std::uint64_t{1} << (k - 1));
}

/// (b_i Y || b_i Y^3) as an n-bit vector, i 1-based.
inline BitVec snm_row(const GF2kField& F, std::uint64_t Y, std::size_t i) {
    const unsigned k = F.k();
    if (i < 1 || i > k) throw std::invalid_argument("snmext: index out of range");
    const std::uint64_t b = std::uint64_t{1} << (i - 1);
    return BitVec::from_u64(F.mul(b, Y), k).concat(BitVec::from_u64(F.mul(b, F.pow3(Y)), k));
}

/// Output bits Z_i for a given field element Y (no seed mapping).
inline BitVec snm_ext_element(const BitVec& x, std::uint64_t Y, const std::vector<std::size_t>& out_indices) {
    if (out_indices.empty()) throw std::invalid_argument("snmext: empty index list");
    const unsigned k = static_cast<unsigned>(x.size() / 2);
    snm_seed_bits(x.size());
    if (k > 64) throw std::invalid_argument("snmext: field above 2^64");
    const GF2kField& F = field_of_degree(k);
    if (Y == 0 || (Y & ~F.mask())) throw std::invalid_argument("snmext: Y must be a nonzero field element");
    BitVec out(out_indices.size());
    for (std::size_t j = 0; j < out_indices.size(); ++j)
        if (x.dot(snm_row(F, Y, out_indices[j]))) out.set(j, true);
    return out;
}

/// Default indices {1..m}.
inline std::vector<std::size_t> snm_default_indices(std::size_t m) {
    std::vector<std::size_t> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = i + 1;
    return v;
}

inline BitVec snm_ext(const BitVec& x, const BitVec& y, const std::vector<std::size_t>& out_indices) {
    if (x.size() % 2 != 0) throw std::invalid_argument("snmext: n must be even");
    if (y.size() != snm_seed_bits(x.size())) throw std::invalid_argument("snmext: seed width must be n/2 - 1");
    return snm_ext_element(x, snm_seed_element(y, static_cast<unsigned>(x.size() / 2)), out_indices);
}

/// The m x n matrix of snm_ext(., y).
inline GF2Matrix snm_matrix(std::size_t n, const BitVec& y, const std::vector<std::size_t>& out_indices) {
    if (y.size() != snm_seed_bits(n)) throw std::invalid_argument("snmext: seed width must be n/2 - 1");
    const unsigned k = static_cast<unsigned>(n / 2);
    const GF2kField& F = field_of_degree(k);
    const std::uint64_t Y = snm_seed_element(y, k);
    GF2Matrix M(0, n);
    for (auto i : out_indices) M.append_row(snm_row(F, Y, i));
    return M;
}

using SeedTamper = std::function<BitVec(const BitVec&)>;

inline SeedTamper xor_tamper(const BitVec& c) {
    return [c](const BitVec& y) { return y ^ c; };
}

struct NonMalleabilityReport {
    Rational distance;          // |(Z, Z', Y) - (U, Z', Y)|
    Rational strong_distance;   // |(Z, Y) - (U, Y)|, no tampering
    std::uint64_t seeds = 0;
    std::uint64_t work = 0;
};

namespace detail {

/// sum over z, z' of |c(z,z') 2^m - c(z')| for one seed over the given points.
/// Rows and points are u64 (n <= 64).
inline BigInt snm_seed_l1(const std::vector<std::uint64_t>& rows, const std::vector<std::uint64_t>& rows_t,
                          const std::vector<std::uint64_t>& points) {
    const std::size_t m = rows.size();
    auto eval = [](const std::vector<std::uint64_t>& rs, std::uint64_t x) {
        std::uint64_t z = 0;
        for (std::size_t j = 0; j < rs.size(); ++j) z |= static_cast<std::uint64_t>(parity64(rs[j] & x)) << j;
        return z;
    };
    std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> joint;  // z' -> z -> count
    std::map<std::uint64_t, std::uint64_t> marg;
    for (auto x : points) {
        const std::uint64_t zt = rows_t.empty() ? 0 : eval(rows_t, x);
        ++joint[zt][eval(rows, x)];
        ++marg[zt];
    }
    const BigInt scale = BigInt(1) << m;
    BigInt total = 0;
    for (const auto& [zt, row] : joint) {
        const BigInt c2(marg[zt]);
        for (const auto& [z, c] : row) total += abs(BigInt(c) * scale - c2);
        total += (scale - BigInt(row.size())) * c2;
    }
    return total;
}

}  // namespace detail

/// Exact distances for affine X and uniform Y over all 2^{n/2-1} seeds.
/// The tamper must be fixed-point free; this is checked by a full scan.
inline NonMalleabilityReport verify_nonmalleability(const AffineSource& X, const SeedTamper& tamper,
                                                    const std::vector<std::size_t>& out_indices,
                                                    const Budget& budget = {}, unsigned workers = 1) {
    const std::size_t n = X.n();
    const std::size_t d = snm_seed_bits(n);
    if (n > 64) throw std::invalid_argument("verify_nonmalleability: n above 64");
    if (out_indices.empty()) throw std::invalid_argument("verify_nonmalleability: empty index list");
    if (X.entropy() > 30 || d > 30) throw BudgetExceeded("verify_nonmalleability: enumeration too large");
    const std::uint64_t seeds = pow2(static_cast<unsigned>(d));
    NonMalleabilityReport rep;
    rep.seeds = seeds;
    rep.work = sat_mul(pow2(static_cast<unsigned>(X.entropy())), seeds);
    budget.require(rep.work, "verify_nonmalleability");

    std::vector<std::uint64_t> tampered(seeds);
    for (std::uint64_t s = 0; s < seeds; ++s) {
        const BitVec y = BitVec::from_u64(s, d);
        const BitVec t = tamper(y);
        if (t.size() != d) throw std::invalid_argument("verify_nonmalleability: tamper changes seed width");
        if (t == y) throw std::invalid_argument("verify_nonmalleability: tamper has a fixed point at " + y.to_text());
        tampered[s] = t.to_u64();
    }

    std::vector<std::uint64_t> points;
    X.for_each_point([&](const BitVec& x) { points.push_back(x.to_u64()); });
    auto rows_of = [&](std::uint64_t s) {
        const GF2Matrix M = snm_matrix(n, BitVec::from_u64(s, d), out_indices);
        std::vector<std::uint64_t> r;
        for (const auto& row : M.row_data()) r.push_back(row.to_u64());
        return r;
    };

    const unsigned chunks = chunk_count(seeds, workers);
    std::vector<BigInt> nm(chunks), st(chunks);
    parallel_for_ranges(seeds, workers, [&](std::uint64_t b, std::uint64_t e, unsigned c) {
        for (std::uint64_t s = b; s < e; ++s) {
            const auto r = rows_of(s), rt = rows_of(tampered[s]);
            nm[c] += detail::snm_seed_l1(r, rt, points);
            st[c] += detail::snm_seed_l1(r, {}, points);
        }
    });
    BigInt nm_total = 0, st_total = 0;
    for (unsigned c = 0; c < chunks; ++c) {
        nm_total += nm[c];
        st_total += st[c];
    }
    // Each per-seed sum is over 2^{H + m}; halve for the statistical distance and average over seeds.
    const BigInt denom = (BigInt(1) << (X.entropy() + out_indices.size() + 1)) * BigInt(seeds);
    rep.distance = Rational(nm_total, denom);
    rep.strong_distance = Rational(st_total, denom);
    return rep;
}

}  // namespace gf2lab
