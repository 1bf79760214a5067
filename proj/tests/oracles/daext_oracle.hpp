#pragma once

// Straight-line re-implementation of the pipeline for conformance tests.
// Condensers are applied as explicit row matrices, IP uses schoolbook
// polynomial products reduced afterwards, snmExt goes through its matrix
// form, and the fold, advice, products and code step are re-coded here.

#include <vector>

#include "gf2lab/daext.hpp"

namespace oracle {

using gf2lab::BitVec;

inline std::uint64_t gf_mul_schoolbook(std::uint64_t a, std::uint64_t b, unsigned k, gf2lab::u128 modulus) {
    gf2lab::u128 prod = 0;
    for (unsigned i = 0; i < k; ++i)
        if ((b >> i) & 1) prod ^= static_cast<gf2lab::u128>(a) << i;
    for (int d = 2 * static_cast<int>(k) - 2; d >= static_cast<int>(k); --d)
        if ((prod >> d) & 1) prod ^= modulus << (d - static_cast<int>(k));
    return static_cast<std::uint64_t>(prod);
}

inline BitVec ip_schoolbook(const BitVec& x, const BitVec& y, std::size_t m) {
    const auto modulus = gf2lab::field_of_degree(static_cast<unsigned>(m)).modulus();
    std::uint64_t acc = 0;
    for (std::size_t b = 0; b + m <= x.size(); b += m)
        acc ^= gf_mul_schoolbook(x.slice(b, m).to_u64(), y.slice(b, m).to_u64(), static_cast<unsigned>(m), modulus);
    return BitVec::from_u64(acc, m);
}

inline std::vector<BitVec> apply_rows(const gf2lab::SomewhereCondenser& C, const BitVec& x) {
    std::vector<BitVec> out;
    for (const auto& M : C.row_maps) out.push_back(M.apply(x));
    return out;
}

/// Condenser matrices are built once per Pipeline and reused.
struct StraightLine {
    const gf2lab::Pipeline& P;
    gf2lab::SomewhereCondenser sc_c, xp_c, y_c;

    explicit StraightLine(const gf2lab::Pipeline& pipe)
        : P(pipe),
          sc_c(gf2lab::scond(pipe.expanders(), pipe.params().n, pipe.params().h1 + pipe.params().r)),
          xp_c(gf2lab::scond(pipe.expanders(), pipe.params().n, pipe.params().h3 + pipe.params().log_t())),
          y_c(gf2lab::scond(pipe.expanders(), pipe.params().block_bits(), pipe.params().h2)) {}

    gf2lab::TraceRecord run(const BitVec& x) const {
        const auto& p = P.params();
        const auto& E = P.extractor();
        gf2lab::TraceRecord T;
        T.sc = apply_rows(sc_c, x);
        T.xprime = apply_rows(xp_c, x);
        T.enc_x = BitVec(P.enc().n_code);
        for (std::size_t i = 0; i < p.n; ++i)
            if (x.get(i)) T.enc_x ^= P.enc().generator.row(i);
        T.z = BitVec(p.m1);
        const std::size_t bw = p.n / p.t;
        for (std::size_t i = 0; i < p.t; ++i) {
            gf2lab::BlockTrace b;
            b.x = x.slice(i * bw, bw);
            b.y = apply_rows(y_c, b.x);
            for (const auto& a : T.xprime)
                for (const auto& y : b.y) b.sr.push_back(ip_schoolbook(a, y, p.ip_bits));
            // Pairwise fold, odd row carried.
            std::vector<BitVec> level = b.sr;
            while (level.size() > 1) {
                std::vector<BitVec> next;
                for (std::size_t j = 0; j + 1 < level.size(); j += 2) {
                    const BitVec& l = level[j];
                    const BitVec& rr = level[j + 1];
                    next.push_back(l ^ E.extract(l, rr, l.size()) ^ E.extract(rr, l, l.size()));
                }
                if (level.size() % 2) next.push_back(level.back());
                level = next;
            }
            b.r = level[0];
            b.u = E.extract(x, b.r, p.m_prime);
            b.u1 = b.u.slice(0, p.k_blocks * p.index_bits);
            b.u2 = b.u.slice(b.u1.size(), p.m_prime - b.u1.size());
            b.h = BitVec(p.k_blocks);
            for (std::size_t j = 0; j < p.k_blocks; ++j) {
                std::size_t idx = 0;
                for (std::size_t q = 0; q < p.index_bits; ++q)
                    if (b.u1.get(j * p.index_bits + q)) idx |= std::size_t{1} << q;
                b.h.set(j, T.enc_x.get(j * p.enc_block + idx));
            }
            b.ut = BitVec(p.m_prime + p.k_blocks);
            for (std::size_t q = 0; q < p.m_prime; ++q) b.ut.set(q, b.u.get(q));
            for (std::size_t q = 0; q < p.k_blocks; ++q) b.ut.set(p.m_prime + q, b.h.get(q));
            b.yt = BitVec(p.cb.n2);
            const auto idx = gf2lab::snm_default_indices(p.n1);
            const auto M = gf2lab::snm_matrix(p.sc_bits(), b.ut, idx);
            for (std::size_t j = 0; j < T.sc.size(); ++j) {
                b.sn.push_back(M.apply(T.sc[j]));
                b.yt ^= gf2lab::ldacb(x, b.sn.back(), BitVec::from_u64(j, p.cb.a), p.cb, E);
            }
            b.w = E.extract(x, b.yt, p.n3[i]);
            b.v = BitVec(p.m1);
            for (std::size_t j = 0; j < p.m1; ++j) {
                bool all = true;
                for (std::size_t q = 0; q < p.c[i]; ++q) all = all && b.w.get(j * p.c[i] + q);
                b.v.set(j, all);
            }
            T.z ^= b.v;
            T.blocks.push_back(std::move(b));
        }
        const auto rows = p.out_bits();
        T.o = BitVec(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            bool acc = false;
            for (std::size_t j = 0; j < p.m1; ++j)
                if (P.G().generator.get(i, j) && T.z.get(j)) acc = !acc;
            T.o.set(i, acc);
        }
        return T;
    }
};

}  // namespace oracle
