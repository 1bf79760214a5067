#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "affine.hpp"
#include "dimexp.hpp"
#include "dist.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "subspace.hpp"

namespace gf2lab {

enum class CondKind { basic_affine, iterated_affine, basic_general, iterated_general };

inline std::string to_string(CondKind k) {
    switch (k) {
        case CondKind::basic_affine: return "basic_affine";
        case CondKind::iterated_affine: return "iterated_affine";
        case CondKind::basic_general: return "basic_general";
        default: return "iterated_general";
    }
}

inline CondKind parse_cond_kind(const std::string& s) {
    if (s == "basic_affine") return CondKind::basic_affine;
    if (s == "iterated_affine") return CondKind::iterated_affine;
    if (s == "basic_general") return CondKind::basic_general;
    if (s == "iterated_general") return CondKind::iterated_general;
    throw std::invalid_argument("unknown condenser kind " + s);
}

inline bool is_general(CondKind k) { return k == CondKind::basic_general || k == CondKind::iterated_general; }

/// Expanders indexed by the half-width they act on.
using ExpanderFamily = std::map<std::size_t, DimExpander>;

struct SomewhereCondenser {
    std::size_t n_in = 0;
    std::size_t m_out = 0;
    std::vector<GF2Matrix> row_maps;  // each m_out x n_in
    CondKind kind = CondKind::basic_affine;
    std::size_t h = 1;
    std::vector<std::string> provenance;  // one entry per expander used, per level

    std::size_t rows() const { return row_maps.size(); }

    std::vector<BitVec> apply(const BitVec& x) const {
        std::vector<BitVec> out;
        out.reserve(row_maps.size());
        for (const auto& m : row_maps) out.push_back(m.apply(x));
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = to_string(kind);
        j["n_in"] = n_in;
        j["m_out"] = m_out;
        j["rows"] = row_maps.size();
        j["h"] = h;
        j["provenance"] = provenance;
        auto& maps = j["row_maps"] = nlohmann::json::array();
        for (const auto& m : row_maps) maps.push_back(m.to_text());
        return j;
    }

    static SomewhereCondenser from_json(const nlohmann::json& j) {
        SomewhereCondenser c;
        c.kind = parse_cond_kind(j.at("kind").get<std::string>());
        c.n_in = j.at("n_in").get<std::size_t>();
        c.m_out = j.at("m_out").get<std::size_t>();
        c.h = j.at("h").get<std::size_t>();
        c.provenance = j.at("provenance").get<std::vector<std::string>>();
        for (const auto& t : j.at("row_maps")) {
            c.row_maps.push_back(GF2Matrix::from_text(t.get<std::string>()));
            if (c.row_maps.back().rows() != c.m_out || c.row_maps.back().cols() != c.n_in)
                throw std::invalid_argument("SomewhereCondenser::from_json: row map shape mismatch");
        }
        if (c.row_maps.size() != j.at("rows").get<std::size_t>())
            throw std::invalid_argument("SomewhereCondenser::from_json: row count mismatch");
        return c;
    }
};

namespace detail {

inline std::string expander_tag(const DimExpander& e) {
    return "expander n=" + std::to_string(e.n) + " d=" + std::to_string(e.d()) + " alpha=" + to_string(e.alpha) +
           " certificate=" + e.certificate.to_string();
}

/// Row maps of one basic step on width w, in output order.
inline std::vector<GF2Matrix> basic_step_maps(const DimExpander& e, std::size_t w, bool general) {
    if (w % 2 != 0) throw std::invalid_argument("basic condenser: odd input length");
    const std::size_t half = w / 2;
    if (e.n != half) throw std::invalid_argument("basic condenser: expander dimension must equal n/2");
    const GF2Matrix I = GF2Matrix::identity(half);
    auto block = [&](const GF2Matrix& left, const GF2Matrix& right) {
        GF2Matrix m(half, w);
        for (std::size_t r = 0; r < half; ++r) m.row(r) = left.row(r).concat(right.row(r));
        return m;
    };
    const GF2Matrix Z = GF2Matrix::zero(half, half);
    std::vector<GF2Matrix> out{block(I, Z), block(Z, I)};
    for (const auto& T : e.maps) {
        out.push_back(block(I, T));  // x1 + T(x2)
        out.push_back(block(T, I));  // x2 + T(x1)
    }
    if (general) out.push_back(block(I, I));
    return out;
}

}  // namespace detail

/// Rows z1 = x1, z2 = x2, z_{2i+1} = x1 + T_i x2, z_{2i+2} = x2 + T_i x1
/// (interleaved per i), where x1 is the first n/2 bits.
inline SomewhereCondenser basic_cond(const DimExpander& e, std::size_t n) {
    SomewhereCondenser c;
    c.n_in = n;
    c.m_out = n / 2;
    c.row_maps = detail::basic_step_maps(e, n, false);
    c.kind = CondKind::basic_affine;
    c.h = 1;
    c.provenance = {detail::expander_tag(e)};
    return c;
}

/// Basic general condenser: the affine rows plus x1 + x2 last.
inline SomewhereCondenser basic_gcond(const DimExpander& e, std::size_t n) {
    auto c = basic_cond(e, n);
    c.row_maps = detail::basic_step_maps(e, n, true);
    c.kind = CondKind::basic_general;
    return c;
}

namespace detail {

inline SomewhereCondenser iterate(const ExpanderFamily& fam, std::size_t n, std::size_t h, bool general) {
    if (h >= 64 || n % (std::size_t{1} << h) != 0)
        throw std::invalid_argument("iterated condenser: n is not divisible by 2^h");
    SomewhereCondenser c;
    c.n_in = n;
    c.h = h;
    c.kind = general ? CondKind::iterated_general : CondKind::iterated_affine;
    std::vector<GF2Matrix> rows{GF2Matrix::identity(n)};
    std::size_t w = n;
    for (std::size_t step = 0; step < h; ++step) {
        auto it = fam.find(w / 2);
        if (it == fam.end())
            throw std::invalid_argument("iterated condenser: no expander for dimension " + std::to_string(w / 2));
        const auto step_maps = basic_step_maps(it->second, w, general);
        std::vector<GF2Matrix> next;
        next.reserve(rows.size() * step_maps.size());
        for (const auto& R : rows)
            for (const auto& B : step_maps) next.push_back(B * R);
        rows = std::move(next);
        c.provenance.push_back("step " + std::to_string(step + 1) + ": " + expander_tag(it->second));
        w /= 2;
    }
    c.m_out = w;
    c.row_maps = std::move(rows);
    return c;
}

}  // namespace detail

/// h rounds of basic_cond applied to every row, children of a row kept
/// contiguous (depth-first order). h = 0 is the identity condenser.
inline SomewhereCondenser scond(const ExpanderFamily& fam, std::size_t n, std::size_t h) {
    return detail::iterate(fam, n, h, false);
}

inline SomewhereCondenser sgcond(const ExpanderFamily& fam, std::size_t n, std::size_t h) {
    return detail::iterate(fam, n, h, true);
}

// Function forms, evaluated recursively on bit strings.

inline std::vector<BitVec> basic_cond_eval(const DimExpander& e, const BitVec& x, bool general = false) {
    if (x.size() % 2 != 0) throw std::invalid_argument("basic_cond_eval: odd input length");
    const std::size_t half = x.size() / 2;
    if (e.n != half) throw std::invalid_argument("basic_cond_eval: expander dimension must equal n/2");
    const BitVec x1 = x.prefix(half), x2 = x.slice(half, half);
    std::vector<BitVec> z{x1, x2};
    for (const auto& T : e.maps) {
        z.push_back(x1 ^ T.apply(x2));
        z.push_back(x2 ^ T.apply(x1));
    }
    if (general) z.push_back(x1 ^ x2);
    return z;
}

inline std::vector<BitVec> scond_eval(const ExpanderFamily& fam, const BitVec& x, std::size_t h, bool general = false) {
    if (h == 0) return {x};
    const auto& e = fam.at(x.size() / 2);
    std::vector<BitVec> out;
    for (const auto& row : basic_cond_eval(e, x, general)) {
        auto sub = scond_eval(fam, row, h - 1, general);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

/// Output rate promised by the condensing lemma for input rate delta:
/// (1 + alpha/(4d)) * delta.
inline Rational lemma_rate(const Rational& alpha, std::size_t d, const Rational& delta) {
    return (1 + alpha / (4 * static_cast<long>(d))) * delta;
}

/// Smallest h for which iterating the per-step gain (1 + alpha/(4d)) from
/// delta reaches target; the gain is only claimed while the rate is at most
/// 1/2, so the iteration stops gaining beyond that point.
inline std::size_t choose_steps(const Rational& delta, const Rational& target, const Rational& alpha, std::size_t d,
                                std::size_t max_h = 32) {
    if (alpha <= 0) throw std::invalid_argument("choose_steps: certified alpha must be positive");
    Rational r = delta;
    for (std::size_t h = 0; h <= max_h; ++h) {
        if (r >= target) return h;
        if (r > Rational(1, 2)) break;
        r = lemma_rate(alpha, d, r);
    }
    throw std::invalid_argument("choose_steps: target rate unreachable");
}

struct AffineCondenserReport {
    std::string mode;  // "exhaustive" or "sampled"
    std::size_t k = 0;
    std::size_t m_out = 0;
    std::size_t rows = 0;
    Rational gamma_target;
    std::size_t threshold = 0;  // ceil(gamma_target * m_out)
    std::size_t min_best_rank = 0;
    std::uint64_t subspaces = 0;
    std::uint64_t failures = 0;
    bool pass = false;
    GF2Matrix witness;  // a subspace achieving min_best_rank (first in order)
    std::uint64_t witness_index = 0;

    nlohmann::json to_json() const {
        return {{"property", "affine_condenser"},
                {"mode", mode},
                {"k", k},
                {"m_out", m_out},
                {"rows", rows},
                {"gamma_target", to_string(gamma_target)},
                {"threshold", threshold},
                {"min_best_rank", min_best_rank},
                {"subspaces", subspaces},
                {"failures", failures},
                {"pass", pass},
                {"witness_index", witness_index},
                {"witness", witness.to_text()}};
    }
};

inline std::size_t ceil_rational(const Rational& r) {
    const BigInt n = boost::multiprecision::numerator(r), d = boost::multiprecision::denominator(r);
    BigInt q = n / d;
    if (q * d < n) ++q;
    return static_cast<std::size_t>(q);
}

namespace detail {

struct CondScan {
    std::size_t min_best = SIZE_MAX;
    std::uint64_t min_idx = 0;
    std::uint64_t failures = 0;
};

inline std::size_t best_row_rank(const std::vector<SmallLinearMap>& maps, const std::vector<std::uint64_t>& basis,
                                 std::size_t cap) {
    std::size_t best = 0;
    std::vector<std::uint64_t> img(basis.size());
    for (const auto& M : maps) {
        for (std::size_t i = 0; i < basis.size(); ++i) img[i] = M(basis[i]);
        best = std::max(best, GF2Matrix::rank_u64(img));
        if (best >= cap) break;
    }
    return best;
}

}  // namespace detail

/// For every k-dim linear X, the best row rank max_j rank(R_j basis(X)).
/// Affine shifts do not change ranks, so linear subspaces suffice.
inline AffineCondenserReport verify_affine_condenser(const SomewhereCondenser& C, std::size_t k,
                                                     const Rational& gamma_target, const Budget& budget = {},
                                                     unsigned workers = 1) {
    if (C.n_in > 64 || C.m_out > 64) throw std::invalid_argument("verify_affine_condenser: widths above 64");
    SubspaceEnumerator e(static_cast<unsigned>(C.n_in), static_cast<unsigned>(k));
    budget.require(sat_mul(e.count(), C.rows()), "verify_affine_condenser");
    std::vector<SmallLinearMap> maps(C.row_maps.begin(), C.row_maps.end());
    AffineCondenserReport rep;
    rep.mode = "exhaustive";
    rep.k = k;
    rep.m_out = C.m_out;
    rep.rows = C.rows();
    rep.gamma_target = gamma_target;
    rep.threshold = ceil_rational(gamma_target * static_cast<long>(C.m_out));
    const std::size_t cap = std::min(C.m_out, k);
    std::vector<detail::CondScan> parts(chunk_count(e.count(), workers));
    parallel_for_ranges(e.count(), workers, [&](std::uint64_t b, std::uint64_t end, unsigned c) {
        auto& p = parts[c];
        e.for_each_range(b, end, [&](std::uint64_t idx, const std::vector<std::uint64_t>& rows) {
            const std::size_t best = detail::best_row_rank(maps, rows, cap);
            if (best < p.min_best) {
                p.min_best = best;
                p.min_idx = idx;
            }
            if (best < rep.threshold) ++p.failures;
        });
    });
    rep.min_best_rank = SIZE_MAX;
    for (const auto& p : parts) {
        rep.failures += p.failures;
        if (p.min_best < rep.min_best_rank) {
            rep.min_best_rank = p.min_best;
            rep.witness_index = p.min_idx;
        }
    }
    rep.subspaces = e.count();
    rep.witness = e.matrix_at(rep.witness_index);
    rep.pass = rep.failures == 0;
    return rep;
}

/// Same measurement on uniformly random k-dim subspaces.
inline AffineCondenserReport sample_affine_condenser(const SomewhereCondenser& C, std::size_t k,
                                                     const Rational& gamma_target, std::uint64_t samples,
                                                     std::uint64_t seed) {
    if (C.n_in > 64 || C.m_out > 64) throw std::invalid_argument("sample_affine_condenser: widths above 64");
    std::vector<SmallLinearMap> maps(C.row_maps.begin(), C.row_maps.end());
    AffineCondenserReport rep;
    rep.mode = "sampled";
    rep.k = k;
    rep.m_out = C.m_out;
    rep.rows = C.rows();
    rep.gamma_target = gamma_target;
    rep.threshold = ceil_rational(gamma_target * static_cast<long>(C.m_out));
    rep.min_best_rank = SIZE_MAX;
    Rng rng = make_rng(seed, 0xc0de);
    for (std::uint64_t t = 0; t < samples; ++t) {
        std::vector<std::uint64_t> rows;
        SmallBasis b;
        while (b.dim() < k) {
            const auto v = random_bits(rng, static_cast<unsigned>(C.n_in));
            if (b.insert(v)) rows.push_back(v);
        }
        const std::size_t best = detail::best_row_rank(maps, rows, std::min(C.m_out, k));
        if (best < rep.min_best_rank) {
            rep.min_best_rank = best;
            rep.witness_index = t;
            rep.witness = GF2Matrix::from_u64_rows(rows, C.n_in);
        }
        if (best < rep.threshold) ++rep.failures;
    }
    rep.subspaces = samples;
    rep.pass = rep.failures == 0;
    return rep;
}

struct RowEntropy {
    std::size_t row = 0;
    unsigned min_entropy_floor = 0;
    Rational cp;
    Rational clipped;  // distance to the nearest (log K)-source
};

struct GeneralCondenserReport {
    std::vector<RowEntropy> per_row;
    std::size_t best_row = 0;
    bool lemma_premise = false;  // collision lemma premise on the best row
    Rational K, L;

    nlohmann::json to_json() const {
        const auto& b = per_row.at(best_row);
        return {{"property", "general_condenser"},
                {"rows", per_row.size()},
                {"best_row", best_row},
                {"best_min_entropy_floor", b.min_entropy_floor},
                {"best_clipped_distance", to_string(b.clipped)},
                {"best_collision_probability", to_string(b.cp)},
                {"K", to_string(K)},
                {"L", to_string(L)},
                {"collision_premise", lemma_premise}};
    }
};

/// Pushes a flat source through every row. The best row minimises the exact
/// distance to a (log K)-source; ties go to higher min-entropy, then the
/// lower index. The collision lemma is checked on every row.
inline GeneralCondenserReport verify_general_condenser(const SomewhereCondenser& C, const std::vector<BitVec>& support,
                                                       const Rational& K, const Rational& L,
                                                       const Budget& budget = {}) {
    budget.require(sat_mul(support.size(), C.rows()), "verify_general_condenser");
    GeneralCondenserReport rep;
    rep.K = K;
    rep.L = L;
    for (std::size_t j = 0; j < C.rows(); ++j) {
        const auto& M = C.row_maps[j];
        const ExactDist d = flat_distribution([&](const BitVec& x) { return M.apply(x); }, C.m_out, support);
        const auto cert = min_entropy_closeness(d, K, L);
        rep.per_row.push_back({j, min_entropy_floor(d), cert.cp, cert.clipped});
    }
    for (std::size_t j = 1; j < rep.per_row.size(); ++j) {
        const auto& a = rep.per_row[j];
        const auto& b = rep.per_row[rep.best_row];
        if (a.clipped < b.clipped || (a.clipped == b.clipped && a.min_entropy_floor > b.min_entropy_floor))
            rep.best_row = j;
    }
    rep.lemma_premise = rep.per_row[rep.best_row].cp <= Rational(1) / (K * L);
    return rep;
}

}  // namespace gf2lab
