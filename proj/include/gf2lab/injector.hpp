#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bitvec.hpp"
#include "common.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "subspace.hpp"
#include "verify.hpp"

namespace gf2lab {

// Sumset linear injectors and the structured functions f(x) = xor_i f_i(A_i x).

struct SumsetInjector {
    std::size_t n = 0, k1 = 0, k2 = 0, d = 0;
    std::vector<GF2Matrix> matrices;  // each d x n
    std::optional<bool> certified;    // unset until verified

    std::size_t m() const { return matrices.size(); }

    /// A_i x for x as an integer (n, d <= 64).
    std::uint64_t apply(std::size_t i, std::uint64_t x) const {
        std::uint64_t y = 0;
        const auto& A = matrices[i];
        for (std::size_t r = 0; r < d; ++r)
            if (std::popcount(A.row(r).to_u64() & x) & 1) y |= std::uint64_t{1} << r;
        return y;
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"n", n}, {"k1", k1}, {"k2", k2}, {"d", d}, {"m", m()}};
        auto& ms = j["matrices"] = nlohmann::json::array();
        for (const auto& A : matrices) {
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t r = 0; r < A.rows(); ++r) rows.push_back(A.row(r).to_text());
            ms.push_back(rows);
        }
        j["certified"] = certified ? nlohmann::json(*certified) : nlohmann::json(nullptr);
        return j;
    }

    static SumsetInjector from_json(const nlohmann::json& j) {
        SumsetInjector J;
        J.n = j.at("n").get<std::size_t>();
        J.k1 = j.at("k1").get<std::size_t>();
        J.k2 = j.at("k2").get<std::size_t>();
        J.d = j.at("d").get<std::size_t>();
        for (const auto& rows : j.at("matrices")) {
            std::vector<BitVec> rs;
            for (const auto& r : rows) rs.push_back(BitVec::from_text(r.get<std::string>()));
            if (rs.size() != J.d) throw std::invalid_argument("injector: matrix with wrong row count");
            J.matrices.push_back(GF2Matrix::from_rows(std::move(rs), J.n));
        }
        if (j.contains("certified") && !j["certified"].is_null()) J.certified = j["certified"].get<bool>();
        return J;
    }
};

inline SumsetInjector sample_injector(std::size_t n, std::size_t k1, std::size_t k2, std::size_t d, std::size_t m,
                                      std::uint64_t seed) {
    if (n == 0 || n > 64 || d == 0 || d > 64) throw std::invalid_argument("sample_injector: n and d must be in [1, 64]");
    if (k1 > n || k2 > n) throw std::invalid_argument("sample_injector: k1, k2 <= n");
    SumsetInjector J{n, k1, k2, d, {}, std::nullopt};
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng = make_rng(seed, i);
        J.matrices.push_back(GF2Matrix::random(d, n, rng));
    }
    return J;
}

/// Whether A_i is injective on span(basis).
inline bool injective_on(const SumsetInjector& J, std::size_t i, const std::vector<std::uint64_t>& basis) {
    std::vector<std::uint64_t> img;
    for (auto w : basis) img.push_back(J.apply(i, w));
    return GF2Matrix::rank_u64(img) == basis.size();
}

/// Smallest i with ker(A_i) ∩ span(basis) = {0}.
inline std::optional<std::size_t> witness_index(const SumsetInjector& J, const std::vector<std::uint64_t>& basis) {
    for (std::size_t i = 0; i < J.m(); ++i)
        if (injective_on(J, i, basis)) return i;
    return std::nullopt;
}

struct InjectorCheck {
    bool ok = true;
    std::uint64_t pairs = 0;  // (U, V) pairs with dim(U ∩ V) <= 1 examined
    std::optional<std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>>> witness;  // (U, V) bases

    nlohmann::json to_json(std::size_t n) const {
        nlohmann::json j{{"certified", ok}, {"pairs", pairs}};
        if (witness) {
            auto rows = [&](const std::vector<std::uint64_t>& b) {
                nlohmann::json a = nlohmann::json::array();
                for (auto r : b) a.push_back(BitVec::from_u64(r, n).to_text());
                return a;
            };
            j["witness"] = {{"U", rows(witness->first)}, {"V", rows(witness->second)}};
        }
        return j;
    }
};

/// Every (U, V) with dim U = k1, dim V = k2, dim(U ∩ V) <= 1 needs some A_i
/// injective on U + V. Sums are cached by their canonical basis. The first
/// failing pair in (U index, V index) order is returned.
inline InjectorCheck verify_injector(SumsetInjector& J, const Budget& budget = {}) {
    if (J.n > 20) throw BudgetExceeded("verify_injector: n above 20");
    SubspaceEnumerator eu(static_cast<unsigned>(J.n), static_cast<unsigned>(J.k1));
    SubspaceEnumerator ev(static_cast<unsigned>(J.n), static_cast<unsigned>(J.k2));
    budget.require(sat_mul(sat_mul(eu.count(), ev.count()), std::max<std::size_t>(1, J.m())), "verify_injector");
    std::vector<std::vector<std::uint64_t>> vs;
    ev.for_each([&](std::uint64_t, const std::vector<std::uint64_t>& b) { vs.push_back(b); });
    struct Hash {
        std::size_t operator()(const std::vector<std::uint64_t>& v) const {
            std::size_t h = 0;
            for (auto x : v) h = h * 0x9e3779b97f4a7c15ULL + x;
            return h;
        }
    };
    std::unordered_map<std::vector<std::uint64_t>, bool, Hash> cache;
    InjectorCheck out;
    eu.for_each([&](std::uint64_t, const std::vector<std::uint64_t>& U) {
        if (!out.ok) return;
        for (const auto& V : vs) {
            // Canonical basis of U + V: reduced echelon form, pivot = lowest bit.
            std::vector<std::uint64_t> rows = U;
            rows.insert(rows.end(), V.begin(), V.end());
            std::vector<std::uint64_t> W;
            for (unsigned c = 0; c < J.n; ++c) {
                const std::uint64_t bit = std::uint64_t{1} << c;
                auto it = std::find_if(rows.begin(), rows.end(), [&](std::uint64_t r) { return r & bit; });
                if (it == rows.end()) continue;
                const std::uint64_t piv = *it;
                rows.erase(it);
                for (auto& r : rows)
                    if (r & bit) r ^= piv;
                for (auto& r : W)
                    if (r & bit) r ^= piv;
                W.push_back(piv);
            }
            if (W.size() + 1 < J.k1 + J.k2) continue;  // dim(U ∩ V) >= 2
            ++out.pairs;
            auto it = cache.find(W);
            if (it == cache.end()) it = cache.emplace(W, witness_index(J, W).has_value()).first;
            if (!it->second) {
                out.ok = false;
                out.witness = std::make_pair(U, V);
                return;
            }
        }
    });
    J.certified = out.ok;
    return out;
}

// ---------------------------------------------------------------------------
// Structured functions

struct StructuredFunction {
    SumsetInjector injector;
    std::vector<BitVec> tables;  // m tables on 2^d entries

    nlohmann::json to_json() const {
        nlohmann::json j{{"injector", injector.to_json()}};
        auto& t = j["tables"] = nlohmann::json::array();
        for (const auto& tb : tables) t.push_back(tb.to_text());
        return j;
    }

    static StructuredFunction from_json(const nlohmann::json& j) {
        StructuredFunction F;
        F.injector = SumsetInjector::from_json(j.at("injector"));
        for (const auto& t : j.at("tables")) F.tables.push_back(BitVec::from_text(t.get<std::string>()));
        F.check();
        return F;
    }

    void check() const {
        if (tables.size() != injector.m()) throw std::invalid_argument("structured function: one table per matrix");
        for (const auto& t : tables)
            if (t.size() != (std::size_t{1} << injector.d)) throw std::invalid_argument("structured function: table size 2^d");
    }
};

inline StructuredFunction random_structured(const SumsetInjector& J, std::uint64_t seed) {
    if (J.d > 24) throw std::invalid_argument("random_structured: d above 24");
    StructuredFunction F{J, {}};
    for (std::size_t i = 0; i < J.m(); ++i) {
        Rng rng = make_rng(seed, 0x7ab + i);
        BitVec t(std::size_t{1} << J.d);
        for (std::size_t x = 0; x < t.size(); ++x) t.set(x, rng() & 1);
        F.tables.push_back(std::move(t));
    }
    return F;
}

inline bool eval_structured(const StructuredFunction& F, std::uint64_t x) {
    bool acc = false;
    for (std::size_t i = 0; i < F.tables.size(); ++i) acc ^= F.tables[i].get(F.injector.apply(i, x));
    return acc;
}

inline BoolFn structured_table(const StructuredFunction& F, const std::string& name = "structured") {
    F.check();
    return BoolFn::from(F.injector.n, 1, [&](std::uint64_t x) { return eval_structured(F, x) ? 1u : 0u; }, name);
}

// ---------------------------------------------------------------------------
// Search

struct SearchResult {
    StructuredFunction best;
    std::uint64_t best_seed = 0;
    Rational best_bias = 1;     // exact joint directional distance
    Rational best_xor_bias = 1; // exact single-bit bias of the same function
    std::vector<Rational> per_candidate;
    bool budget_exhausted = false;
    std::size_t n = 0, k = 0;

    nlohmann::json to_json() const {
        nlohmann::json c = nlohmann::json::array();
        for (const auto& r : per_candidate) c.push_back(to_string(r));
        return {{"n", n},
                {"k", k},
                {"candidates", per_candidate.size()},
                {"per_candidate_bias", c},
                {"best_seed", best_seed},
                {"best_bias", to_string(best_bias)},
                {"best_bias_double", to_double(best_bias)},
                {"best_xor_bias", to_string(best_xor_bias)},
                {"budget_exhausted", budget_exhausted},
                {"injector_certified", best.injector.certified ? nlohmann::json(*best.injector.certified) : nlohmann::json(nullptr)},
                {"function", best.to_json()}};
    }
};

/// Tries `candidates` structured functions over J (tables from seed + c) and
/// keeps the one with the smallest exact directional distance at k. Stops
/// early, flagged, when the next measurement would overrun the budget.
inline SearchResult search_optimal_daext(const SumsetInjector& J, std::size_t k, std::size_t candidates,
                                         std::uint64_t seed, const Budget& budget = {}, unsigned workers = 1) {
    if (J.n > 10) throw BudgetExceeded("search_optimal_daext: n above 10");
    if (k == 0 || k > J.n) throw std::invalid_argument("search_optimal_daext: k must be in [1, n]");
    if (candidates == 0) throw std::invalid_argument("search_optimal_daext: no candidates");
    const std::uint64_t N = pow2(static_cast<unsigned>(J.n));
    const std::uint64_t per = sat_mul(sat_mul(detail::subspace_count(J.n, k), N - 1), N);
    SearchResult res;
    res.n = J.n;
    res.k = k;
    std::uint64_t spent = 0;
    DirectionalOptions opt;
    opt.workers = workers;
    opt.budget.max_work = UINT64_MAX;
    for (std::size_t c = 0; c < candidates; ++c) {
        if (spent + per > budget.max_work || spent + per < spent) {
            res.budget_exhausted = true;
            break;
        }
        spent += per;
        const auto F = random_structured(J, seed + c);
        const auto f = structured_table(F);
        const Rational b = *directional_bias(f, k, "joint", VerifyMode::exhaustive(), opt).exact;
        res.per_candidate.push_back(b);
        if (res.per_candidate.size() == 1 || b < res.best_bias) {
            res.best_bias = b;
            res.best = F;
            res.best_seed = seed + c;
        }
    }
    if (res.per_candidate.empty()) throw BudgetExceeded("search_optimal_daext: budget below one measurement");
    res.best_xor_bias = *directional_bias(structured_table(res.best), k, "xor_bias", VerifyMode::exhaustive(), opt).exact;
    return res;
}

/// Injector shaped as in the existence argument: k1 = k, k2 = 2, d = k + 3
/// (capped at n), m = n (k + 2).
inline SumsetInjector default_search_injector(std::size_t n, std::size_t k, std::uint64_t seed) {
    return sample_injector(n, k, std::min<std::size_t>(2, n), std::min(k + 3, n), n * (k + 2), seed);
}

}  // namespace gf2lab
