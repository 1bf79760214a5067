#include <gtest/gtest.h>

#include <set>

#include "gf2lab/injector.hpp"
#include "oracles/verify_oracle.hpp"

using namespace gf2lab;

namespace {

// Point-wise oracle: A is injective on span(basis) iff no nonzero element maps to 0.
bool injective_by_points(const SumsetInjector& J, std::size_t i, const std::vector<std::uint64_t>& basis) {
    const std::size_t k = basis.size();
    for (std::uint64_t c = 1; c < (std::uint64_t{1} << k); ++c) {
        std::uint64_t w = 0;
        for (std::size_t j = 0; j < k; ++j)
            if ((c >> j) & 1) w ^= basis[j];
        if (J.apply(i, w) == 0) return false;
    }
    return true;
}

std::vector<std::uint64_t> u64_basis(const oracle::Sub& s) { return s.basis; }

bool certified_by_oracle(const SumsetInjector& J) {
    const auto us = oracle::all_subspaces(J.n, J.k1);
    const auto vs = oracle::all_subspaces(J.n, J.k2);
    for (const auto& U : us)
        for (const auto& V : vs) {
            auto w = u64_basis(U);
            const auto v = u64_basis(V);
            w.insert(w.end(), v.begin(), v.end());
            if (GF2Matrix::rank_u64(w) + 1 < J.k1 + J.k2) continue;
            // reduce w to an independent spanning set
            std::vector<std::uint64_t> ind;
            for (auto x : w) {
                ind.push_back(x);
                if (GF2Matrix::rank_u64(ind) < ind.size()) ind.pop_back();
            }
            bool any = false;
            for (std::size_t i = 0; i < J.m() && !any; ++i) any = injective_by_points(J, i, ind);
            if (!any) return false;
        }
    return true;
}

SumsetInjector identity_injector(std::size_t n, std::size_t k1, std::size_t k2) {
    return SumsetInjector{n, k1, k2, n, {GF2Matrix::identity(n)}, std::nullopt};
}

}  // namespace

TEST(InjectorTest, IdentityCertifiedZeroFails) {
    auto J = identity_injector(5, 2, 2);
    EXPECT_TRUE(verify_injector(J).ok);
    ASSERT_TRUE(J.certified);
    EXPECT_TRUE(*J.certified);

    SumsetInjector Z{5, 2, 2, 4, {GF2Matrix::zero(4, 5), GF2Matrix::zero(4, 5)}, std::nullopt};
    const auto r = verify_injector(Z);
    EXPECT_FALSE(r.ok);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(r.witness->first.size(), 2u);
    EXPECT_EQ(r.witness->second.size(), 2u);
    EXPECT_FALSE(*Z.certified);
}

TEST(InjectorTest, AgreesWithPointOracle) {
    for (std::size_t n : {4, 5})
        for (std::size_t m : {1, 2, 3, 5, 8})
            for (std::uint64_t seed = 0; seed < 4; ++seed) {
                auto J = sample_injector(n, 2, 2, 3, m, seed);
                EXPECT_EQ(verify_injector(J).ok, certified_by_oracle(J)) << n << " " << m << " " << seed;
            }
}

TEST(InjectorTest, LockedSeedCertified) {
    auto J = sample_injector(6, 2, 2, 5, 24, 0);
    const auto r = verify_injector(J);
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.pairs, 423150u);
}

TEST(InjectorTest, FailureWitnessIsGenuine) {
    auto J = sample_injector(6, 2, 2, 5, 2, 3);
    const auto r = verify_injector(J);
    ASSERT_FALSE(r.ok);
    auto w = r.witness->first;
    w.insert(w.end(), r.witness->second.begin(), r.witness->second.end());
    std::vector<std::uint64_t> ind;
    for (auto x : w) {
        ind.push_back(x);
        if (GF2Matrix::rank_u64(ind) < ind.size()) ind.pop_back();
    }
    EXPECT_GE(ind.size() + 1, 4u);
    for (std::size_t i = 0; i < J.m(); ++i) EXPECT_FALSE(injective_by_points(J, i, ind));
}

TEST(InjectorTest, MonotoneInM) {
    // Matrices are drawn per index, so a larger m only adds matrices.
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        bool prev = false;
        for (std::size_t m = 1; m <= 12; ++m) {
            auto J = sample_injector(6, 2, 2, 5, m, seed);
            const bool ok = verify_injector(J).ok;
            if (prev) {
                EXPECT_TRUE(ok) << seed << " " << m;
            }
            prev = ok;
        }
    }
}

TEST(InjectorTest, WitnessIndexSeparatesShiftedSubspace) {
    // With U + a inside a dimension-(k1+1) space, the witnessing A_i maps U and U + a to disjoint sets.
    auto J = sample_injector(6, 3, 2, 5, 24, 0);
    ASSERT_TRUE(verify_injector(J).ok);
    Rng rng = make_rng(11, 0);
    SubspaceEnumerator e(6, 3);
    for (int t = 0; t < 50; ++t) {
        const auto U = e.at(rng() % e.count());
        std::uint64_t a = 0;
        while (a == 0 || GF2Matrix::rank_u64([&] { auto v = U; v.push_back(a); return v; }()) == U.size())
            a = rng() & 63;
        auto W = U;
        W.push_back(a);
        const auto i = witness_index(J, W);
        ASSERT_TRUE(i);
        std::set<std::uint64_t> img0, img1;
        for (std::uint64_t c = 0; c < 8; ++c) {
            std::uint64_t u = 0;
            for (int j = 0; j < 3; ++j)
                if ((c >> j) & 1) u ^= U[j];
            img0.insert(J.apply(*i, u));
            img1.insert(J.apply(*i, u ^ a));
        }
        EXPECT_EQ(img0.size(), 8u);
        for (auto y : img1) EXPECT_EQ(img0.count(y), 0u);
    }
}

TEST(InjectorTest, JsonRoundTrip) {
    auto J = sample_injector(6, 2, 2, 5, 3, 9);
    verify_injector(J);
    const auto back = SumsetInjector::from_json(nlohmann::json::parse(J.to_json().dump()));
    EXPECT_EQ(back.to_json(), J.to_json());
    EXPECT_EQ(back.certified, J.certified);
}

TEST(StructuredTest, MatchesMonolithicTable) {
    const auto J = sample_injector(6, 2, 2, 5, 4, 5);
    const auto F = random_structured(J, 17);
    const auto f = structured_table(F);
    for (std::uint64_t x = 0; x < 64; ++x) {
        std::uint32_t acc = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            // A_i x computed from matrix rows directly
            std::uint64_t y = 0;
            for (std::size_t r = 0; r < 5; ++r)
                if (J.matrices[i].row(r).dot(BitVec::from_u64(x, 6))) y |= std::uint64_t{1} << r;
            acc ^= F.tables[i].get(y);
        }
        EXPECT_EQ(f(x), acc) << x;
    }
}

TEST(StructuredTest, DegenerateCases) {
    auto J = sample_injector(6, 2, 2, 5, 3, 1);
    StructuredFunction Z{J, std::vector<BitVec>(3, BitVec(32))};
    for (std::uint64_t x = 0; x < 64; ++x) EXPECT_FALSE(eval_structured(Z, x));

    StructuredFunction I{identity_injector(6, 2, 2), {}};
    Rng rng = make_rng(4, 0);
    BitVec t(64);
    for (std::size_t x = 0; x < 64; ++x) t.set(x, rng() & 1);
    I.tables.push_back(t);
    for (std::uint64_t x = 0; x < 64; ++x) EXPECT_EQ(eval_structured(I, x), t.get(x));
}

TEST(StructuredTest, PermutationEquivariance) {
    // Reordering the (A_i, f_i) pairs leaves the function unchanged.
    const auto J = sample_injector(6, 2, 2, 5, 5, 2);
    const auto F = random_structured(J, 3);
    StructuredFunction G = F;
    std::reverse(G.injector.matrices.begin(), G.injector.matrices.end());
    std::reverse(G.tables.begin(), G.tables.end());
    EXPECT_EQ(structured_table(F).table, structured_table(G).table);
}

TEST(StructuredTest, JsonRoundTripAndValidation) {
    const auto F = random_structured(sample_injector(6, 2, 2, 5, 3, 8), 1);
    const auto back = StructuredFunction::from_json(nlohmann::json::parse(F.to_json().dump()));
    EXPECT_EQ(structured_table(back).table, structured_table(F).table);
    auto bad = F.to_json();
    bad["tables"].erase(0);
    EXPECT_THROW(StructuredFunction::from_json(bad), std::invalid_argument);
}

TEST(SearchTest, FullDimensionLocked) {
    const auto J = default_search_injector(6, 6, 1);
    const auto r = search_optimal_daext(J, 6, 4, 7);
    EXPECT_EQ(r.per_candidate.size(), 4u);
    EXPECT_FALSE(r.budget_exhausted);
    EXPECT_EQ(r.best_bias, *std::min_element(r.per_candidate.begin(), r.per_candidate.end()));
    EXPECT_EQ(to_string(r.best_bias), "3/16");
    // re-measure the winner through the oracle route
    const auto f = structured_table(r.best);
    const auto o = oracle::joint_by_points(f, 6, false);
    EXPECT_EQ(o.value, r.best_bias);
}

TEST(SearchTest, RemeasureAtEightFour) {
    const auto J = default_search_injector(8, 4, 1);
    const auto r = search_optimal_daext(J, 4, 1, 7);
    ASSERT_EQ(r.per_candidate.size(), 1u);
    const auto again = directional_bias(structured_table(random_structured(J, 7)), 4, "joint", VerifyMode::exhaustive());
    EXPECT_EQ(*again.exact, r.best_bias);
    EXPECT_EQ(r.best_seed, 7u);
}

TEST(SearchTest, BudgetExhaustionReturnsBestSoFar) {
    const auto J = default_search_injector(6, 3, 2);
    const std::uint64_t per = detail::subspace_count(6, 3) * 63 * 64;
    const auto r = search_optimal_daext(J, 3, 10, 0, Budget{per * 2 + 1});
    EXPECT_TRUE(r.budget_exhausted);
    EXPECT_EQ(r.per_candidate.size(), 2u);
    EXPECT_THROW(search_optimal_daext(J, 3, 10, 0, Budget{per - 1}), BudgetExceeded);
}

TEST(SearchTest, MonotoneOverK) {
    // Larger subspaces can only lower the best distance for a fixed function.
    const auto J = default_search_injector(6, 2, 3);
    const auto F = random_structured(J, 5);
    const auto f = structured_table(F);
    Rational prev = 2;
    for (std::size_t k = 1; k <= 6; ++k) {
        const Rational b = *directional_bias(f, k, "joint", VerifyMode::exhaustive()).exact;
        EXPECT_LE(b, prev) << k;
        prev = b;
    }
}
