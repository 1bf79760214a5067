#include <gtest/gtest.h>

#include <iostream>
#include <set>

#include "gf2lab/anf.hpp"
#include "gf2lab/rng.hpp"
#include "gf2lab/snmext.hpp"

using namespace gf2lab;

namespace {

// Measured once and frozen.
const char* const kSnmLocked12 = "1/128";
const char* const kSnmStrongLocked12 = "1/64";

// Schoolbook polynomial product then long division, on plain integers.
std::uint64_t poly_mulmod_oracle(std::uint64_t a, std::uint64_t b, std::uint64_t mod, unsigned k) {
    std::uint64_t prod = 0;
    for (unsigned i = 0; i < k; ++i)
        if ((b >> i) & 1) prod ^= a << i;
    for (int bit = 2 * static_cast<int>(k) - 2; bit >= static_cast<int>(k); --bit)
        if ((prod >> bit) & 1) prod ^= mod << (bit - static_cast<int>(k));
    return prod;
}

AffineSource random_source(std::size_t n, std::size_t k, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0xa11);
    GF2Matrix b;
    do b = GF2Matrix::random(k, n, rng);
    while (b.rank() != k);
    return AffineSource(b, random_bitvec(rng, n));
}

// Straight from the definition with ExactDist over X, per seed.
Rational nm_distance_oracle(const AffineSource& X, const SeedTamper& A, const std::vector<std::size_t>& idx) {
    const std::size_t n = X.n(), d = n / 2 - 1, m = idx.size();
    Rational total = 0;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << d); ++s) {
        const BitVec y = BitVec::from_u64(s, d), yt = A(y);
        auto joint = exact_distribution([&](const BitVec& x) { return snm_ext(x, y, idx).concat(snm_ext(x, yt, idx)); },
                                        2 * m, X);
        auto marg = joint.map([&](const BitVec& v) { return v.slice(m, m); }, m);
        Rational l1 = 0;
        for (std::uint64_t z = 0; z < (std::uint64_t{1} << m); ++z)
            for (const auto& [zt, c] : marg.counts()) {
                (void)c;
                l1 += abs(joint.prob(BitVec::from_u64(z, m).concat(zt)) - marg.prob(zt) / (1 << m));
            }
        total += l1 / 2;
    }
    return total / static_cast<long>(std::uint64_t{1} << d);
}

}  // namespace

TEST(Field, IdentityZeroAndSquareOfGenerator) {
    const auto& F = field_of_degree(4);
    EXPECT_EQ(static_cast<std::uint64_t>(F.modulus()), 0x13u);
    for (std::uint64_t a = 0; a < 16; ++a) EXPECT_EQ(F.mul(a, 1), a);
    EXPECT_EQ(F.pow3(0), 0u);
    // g = x, written 0010 with the leading coefficient first; g^2 = x^2 = 0100.
    EXPECT_EQ(F.mul(0b0010, 0b0010), 0b0100u);
    EXPECT_EQ(poly_mulmod_oracle(0b0010, 0b0010, 0x13, 4), 0b0100u);
    EXPECT_THROW(F.mul(16, 1), std::invalid_argument);
}

TEST(Field, MultiplicationMatchesOracleAllSmallDegrees) {
    Rng rng = make_rng(50);
    for (unsigned k = 2; k <= 24; ++k) {
        const auto& F = field_of_degree(k);
        const auto mod = static_cast<std::uint64_t>(F.modulus());
        for (int t = 0; t < 30; ++t) {
            const std::uint64_t a = random_bits(rng, k), b = random_bits(rng, k), c = random_bits(rng, k);
            EXPECT_EQ(F.mul(a, b), poly_mulmod_oracle(a, b, mod, k));
            EXPECT_EQ(F.mul(a, b), F.mul(b, a));
            EXPECT_EQ(F.mul(F.mul(a, b), c), F.mul(a, F.mul(b, c)));
        }
    }
}

TEST(SnmExt, SeedMapCoversHalfOfFStarInjectively) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 8; ++s) {
        const auto Y = snm_seed_element(BitVec::from_u64(s, 3), 4);
        EXPECT_NE(Y, 0u);
        seen.insert(Y);
    }
    EXPECT_EQ(seen.size(), 8u);
}

TEST(SnmExt, ZeroSourceAndErrors) {
    for (std::uint64_t s = 0; s < 8; ++s)
        EXPECT_TRUE(snm_ext(BitVec(8), BitVec::from_u64(s, 3), {1, 2, 3, 4}).none());
    EXPECT_THROW(snm_ext(BitVec(8), BitVec(4), {1}), std::invalid_argument);
    EXPECT_THROW(snm_ext(BitVec(8), BitVec(3), {}), std::invalid_argument);
    EXPECT_THROW(snm_ext(BitVec(8), BitVec(3), {5}), std::invalid_argument);
    EXPECT_THROW(snm_ext(BitVec(7), BitVec(3), {1}), std::invalid_argument);
}

TEST(SnmExt, SingleIndexAtGenerator) {
    // n = 8, Y = g = x, b_1 = 1: Z_1 = <x, (g || g^3)>, g^3 = x^3.
    const std::uint64_t g = 0b0010;
    const std::uint64_t g3 = poly_mulmod_oracle(poly_mulmod_oracle(g, g, 0x13, 4), g, 0x13, 4);
    EXPECT_EQ(g3, 0b1000u);
    const BitVec row = BitVec::from_u64(g, 4).concat(BitVec::from_u64(g3, 4));
    Rng rng = make_rng(51);
    for (int t = 0; t < 50; ++t) {
        const BitVec x = random_bitvec(rng, 8);
        EXPECT_EQ(snm_ext_element(x, g, {1}).get(0), x.dot(row));
    }
}

TEST(SnmExt, AllIndicesAgainstFieldOracle) {
    Rng rng = make_rng(52);
    for (std::uint64_t s = 0; s < 8; ++s) {
        const std::uint64_t Y = snm_seed_element(BitVec::from_u64(s, 3), 4);
        const std::uint64_t Y3 = poly_mulmod_oracle(poly_mulmod_oracle(Y, Y, 0x13, 4), Y, 0x13, 4);
        const BitVec x = random_bitvec(rng, 8);
        const BitVec z = snm_ext(x, BitVec::from_u64(s, 3), {1, 2, 3, 4});
        for (std::size_t i = 1; i <= 4; ++i) {
            const std::uint64_t b = std::uint64_t{1} << (i - 1);
            const BitVec row = BitVec::from_u64(poly_mulmod_oracle(b, Y, 0x13, 4), 4)
                                   .concat(BitVec::from_u64(poly_mulmod_oracle(b, Y3, 0x13, 4), 4));
            EXPECT_EQ(z.get(i - 1), x.dot(row));
        }
    }
}

TEST(SnmExt, LinearInSourceForEverySeedAtEight) {
    for (std::uint64_t s = 0; s < 8; ++s) {
        const BitVec y = BitVec::from_u64(s, 3);
        const auto M = snm_matrix(8, y, {1, 2, 3, 4});
        for (std::uint64_t a = 0; a < 256; ++a) {
            const BitVec x = BitVec::from_u64(a, 8);
            EXPECT_EQ(snm_ext(x, y, {1, 2, 3, 4}), M.apply(x));
        }
    }
}

TEST(SnmExt, JointDegreeAtEight) {
    auto degs = output_degrees(11, 4, [](const BitVec& v) { return snm_ext(v.prefix(8), v.slice(8, 3), {1, 2, 3, 4}); });
    unsigned worst = 0;
    for (auto g : degs) worst = std::max(worst, g);
    EXPECT_EQ(worst, kSnmJointDegree);
}

TEST(NonMalleability, MatchesDefinitionOracleAtEight) {
    for (std::size_t k : {3, 5, 8}) {
        const auto X = random_source(8, k, k);
        for (std::uint64_t c : {1, 3, 6}) {
            for (const auto& idx : std::vector<std::vector<std::size_t>>{{1}, {1, 2}, {2, 4}}) {
                const auto A = xor_tamper(BitVec::from_u64(c, 3));
                EXPECT_EQ(verify_nonmalleability(X, A, idx).distance, nm_distance_oracle(X, A, idx));
            }
        }
    }
}

TEST(NonMalleability, FullRankSixteenLocked) {
    const auto X = AffineSource::full(16);
    for (std::uint64_t c : {1, 0x2a, 0x7f}) {
        auto r = verify_nonmalleability(X, xor_tamper(BitVec::from_u64(c, 7)), {1});
        // Distinct nonzero rows: Z and Z' are independent uniform bits under uniform X.
        EXPECT_EQ(r.distance, Rational(0));
        EXPECT_EQ(r.strong_distance, Rational(0));
        EXPECT_EQ(r.seeds, 128u);
    }
}

TEST(NonMalleability, TwelveBitSourceAtSixteenLocked) {
    const auto X = random_source(16, 12, 77);
    auto r = verify_nonmalleability(X, xor_tamper(BitVec::from_u64(0x15, 7)), {1, 2}, {}, 2);
    std::cout << "snm n=16 ksrc=12 m=2: nm " << to_string(r.distance) << " strong " << to_string(r.strong_distance) << "\n";
    EXPECT_EQ(r.distance, parse_rational(kSnmLocked12));
    EXPECT_LE(r.strong_distance, r.distance);
}

TEST(NonMalleability, PointMassNegativeControl) {
    const auto X = AffineSource::point(BitVec::from_u64(0xbeef, 16));
    EXPECT_EQ(verify_nonmalleability(X, xor_tamper(BitVec::from_u64(1, 7)), {1}).distance, Rational(1, 2));
    EXPECT_EQ(verify_nonmalleability(X, xor_tamper(BitVec::from_u64(1, 7)), {1, 2, 3}).distance, Rational(7, 8));
}

TEST(NonMalleability, FixedPointDetected) {
    const auto X = AffineSource::full(8);
    EXPECT_THROW(verify_nonmalleability(X, [](const BitVec& y) { return y; }, {1}), std::invalid_argument);
    // Fixed point at a single seed only.
    auto A = [](const BitVec& y) { return y.to_u64() == 5 ? y : y ^ BitVec::from_u64(1, 3); };
    EXPECT_THROW(verify_nonmalleability(X, A, {1}), std::invalid_argument);
    Budget tiny{10};
    EXPECT_THROW(verify_nonmalleability(X, xor_tamper(BitVec::from_u64(1, 3)), {1}, tiny), BudgetExceeded);
}

// Paired runs: relabelling the chosen output coordinates is an isomorphism of the
// output space, so distances must not move; neither may the source's shift.
TEST(NonMalleability, PairedRunInvariances) {
    const auto X = random_source(12, 7, 5);
    const auto A = xor_tamper(BitVec::from_u64(9, 5));
    const auto a = verify_nonmalleability(X, A, {1, 3, 6});
    const auto b = verify_nonmalleability(X, A, {6, 1, 3});
    EXPECT_EQ(a.distance, b.distance);
    EXPECT_EQ(a.strong_distance, b.strong_distance);
    const AffineSource shifted(X.basis(), X.shift() ^ BitVec::from_u64(0x3c1, 12));
    EXPECT_EQ(verify_nonmalleability(shifted, A, {1, 3, 6}).distance, a.distance);
}

TEST(NonMalleability, StrongnessAtTwelveLocked) {
    Rational worst = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto X = random_source(12, 7, 100 + s);
        worst = std::max(worst, verify_nonmalleability(X, xor_tamper(BitVec::from_u64(1, 5)), {1, 2}).strong_distance);
    }
    std::cout << "snm n=12 k=7 m=2 strong worst " << to_string(worst) << "\n";
    EXPECT_EQ(worst, parse_rational(kSnmStrongLocked12));
}

TEST(NonMalleability, ParallelMatchesSerial) {
    const auto X = random_source(12, 8, 9);
    const auto A = xor_tamper(BitVec::from_u64(3, 5));
    EXPECT_EQ(verify_nonmalleability(X, A, {1, 2}, {}, 1).distance, verify_nonmalleability(X, A, {1, 2}, {}, 3).distance);
}

TEST(NonMalleability, TenShiftsAtSixteenLocked) {
    const auto X = random_source(16, 8, 77);
    const std::vector<std::pair<std::uint64_t, const char*>> locked{
        {0x01, "21/256"}, {0x02, "5/64"},   {0x03, "5/64"}, {0x15, "35/256"}, {0x2a, "57/512"},
        {0x3f, "9/128"},  {0x40, "11/128"}, {0x55, "5/128"}, {0x6b, "71/512"}, {0x7f, "11/128"}};
    const auto idx = snm_default_indices(3);
    for (const auto& [c, want] : locked) {
        const auto A = xor_tamper(BitVec::from_u64(c, 7));
        const auto r = verify_nonmalleability(X, A, idx);
        EXPECT_EQ(r.distance, nm_distance_oracle(X, A, idx)) << c;
        EXPECT_EQ(r.distance, parse_rational(want)) << c;
    }
}
