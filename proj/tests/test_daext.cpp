#include <gtest/gtest.h>

#include "gf2lab/anf.hpp"
#include "gf2lab/daext.hpp"
#include "gf2lab/rng.hpp"
#include "oracles/daext_oracle.hpp"

using namespace gf2lab;

namespace {

const Pipeline& structural() {
    static const Pipeline P(PipelineParams::structural_toy());
    return P;
}

const Pipeline& statistical() {
    static const Pipeline P(PipelineParams::statistical_toy());
    return P;
}

void expect_same_trace(const TraceRecord& a, const TraceRecord& b) {
    ASSERT_EQ(a.sc, b.sc) << "sc";
    ASSERT_EQ(a.xprime, b.xprime) << "x'";
    ASSERT_EQ(a.enc_x, b.enc_x) << "Enc(x)";
    ASSERT_EQ(a.blocks.size(), b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const auto &p = a.blocks[i], &q = b.blocks[i];
        SCOPED_TRACE("block " + std::to_string(i + 1));
        EXPECT_EQ(p.x, q.x);
        EXPECT_EQ(p.y, q.y);
        EXPECT_EQ(p.sr, q.sr);
        EXPECT_EQ(p.r, q.r);
        EXPECT_EQ(p.u, q.u);
        EXPECT_EQ(p.u1, q.u1);
        EXPECT_EQ(p.u2, q.u2);
        EXPECT_EQ(p.h, q.h);
        EXPECT_EQ(p.ut, q.ut);
        EXPECT_EQ(p.sn, q.sn);
        EXPECT_EQ(p.yt, q.yt);
        EXPECT_EQ(p.w, q.w);
        EXPECT_EQ(p.v, q.v);
    }
    EXPECT_EQ(a.z, b.z);
    EXPECT_EQ(a.o, b.o);
}

}  // namespace

TEST(Advice, ZeroCodewordGivesZero) {
    Rng rng = make_rng(3);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(advice(random_bitvec(rng, 12), BitVec(32), 4), BitVec(4));
}

TEST(Advice, TwoBlockExample) {
    // blocks 1000 and 0110, index blocks 00 and 10
    const BitVec h = advice(BitVec::from_string("0010"), BitVec::from_string("10000110"), 2);
    EXPECT_EQ(h, BitVec::from_string("11"));
}

TEST(Advice, IndivisibleSplitsRejected) {
    EXPECT_THROW(advice(BitVec(4), BitVec(9), 2), std::invalid_argument);
    EXPECT_THROW(advice(BitVec(5), BitVec(8), 2), std::invalid_argument);
    EXPECT_THROW(advice(BitVec(2), BitVec(8), 2), std::invalid_argument);  // 1-bit index, 4-bit block
}

TEST(Advice, CollisionEqualsProductAndMeetsBound) {
    // [16, 8, 4] code, four blocks of 4 bits, 2-bit indices; relative distance 1/4.
    const LinearCode C = tiled_code(extended_hamming8(), 2);
    ASSERT_EQ(*C.certified_distance, 4u);
    const Rational beta(static_cast<long>(*C.certified_distance), static_cast<long>(C.n_code));
    const Rational bound = advice_collision_bound(beta, 4);
    EXPECT_EQ(bound, Rational(81, 256));
    Rational worst = 0;
    for (std::uint64_t a = 0; a < 256; ++a)
        for (std::uint64_t b = a + 1; b < 256; ++b) {
            const BitVec ca = C.encode(BitVec::from_u64(a, 8)), cb = C.encode(BitVec::from_u64(b, 8));
            std::uint64_t agree = 0;
            for (std::uint64_t u = 0; u < 256; ++u) {
                const BitVec u1 = BitVec::from_u64(u, 8);
                if (advice(u1, ca, 4) == advice(u1, cb, 4)) ++agree;
            }
            const Rational exact(static_cast<long>(agree), 256);
            ASSERT_EQ(exact, advice_collision_product(ca, cb, 4));
            ASSERT_LE(exact, bound);
            worst = std::max(worst, exact);
        }
    // Minimum-weight words sit in one 8-bit tile, two per 4-bit block at best: (1/2)^2.
    EXPECT_EQ(worst, Rational(1, 4));
}

TEST(CodeStep, ZeroAndIdentity) {
    const LinearCode G = extended_hamming8();
    EXPECT_EQ(disperser_to_extractor(BitVec(8), G, Rational(1, 2)), BitVec(4));
    Rng rng = make_rng(5);
    const BitVec z = random_bitvec(rng, 8);
    EXPECT_EQ(disperser_to_extractor(z, identity_code(8), Rational(1, 2)), z.prefix(4));
    EXPECT_EQ(disperser_to_extractor(z, identity_code(8), Rational(1)), z);
}

TEST(CodeStep, HammingRowsAreSupportParities) {
    const LinearCode G = extended_hamming8();
    Rng rng = make_rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const BitVec z = random_bitvec(rng, 8);
        const BitVec o = disperser_to_extractor(z, G, Rational(1, 2));
        for (std::size_t i = 0; i < 4; ++i) {
            bool acc = false;
            for (std::size_t j = 0; j < 8; ++j)
                if (G.generator.get(i, j)) acc ^= z.get(j);
            EXPECT_EQ(o.get(i), acc);
        }
    }
}

TEST(CodeStep, Errors) {
    LinearCode raw(GF2Matrix::identity(4));
    EXPECT_THROW(disperser_to_extractor(BitVec(4), raw, Rational(1)), std::invalid_argument);
    EXPECT_THROW(disperser_to_extractor(BitVec(8), extended_hamming8(), Rational(3, 4)), std::invalid_argument);
    EXPECT_THROW(disperser_to_extractor(BitVec(8), extended_hamming8(), Rational(1, 3)), std::invalid_argument);
}

TEST(Params, TogglesAndWidths) {
    const auto s = PipelineParams::structural_toy();
    EXPECT_TRUE(s.structurally_valid());
    EXPECT_EQ(s.l1p(), 512u);
    EXPECT_EQ(s.l2(), 8u);
    EXPECT_EQ(s.l3p(), 64u);
    EXPECT_EQ(s.sc_bits(), 128u);
    EXPECT_EQ(s.k_blocks, 4u);
    EXPECT_EQ(s.index_bits, 9u);
    EXPECT_EQ(s.m_prime, 59u);
    EXPECT_EQ(s.c_delta, 1024u);  // ledger saturates at n
    EXPECT_EQ(s.c, (std::vector<std::uint64_t>{1025, 1}));
    EXPECT_EQ(s.out_bits(), 4u);
    ASSERT_EQ(s.notes.size(), 1u);  // k shrunk from 256
    bool theorem_failure = false;
    for (const auto& c : s.constraints()) theorem_failure |= c.kind == "theorem" && !c.held;
    EXPECT_TRUE(theorem_failure);

    const auto t = PipelineParams::statistical_toy();
    EXPECT_TRUE(t.structurally_valid());
    EXPECT_EQ(t.l1p(), 1u);
    EXPECT_EQ(t.k_blocks, 1u);
    EXPECT_EQ(t.m_prime, 4u);
    EXPECT_EQ(t.c, (std::vector<std::uint64_t>{13, 1}));
    EXPECT_EQ(t.n3, (std::vector<std::size_t>{52, 4}));
    EXPECT_EQ(t.out_bits(), 2u);
}

TEST(Params, JsonRoundTrip) {
    for (const auto& p : {PipelineParams::structural_toy(), PipelineParams::statistical_toy()}) {
        const auto j = p.to_json();
        EXPECT_EQ(PipelineParams::from_json(j).to_json(), j);
    }
}

TEST(Params, WidthFailuresNameTheStage) {
    auto p = PipelineParams::statistical_toy();
    p.ip_bits = 4;  // wider than the 3-bit rows
    try {
        p.validate();
        FAIL() << "expected a width failure";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("step 3 (IP)"), std::string::npos) << e.what();
    }
    auto q = PipelineParams::statistical_toy();
    q.c = {2, 1};  // 2 <= c(delta) * 1
    q.finalize(false, false);
    EXPECT_FALSE(q.structurally_valid());
}

TEST(Params, FormulaDerivationAtDeskScale) {
    const auto p = PipelineParams::derive(1024, Rational(1, 2), PipelineMode::structural);
    EXPECT_EQ(p.t, 32u);
    EXPECT_EQ(p.m_prime, 0u);  // 1024 / (300 * 32 * 8 * 8^6) rounds to 0
    EXPECT_FALSE(p.structurally_valid());
    EXPECT_THROW(Pipeline{p}, std::invalid_argument);
}

TEST(Pipeline, ZeroInputIsZeroEverywhere) {
    for (const Pipeline* P : {&structural(), &statistical()}) {
        const auto res = P->core(BitVec(P->params().n), true);
        const auto& T = res.trace;
        for (const auto& v : T.sc) EXPECT_EQ(v.popcount(), 0u);
        for (const auto& v : T.xprime) EXPECT_EQ(v.popcount(), 0u);
        for (const auto& b : T.blocks) {
            for (const auto& v : b.y) EXPECT_EQ(v.popcount(), 0u);
            for (const auto& v : b.sr) EXPECT_EQ(v.popcount(), 0u);
            for (const auto& v : b.sn) EXPECT_EQ(v.popcount(), 0u);
            EXPECT_EQ(b.r.popcount() + b.u.popcount() + b.h.popcount() + b.yt.popcount() + b.w.popcount() +
                          b.v.popcount(),
                      0u);
        }
        EXPECT_EQ(res.z, BitVec(P->params().m1));
        EXPECT_EQ(daext(*P, BitVec(P->params().n)), BitVec(P->params().out_bits()));
    }
}

TEST(Pipeline, Deterministic) {
    Rng rng = make_rng(11);
    const BitVec x = random_bitvec(rng, 1024);
    const auto a = structural().core(x, true), b = structural().core(x, true);
    EXPECT_EQ(a.trace.to_json(), b.trace.to_json());
}

TEST(Pipeline, StructuralToyMatchesStraightLine) {
    const oracle::StraightLine S(structural());
    Rng rng = make_rng(12);
    for (int trial = 0; trial < 3; ++trial) {
        const BitVec x = random_bitvec(rng, 1024);
        const auto res = daext_core(structural(), x);
        const auto ref = S.run(x);
        ref.check_widths(structural().params());
        expect_same_trace(res.trace, ref);
        EXPECT_EQ(daext(structural(), x), ref.o);
        EXPECT_EQ(ref.o.size(), 4u);  // beta' m1 = 8 / 2
    }
}

TEST(Pipeline, StatisticalToyMatchesStraightLine) {
    const oracle::StraightLine S(statistical());
    for (std::uint64_t x = 0; x < 4096; x += 37) {
        const BitVec xv = BitVec::from_u64(x, 12);
        expect_same_trace(daext_core(statistical(), xv).trace, S.run(xv));
    }
}

TEST(Pipeline, ParallelBlocksMatchSerial) {
    Rng rng = make_rng(13);
    const BitVec x = random_bitvec(rng, 1024);
    EXPECT_EQ(structural().core(x, false, 1).z, structural().core(x, false, 4).z);
    EXPECT_EQ(statistical().table(1), statistical().table(3));
}

TEST(Pipeline, WidthCheckCatchesTamperedTrace) {
    auto T = daext_core(statistical(), BitVec::from_u64(0x5a5, 12)).trace;
    T.blocks[1].yt = BitVec(3);
    try {
        T.check_widths(statistical().params());
        FAIL();
    } catch (const std::logic_error& e) {
        EXPECT_NE(std::string(e.what()).find("y~_i (block 2)"), std::string::npos) << e.what();
    }
}

TEST(Pipeline, DegreeLedgerBoundsAnfAtStatisticalToy) {
    const auto& P = statistical();
    const auto& p = P.params();
    const auto g = p.degrees();
    std::vector<BitVec> w_tab[2], v_tab[2], z_tab, o_tab;
    for (int i = 0; i < 2; ++i) {
        w_tab[i].assign(p.n3[i], BitVec(4096));
        v_tab[i].assign(p.m1, BitVec(4096));
    }
    z_tab.assign(p.m1, BitVec(4096));
    o_tab.assign(p.out_bits(), BitVec(4096));
    for (std::uint64_t x = 0; x < 4096; ++x) {
        const auto T = P.core(BitVec::from_u64(x, 12), true).trace;
        for (int i = 0; i < 2; ++i) {
            for (std::size_t b = 0; b < p.n3[i]; ++b) w_tab[i][b].set(x, T.blocks[i].w.get(b));
            for (std::size_t b = 0; b < p.m1; ++b) v_tab[i][b].set(x, T.blocks[i].v.get(b));
        }
        for (std::size_t b = 0; b < p.m1; ++b) z_tab[b].set(x, T.z.get(b));
        for (std::size_t b = 0; b < p.out_bits(); ++b) o_tab[b].set(x, T.o.get(b));
    }
    for (int i = 0; i < 2; ++i) {
        for (const auto& t : w_tab[i]) EXPECT_LE(anf_of(t).degree(), g.w);
        for (const auto& t : v_tab[i]) EXPECT_LE(anf_of(t).degree(), g.v[i]);
    }
    for (const auto& t : z_tab) EXPECT_LE(anf_of(t).degree(), g.z);
    for (const auto& t : o_tab) EXPECT_LE(anf_of(t).degree(), g.z);
    // The dominance the products are sized for.
    EXPECT_GT(p.c[0], p.c_delta * p.c[1]);
}
