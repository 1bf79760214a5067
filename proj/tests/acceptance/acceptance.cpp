// One pass/fail line per acceptance criterion. Exit status is the number of
// failing criteria, so ctest fails if any line is red.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "cli_commands.hpp"
#include "gf2lab/anf.hpp"
#include "gf2lab/condense.hpp"
#include "gf2lab/daext.hpp"
#include "gf2lab/dimexp.hpp"
#include "gf2lab/injector.hpp"
#include "gf2lab/lbp.hpp"
#include "gf2lab/snmext.hpp"
#include "gf2lab/verify.hpp"
#include "gf2lab/xprims.hpp"
#include "oracles/daext_oracle.hpp"
#include "oracles/lbp_oracle.hpp"
#include "oracles/verify_oracle.hpp"

using namespace gf2lab;

namespace {

// Tolerances. Every comparison below is exact unless listed here.
constexpr double kCondenserSeconds = 600.0;  // criterion 1 runtime ceiling
constexpr std::size_t kConjugators = 100;    // criterion 2
const Rational kCollisionSlack = 0;          // criterion 7

struct Line {
    bool ok;
    std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, const std::function<Line()>& check) {
    Line l;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        l = check();
    } catch (const std::exception& e) {
        l = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!l.ok) ++failures;
    std::printf("criterion %2d %s  %s: %s (%.1fs)\n", n, l.ok ? "PASS" : "FAIL", title.c_str(), l.detail.c_str(), s);
    std::fflush(stdout);
}

std::string str(const Rational& r) { return to_string(r); }

Line condenser_exactness() {
    const auto e = search_dimension_expander(4, 3, Rational(1, 4), 5, 500);
    const auto C = basic_cond(e, 8);
    const Rational gamma = lemma_rate(e.alpha, 3, Rational(1, 2));
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = verify_affine_condenser(C, 4, gamma);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::size_t threshold = ceil_rational((1 + e.alpha / 12) * 2);
    const bool ok = r.subspaces == 200787 && r.failures == 0 && r.threshold == threshold &&
                    r.min_best_rank >= threshold && secs <= kCondenserSeconds;
    std::ostringstream os;
    os << "alpha " << str(e.alpha) << ", " << r.subspaces << " subspaces, min best-row rank " << r.min_best_rank
       << " >= " << threshold << ", failures " << r.failures;
    return {ok, os.str()};
}

Line expander_certification() {
    const auto a = search_dimension_expander(6, 3, Rational(1, 3), 11, 200);
    const auto b = search_dimension_expander(6, 3, Rational(1, 3), 11, 200);
    const auto again = verify_dimension_expander(DimExpander::from_text(a.to_text()).maps, a.alpha, 6);
    bool ok = a.to_text() == b.to_text() && again.ok && again.certified_alpha == a.alpha;
    Rng rng = make_rng(24);
    std::size_t same = 0;
    for (std::size_t t = 0; t < kConjugators; ++t) {
        const auto S = GF2Matrix::random_invertible(6, rng);
        same += verify_dimension_expander(conjugate_maps(a.maps, S), 0, 6).certified_alpha == a.alpha;
    }
    ok = ok && same == kConjugators;
    return {ok, "alpha " + str(a.alpha) + " re-verified; conjugation invariant on " + std::to_string(same) + "/" +
                    std::to_string(kConjugators)};
}

Line directional_oracle_agreement() {
    const auto ip = builtin_fn("ip", 8);
    const auto r = directional_bias(ip, 5, "xor_bias");
    const auto o = oracle::xor_bias_walsh(ip, 5);
    const bool agree = *r.exact == o.value && r.witness && r.witness->subspace_index == o.idx &&
                       r.witness->shift == o.shift && r.witness->a && *r.witness->a == o.a;
    const auto par = directional_bias(builtin_fn("parity", 8), 5, "xor_bias");
    const bool parity_one = *par.exact == 1;
    std::ostringstream os;
    os << "IP max xor-bias " << str(*r.exact) << " (oracle " << str(o.value) << "), witness X#" << o.idx << " a=" << o.a
       << "; parity " << str(*par.exact);
    return {agree && parity_one, os.str()};
}

Line injector_mechanism() {
    auto J = sample_injector(6, 2, 2, 5, 24, 0);
    const auto c = verify_injector(J);
    if (!c.ok) return {false, "seeded family did not certify"};
    std::uint64_t pairs = 0, good = 0;
    SubspaceEnumerator e(6, 2);
    e.for_each([&](std::uint64_t, const std::vector<std::uint64_t>& U) {
        for (std::uint64_t a = 1; a < 64; ++a) {
            auto W = U;
            W.push_back(a);
            if (GF2Matrix::rank_u64(W) != 3) continue;
            ++pairs;
            const auto i = witness_index(J, W);
            if (!i) continue;
            std::set<std::uint64_t> img;
            for (std::uint64_t s = 0; s < 4; ++s) {
                const std::uint64_t u = ((s & 1) ? U[0] : 0) ^ ((s & 2) ? U[1] : 0);
                img.insert(J.apply(*i, u));
                img.insert(J.apply(*i, u ^ a));
            }
            good += img.size() == 8;
        }
    });
    return {good == pairs && pairs == 651u * 60u,
            std::to_string(c.pairs) + " sumset pairs certified; distinct images on U and U+a for " +
                std::to_string(good) + "/" + std::to_string(pairs)};
}

Line snm_structural() {
    // Linearity in x for every seed at n = 8.
    const std::size_t n = 8, d = snm_seed_bits(n);
    const auto idx = snm_default_indices(3);
    bool linear = true;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << d) && linear; ++s) {
        const BitVec y = BitVec::from_u64(s, d);
        std::vector<BitVec> z(256);
        for (std::uint64_t x = 0; x < 256; ++x) z[x] = snm_ext(BitVec::from_u64(x, n), y, idx);
        linear = z[0].none();
        for (std::uint64_t x1 = 0; x1 < 256 && linear; ++x1)
            for (std::uint64_t x2 = 0; x2 < 256 && linear; ++x2) linear = z[x1 ^ x2] == (z[x1] ^ z[x2]);
    }
    // Locked distances at n = 16: 8-dim source from seed 77, three output bits.
    const std::vector<std::pair<std::uint64_t, const char*>> locked{
        {0x01, "21/256"}, {0x02, "5/64"},   {0x03, "5/64"}, {0x15, "35/256"}, {0x2a, "57/512"},
        {0x3f, "9/128"},  {0x40, "11/128"}, {0x55, "5/128"}, {0x6b, "71/512"}, {0x7f, "11/128"}};
    Rng rng = make_rng(77, 0xa11);
    GF2Matrix b;
    do b = GF2Matrix::random(8, 16, rng);
    while (b.rank() != 8);
    const AffineSource X(b, random_bitvec(rng, 16));
    std::size_t matched = 0;
    for (const auto& [c, want] : locked)
        matched += verify_nonmalleability(X, xor_tamper(BitVec::from_u64(c, 7)), snm_default_indices(3)).distance ==
                   parse_rational(want);
    return {linear && matched == locked.size(), std::string("linear for all seeds at n=8: ") + (linear ? "yes" : "no") +
                                                    "; locked shifts matched " + std::to_string(matched) + "/10"};
}

Line pipeline_conformance() {
    const Pipeline P(PipelineParams::structural_toy());
    const oracle::StraightLine S(P);
    Rng rng = make_rng(12);
    std::size_t same = 0;
    const std::size_t trials = 3;
    for (std::size_t t = 0; t < trials; ++t) {
        const BitVec x = random_bitvec(rng, P.params().n);
        const auto ref = S.run(x);
        ref.check_widths(P.params());
        same += P.core(x, true).trace.to_json() == ref.to_json();
    }
    const auto zero = P.core(BitVec(P.params().n), true);
    const bool z0 = zero.z.none() && zero.trace.o.none();
    const Rational expect_len = P.params().beta_prime * Rational(static_cast<long>(P.params().m1));
    const bool len = Rational(static_cast<long>(zero.trace.o.size())) == expect_len;
    return {same == trials && z0 && len, std::to_string(same) + "/" + std::to_string(trials) +
                                             " traces bit-exact; z(0) = 0: " + (z0 ? "yes" : "no") +
                                             "; |o| = " + std::to_string(zero.trace.o.size()) + " = beta' m1 = " + str(expect_len)};
}

Line advice_collision() {
    const LinearCode C = tiled_code(extended_hamming8(), 2);
    const std::size_t k_blocks = 4, block = C.n_code / k_blocks;
    const Rational beta(static_cast<long>(*C.certified_distance), static_cast<long>(C.n_code));
    const Rational bound = advice_collision_bound(beta, k_blocks);
    std::uint64_t checked = 0, bad = 0;
    for (std::uint64_t a = 0; a < 256; ++a)
        for (std::uint64_t b = a + 1; b < 256; ++b) {
            const BitVec ca = C.encode(BitVec::from_u64(a, 8)), cb = C.encode(BitVec::from_u64(b, 8));
            std::uint64_t agree = 0;
            for (std::uint64_t u = 0; u < 256; ++u) {
                const BitVec u1 = BitVec::from_u64(u, 8);
                agree += advice(u1, ca, k_blocks) == advice(u1, cb, k_blocks);
            }
            Rational product = 1;
            for (std::size_t j = 0; j < k_blocks; ++j) {
                const std::size_t l = (ca.slice(j * block, block) ^ cb.slice(j * block, block)).popcount();
                product *= 1 - Rational(static_cast<long>(l), static_cast<long>(block));
            }
            const Rational exact(static_cast<long>(agree), 256);
            bad += !(exact == product && exact <= bound + kCollisionSlack);
            ++checked;
        }
    return {bad == 0, "beta " + str(beta) + ", bound (1-beta)^4 = " + str(bound) + "; " + std::to_string(checked) +
                          " codeword pairs, " + std::to_string(bad) + " violations"};
}

Line eps_bias_conversion() {
    std::size_t trials = 0, held = 0;
    // Planted: all 2^m outcomes twice, then parity on S pushed towards 0 by
    // flipping one bit of S in a prefix of the odd outcomes.
    for (std::size_t m = 1; m <= 10; ++m)
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            Rng rng = make_rng(seed, 0xb1a5 + m);
            const std::uint32_t S = static_cast<std::uint32_t>(1 + uniform_below(rng, (std::uint64_t{1} << m) - 1));
            const std::uint32_t flip = S & (~S + 1);
            std::vector<std::uint32_t> out;
            for (int copy = 0; copy < 2; ++copy)
                for (std::uint32_t z = 0; z < (1u << m); ++z) out.push_back(z);
            const std::size_t planted = out.size() / 2 * (1 + seed % 4) / 4;
            std::size_t done = 0;
            for (auto& z : out)
                if (done < planted && (std::popcount(z & S) & 1)) z ^= flip, ++done;
            const auto r = eps_bias_check(out, m);
            ++trials;
            held += r.held && *r.exact >= Rational(static_cast<long>(2 * planted), static_cast<long>(out.size()));
        }
    // Powering families: bit i = <x^{i+1}, y> over GF(2^l).
    for (unsigned l : {5u, 6u})
        for (std::size_t m = 2; m <= 10; m += 2) {
            const auto& F = field_of_degree(l);
            std::vector<std::uint32_t> out;
            for (std::uint64_t x = 0; x < (1u << l); ++x)
                for (std::uint64_t y = 0; y < (1u << l); ++y) {
                    std::uint32_t z = 0;
                    std::uint64_t p = x;
                    for (std::size_t i = 0; i < m; ++i, p = F.mul(p, x))
                        if (std::popcount(p & y) & 1) z |= 1u << i;
                    out.push_back(z);
                }
            ++trials;
            held += eps_bias_check(out, m).held;
        }
    return {held == trials, std::to_string(held) + "/" + std::to_string(trials) + " families within eps 2^(m/2)"};
}

Line xor_multiplicativity() {
    const auto and3 = builtin_fn("and", 3);
    const Rational base = correlation_with_zero(and3);
    bool ok = base == Rational(3, 4);
    Rational expect = 1;
    for (std::size_t m = 1; m <= 8; ++m) {
        expect *= Rational(3, 4);
        ok = ok && xor_repetition_correlation(and3, m) == expect;
    }
    return {ok, "Cor(AND3, 0) = " + str(base) + "; Cor(AND3^(xor m), 0) = (3/4)^m for m = 1..8"};
}

Line lbp_separation() {
    Rng rng = make_rng(2024, 0x5b);
    GF2Matrix B;
    do B = GF2Matrix::random(8, 16, rng);
    while (B.rank() != 8);
    const BitVec shift = random_bitvec(rng, 16);
    const auto P = subspace_indicator_srolbp(B, shift);
    const bool strong = is_strongly_read_once(P).ok;
    const AffineSource X(B, shift);
    std::uint64_t mismatches = 0;
    for (std::uint64_t x = 0; x < 65536; ++x) {
        const BitVec v = BitVec::from_u64(x, 16);
        mismatches += P.eval(v) != X.contains(v);
    }
    // Cut fixtures: parity, conjunction, tribes and random oblivious ROBPs for n <= 12, every d.
    std::vector<LinearBP> fixtures;
    for (std::size_t n = 2; n <= 12; n += 2) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        fixtures.push_back(parity_robp(n, all));
        fixtures.push_back(tribes_robp(n, 2, n / 2));
        std::vector<std::pair<std::size_t, bool>> lits;
        for (std::size_t i = 0; i < n; i += 2) lits.push_back({i, i % 4 == 0});
        fixtures.push_back(conjunction_robp(n, lits));
    }
    Rng frng = make_rng(7, 0xc0);
    for (std::size_t t = 0; t < 30; ++t) fixtures.push_back(oracle::random_robp(4 + t % 9, 3, frng));
    std::size_t cuts = 0, exact_one = 0;
    for (const auto& F : fixtures)
        for (std::size_t d = 0; d <= F.n; ++d) {
            Rational total = 0;
            for (const auto& ev : robp_cut(F, d)) total += ev.probability;
            ++cuts;
            exact_one += total == 1;
        }
    const bool ok = P.size() == 8 && strong && mismatches == 0 && cuts == exact_one;
    return {ok, std::to_string(P.size()) + " nodes, strongly read-once: " + (strong ? "yes" : "no") + ", " +
                    std::to_string(mismatches) + " membership mismatches; cut totals exactly 1 on " +
                    std::to_string(exact_one) + "/" + std::to_string(cuts)};
}

Line degree_ledger() {
    const std::size_t n = 4, m = 2, d = n + m - 1;
    const auto degs = output_degrees(static_cast<unsigned>(n + d), m,
                                     [&](const BitVec& v) { return lsext(v.prefix(n), v.slice(n, d), m); });
    bool ok = std::all_of(degs.begin(), degs.end(), [](unsigned g) { return g == 2; });
    const auto p = CBParams::toy();
    const auto bound = ldacb_degrees(2, 1);
    unsigned worst = 0;
    for (std::uint64_t id = 0; id < 2; ++id) {
        const auto g = output_degrees(16, p.n2, [&](const BitVec& v) {
            return ldacb(v.prefix(8), v.slice(8, 8), BitVec::from_u64(id, 1), p);
        });
        worst = std::max(worst, *std::max_element(g.begin(), g.end()));
    }
    ok = ok && worst <= bound.out;
    return {ok, "lsext bit degrees all 2 at (n=4, m=2); ldACB toy degree " + std::to_string(worst) + " <= bound " +
                    std::to_string(bound.out)};
}

Line determinism() {
    namespace fs = std::filesystem;
    const nlohmann::json c{
        {"seed", 4242},
        {"steps",
         {{{"verb", "condense"}, {"args", {"verify", "--exhaustive", "--n", "8", "--k", "3"}}},
          {{"verb", "injector"}, {"args", {"verify", "--n", "5", "--m", "12", "--d", "4"}}},
          {{"verb", "verify"}, {"args", {"directional", "--f", "builtin:ip", "--n", "6", "--k", "3", "--property", "joint"}}},
          {{"verb", "verify"}, {"args", {"affine", "--f", "pipeline:statistical", "--k", "6", "--mode", "sampled", "--tuples", "10", "--points", "256"}}},
          {{"verb", "lbp"}, {"args", {"separation-demo", "--n", "12"}}},
          {{"verb", "daext"}, {"args", {"params", "--preset", "statistical"}}},
          {{"verb", "cbreak"}, {"args", {"validate"}}},
          {{"verb", "snmext"}, {"args", {"verify", "--n", "12", "--ksrc", "6", "--shift", "5", "--m", "2"}}}}}};
    auto read_tree = [](const fs::path& dir) {
        std::map<std::string, std::string> t;
        for (const auto& e : fs::recursive_directory_iterator(dir))
            if (e.is_regular_file()) t[fs::relative(e.path(), dir).string()] = cli::read_file(e.path().string());
        return t;
    };
    const fs::path base = fs::temp_directory_path() / "gf2lab_acceptance";
    fs::remove_all(base);
    cli::Globals g1, g2;
    g1.workers = 1;
    g2.workers = 4;
    bool ok1 = false, ok2 = false;
    cli::run_campaign(c, (base / "a").string(), g1, ok1);
    cli::run_campaign(c, (base / "b").string(), g2, ok2);
    const auto ta = read_tree(base / "a"), tb = read_tree(base / "b");
    return {ok1 && ok2 && ta == tb && ta.size() == 9,
            std::to_string(ta.size()) + " files, byte-identical across runs (1 vs 4 workers): " + (ta == tb ? "yes" : "no")};
}

}  // namespace

int main() {
    report(1, "condenser exactness", condenser_exactness);
    report(2, "dimension-expander certification", expander_certification);
    report(3, "directional-bias oracle agreement", directional_oracle_agreement);
    report(4, "sumset injector mechanism", injector_mechanism);
    report(5, "snmExt structural checks", snm_structural);
    report(6, "pipeline conformance", pipeline_conformance);
    report(7, "advice collision bound", advice_collision);
    report(8, "eps-bias conversion", eps_bias_conversion);
    report(9, "XOR multiplicativity", xor_multiplicativity);
    report(10, "LBP separation demo", lbp_separation);
    report(11, "degree ledger", degree_ledger);
    report(12, "determinism", determinism);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
