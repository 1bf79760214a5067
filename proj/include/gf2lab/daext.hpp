#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitvec.hpp"
#include "cbreak.hpp"
#include "common.hpp"
#include "condense.hpp"
#include "dimexp.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "snmext.hpp"
#include "xprims.hpp"

namespace gf2lab {

// The directional affine extractor pipeline: per-block condensing, inner
// products, advice from a sampled codeword, non-malleable extraction against
// every global condenser row, correlation breaking, degree-raising products,
// and the final code step turning the disperser into an extractor.

// ---------------------------------------------------------------------------
// Named codes

/// "hamming8", "parity:K" or "identity:K", tiled `copies` times.
struct CodeSpec {
    std::string base = "hamming8";
    std::size_t copies = 1;

    LinearCode build() const {
        LinearCode b;
        if (base == "hamming8") {
            b = extended_hamming8();
        } else if (base.rfind("parity:", 0) == 0) {
            b = parity_code(std::stoul(base.substr(7)));
        } else if (base.rfind("identity:", 0) == 0) {
            b = identity_code(std::stoul(base.substr(9)));
        } else {
            throw std::invalid_argument("CodeSpec: unknown base code " + base);
        }
        return copies == 1 ? b : tiled_code(b, copies);
    }

    std::size_t message_bits() const { return base_dims().first * copies; }
    std::size_t code_bits() const { return base_dims().second * copies; }

    std::pair<std::size_t, std::size_t> base_dims() const {
        if (base == "hamming8") return {4, 8};
        if (base.rfind("parity:", 0) == 0) {
            const std::size_t k = std::stoul(base.substr(7));
            return {k, k + 1};
        }
        if (base.rfind("identity:", 0) == 0) {
            const std::size_t k = std::stoul(base.substr(9));
            return {k, k};
        }
        throw std::invalid_argument("CodeSpec: unknown base code " + base);
    }

    nlohmann::json to_json() const { return {{"base", base}, {"copies", copies}}; }
    static CodeSpec from_json(const nlohmann::json& j) { return {j.at("base").get<std::string>(), j.at("copies")}; }
};

// ---------------------------------------------------------------------------
// Parameters

enum class PipelineMode { structural, statistical };

inline std::string to_string(PipelineMode m) { return m == PipelineMode::structural ? "structural" : "statistical"; }

inline PipelineMode parse_pipeline_mode(const std::string& s) {
    if (s == "structural") return PipelineMode::structural;
    if (s == "statistical") return PipelineMode::statistical;
    throw std::invalid_argument("unknown pipeline mode " + s);
}

/// Degree bounds per stage, each capped at n (no function of n bits has
/// higher degree). Extractor calls use compose_degree.
struct DaextDegrees {
    std::uint64_t cap = 0;
    std::uint64_t y = 1, xprime = 1, sc = 1;
    std::uint64_t sr = 0, r = 0, u = 0, h = 0, ut = 0, sn = 0, yt = 0, w = 0;
    std::vector<std::uint64_t> v;  // per block: c_i * deg(w)
    std::uint64_t z = 0;

    nlohmann::json to_json() const {
        return {{"cap", cap}, {"y", y},   {"xprime", xprime}, {"sc", sc}, {"sr", sr}, {"r", r}, {"u", u},
                {"h", h},     {"ut", ut}, {"sn", sn},         {"yt", yt}, {"w", w},   {"v", v}, {"z", z}};
    }
};

struct PipelineParams {
    // Knobs.
    std::size_t n = 0;
    Rational delta = 1;
    std::size_t t = 1;
    std::size_t d_exp = 3;             // maps per dimension expander; BasicCond emits 2 d_exp + 2 rows
    std::uint64_t expander_seed = 1;
    std::size_t h1 = 0, r = 0;         // sc = BasicCond^r o SCond_1(x), SCond_1 of depth h1
    std::size_t h2 = 0;                // SCond_2 depth on each block
    std::size_t h3 = 0;                // SCond_3 depth before the log t BasicCond rounds
    std::size_t ip_bits = 1;           // IP over GF(2^ip_bits)
    CodeSpec enc{"hamming8", 1};
    std::size_t n1 = 0;                // snm output bits = ldACB seed bits
    CBParams cb;                       // ldACB over x, n1-bit seeds, row-index advice
    std::size_t m1 = 0;                // z width
    CodeSpec G{"identity:1", 1};
    Rational beta_prime = 1;
    PipelineMode mode = PipelineMode::structural;

    // Derived by finalize() unless given explicitly.
    std::size_t k_blocks = 0;
    std::size_t m_prime = 0;
    std::size_t index_bits = 0;        // per advice block
    std::size_t enc_block = 0;
    std::vector<std::uint64_t> c;      // product sizes c_1..c_t
    std::uint64_t c_delta = 0;         // degree of w from the ledger
    std::vector<std::size_t> n3;       // |w_i| = m1 * c_i
    std::vector<std::string> notes;

    // Shape helpers.
    std::size_t rows_per_step() const { return 2 * d_exp + 2; }
    std::size_t log_t() const { return t && (t & (t - 1)) == 0 ? static_cast<std::size_t>(std::countr_zero(t)) : 0; }
    std::size_t block_bits() const { return t ? n / t : 0; }
    std::size_t y_bits() const { return block_bits() >> h2; }
    std::size_t xprime_bits() const { return n >> (h3 + log_t()); }
    std::size_t sc_bits() const { return n >> (h1 + r); }
    std::size_t snm_half() const { return sc_bits() / 2; }  // m' + k + 1
    std::size_t l1p() const { return ipow(rows_per_step(), h1 + r); }
    std::size_t l2() const { return ipow(rows_per_step(), h2); }
    std::size_t l3p() const { return ipow(rows_per_step(), h3 + log_t()); }
    std::size_t u1_bits() const { return k_blocks * index_bits; }
    std::size_t advice_id_bits() const {
        std::size_t a = 1;
        while ((std::size_t{1} << a) < l1p()) ++a;
        return a;
    }
    std::size_t out_bits() const {
        const Rational o = beta_prime * Rational(static_cast<long>(m1));
        return boost::multiprecision::denominator(o) == 1 ? static_cast<std::size_t>(boost::multiprecision::numerator(o))
                                                           : 0;
    }

    static std::size_t ipow(std::size_t b, std::size_t e) {
        std::size_t v = 1;
        for (std::size_t i = 0; i < e; ++i) v = static_cast<std::size_t>(sat_mul(v, b));
        return v;
    }

    /// Degree ledger for these parameters under an extractor of joint degree D.
    DaextDegrees degrees(unsigned D = 2) const {
        DaextDegrees g;
        const std::uint64_t cap = std::max<std::uint64_t>(1, n);
        auto cp = [&](std::uint64_t v) { return std::min(v, cap); };
        g.cap = cap;
        g.sr = cp(2);  // IP is bilinear in two linear rows
        g.r = cp(affine_srext_degree(l2() * l3p(), static_cast<unsigned>(g.sr), D));
        g.u = cp(compose_degree(D, 1, static_cast<unsigned>(g.r)));
        // h_j = sum_pos enc[pos] * [u1 block == pos]: a selector of index_bits bits of u.
        g.h = cp(1 + index_bits * g.u);
        g.ut = std::max(g.u, g.h);
        g.sn = cp(compose_degree(kSnmJointDegree, 1, static_cast<unsigned>(g.ut)));
        g.yt = cp(ldacb_degrees(D, cb.a, 1, static_cast<unsigned>(g.sn)).out);
        g.w = cp(compose_degree(D, 1, static_cast<unsigned>(g.yt)));
        for (auto ci : c) g.v.push_back(cp(sat_mul(ci, g.w)));
        g.z = g.v.empty() ? 0 : *std::max_element(g.v.begin(), g.v.end());
        return g;
    }

    /// Fills the derived fields. Advice blocks prefer 8 bits with 3-bit
    /// indices; when those indices do not fit in u, k shrinks to the largest
    /// power of two whose blocks fit, and a note records it.
    void finalize(bool choose_k = true, bool choose_c = true) {
        notes.clear();
        const std::size_t mk = snm_half() >= 1 ? snm_half() - 1 : 0;  // m' + k
        const std::size_t enc_len = safe_code_bits(enc);
        if (choose_k) {
            k_blocks = 0;
            const std::size_t preferred = enc_len / 8;
            auto fits = [&](std::size_t k) {
                if (k == 0 || enc_len % k != 0) return false;
                const std::size_t B = enc_len / k;
                if ((B & (B - 1)) != 0) return false;
                const std::size_t w = static_cast<std::size_t>(std::countr_zero(B));
                return k < mk && k * w <= mk - k;
            };
            if (enc_len % 8 == 0 && fits(preferred)) {
                k_blocks = preferred;
            } else {
                for (std::size_t k = std::size_t{1} << 20; k >= 1; k >>= 1)
                    if (fits(k)) {
                        k_blocks = k;
                        break;
                    }
                notes.push_back("advice blocks: 8-bit blocks need k = " + std::to_string(preferred) +
                                " indices of 3 bits, which do not fit in m'; k shrunk to " + std::to_string(k_blocks));
            }
        }
        enc_block = k_blocks ? enc_len / k_blocks : 0;
        index_bits = enc_block && (enc_block & (enc_block - 1)) == 0 ? static_cast<std::size_t>(std::countr_zero(enc_block)) : 0;
        m_prime = mk >= k_blocks ? mk - k_blocks : 0;
        if (choose_c) {
            c.assign(t, 1);
            c_delta = degrees().w;
            for (std::size_t i = t; i-- > 1;) c[i - 1] = c_delta * c[i] + 1;
        } else {
            c_delta = degrees().w;
        }
        n3.clear();
        for (auto ci : c) n3.push_back(static_cast<std::size_t>(sat_mul(m1, ci)));
    }

    static std::size_t safe_code_bits(const CodeSpec& s) {
        try {
            return s.code_bits();
        } catch (const std::exception&) {
            return 0;
        }
    }

    /// Every width constraint (structural) and every inequality the theorem
    /// assumes (theorem). Structural failures name their stage.
    std::vector<Constraint> constraints() const {
        std::vector<Constraint> out;
        auto st = [&](std::string name, bool ok, std::string detail = {}) {
            out.push_back({std::move(name), "structural", ok, std::move(detail)});
        };
        auto th = [&](std::string name, bool ok, std::string detail = {}) {
            out.push_back({std::move(name), "theorem", ok, std::move(detail)});
        };
        auto s = [](auto v) { return std::to_string(v); };
        auto num = [](double v) {
            std::ostringstream os;
            os << v;
            return os.str();
        };
        const bool t_pow2 = t >= 1 && (t & (t - 1)) == 0;
        st("blocks: t is a power of two dividing n", t_pow2 && n % t == 0, "t=" + s(t) + " n=" + s(n));
        st("step 1 (SCond_2): 2^h2 divides n/t", t_pow2 && n % t == 0 && block_bits() % (std::size_t{1} << h2) == 0 &&
                                                      y_bits() >= 1,
           "block=" + s(block_bits()) + " h2=" + s(h2));
        st("step 2 (BasicCond^log t o SCond_3): rows as wide as y_ij",
           n % (std::size_t{1} << (h3 + log_t())) == 0 && xprime_bits() == y_bits(),
           "x' width " + s(xprime_bits()) + " vs y width " + s(y_bits()));
        st("step 3 (IP): 1 <= ip_bits <= min(64, |y|)", ip_bits >= 1 && ip_bits <= 64 && ip_bits <= y_bits(),
           s(ip_bits));
        st("step 5 (LSExt): 1 <= m'", m_prime >= 1, s(m_prime));
        st("sc rows: n / 2^(h1+r) = 2(m'+k+1)",
           n % (std::size_t{1} << (h1 + r)) == 0 && sc_bits() == 2 * (m_prime + k_blocks + 1),
           "sc width " + s(sc_bits()) + ", m'=" + s(m_prime) + " k=" + s(k_blocks));
        st("step 8 (snmExt): sc width in [4, 128]", sc_bits() >= 4 && sc_bits() <= 128, s(sc_bits()));
        const std::size_t enc_len = safe_code_bits(enc);
        st("step 7 (Enc): message length n", enc_len != 0 && enc.message_bits() == n,
           "Enc " + s(enc.message_bits()) + " -> " + s(enc_len));
        st("step 7 (Enc): k blocks of 2^index_bits bits", k_blocks >= 1 && enc_block >= 1 &&
                                                              k_blocks * enc_block == enc_len &&
                                                              (std::size_t{1} << index_bits) == enc_block,
           "k=" + s(k_blocks) + " block=" + s(enc_block));
        st("step 6 (split): |u_i1| = k * index_bits <= m'", u1_bits() <= m_prime,
           s(u1_bits()) + " vs m'=" + s(m_prime));
        st("step 8 (snmExt): 1 <= n1 <= m'+k+1", n1 >= 1 && n1 <= snm_half(), s(n1));
        st("step 9 (ldACB): source x, seed n1, advice log l1'",
           cb.n == n && cb.d == n1 && cb.a == advice_id_bits(),
           "cb.n=" + s(cb.n) + " cb.d=" + s(cb.d) + " cb.a=" + s(cb.a) + " need a=" + s(advice_id_bits()));
        st("step 9 (ldACB): widths consistent", cb.structurally_valid());
        st("step 10 (LSExt): 1 <= n2", cb.n2 >= 1, s(cb.n2));
        st("step 11 (products): one c_i per block", c.size() == t, s(c.size()));
        bool dom = c.size() == t && !c.empty() && c.back() >= 1;
        for (std::size_t i = 0; dom && i + 1 < c.size(); ++i) dom = c[i] > c_delta * c[i + 1];
        st("step 11 (products): c_i > c(delta) c_{i+1}", dom, "c(delta)=" + s(c_delta));
        bool n3ok = n3.size() == c.size();
        for (std::size_t i = 0; n3ok && i < c.size(); ++i) n3ok = n3[i] == m1 * c[i] && n3[i] >= 1;
        st("step 11 (products): |w_i| = m1 c_i", n3ok);
        st("output: 1 <= m1", m1 >= 1, s(m1));
        const std::size_t gk = G.base_dims().first * G.copies;
        st("code step: G has codeword length m1", safe_code_bits(G) == m1, s(safe_code_bits(G)));
        st("code step: beta' m1 is an integer in [1, rows of G]", out_bits() >= 1 && out_bits() <= gk,
           to_string(beta_prime) + " * " + s(m1) + " with " + s(gk) + " rows");

        // Theorem side.
        const double dl = to_double(delta), nn = static_cast<double>(n);
        const std::size_t t_formula = dl > 0 ? std::size_t{1} << static_cast<unsigned>(std::ceil(std::log2(10.0 / dl) - 1e-12)) : 0;
        th("t = 2^ceil(log(10/delta))", t == t_formula, "t=" + s(t) + " formula " + s(t_formula));
        const double mp_max = dl * dl * nn / (300.0 * static_cast<double>(t) * static_cast<double>(l2()) * static_cast<double>(l3p()));
        th("m' <= beta delta^2 n / (300 t l2 l3')", static_cast<double>(m_prime) <= mp_max,
           "m'=" + s(m_prime) + " bound " + num(mp_max));
        th("n1 <= m'/100", 100 * n1 <= m_prime, "n1=" + s(n1));
        th("n2 <= m'/10000", 10000 * cb.n2 <= m_prime, "n2=" + s(cb.n2));
        const std::size_t n3max = n3.empty() ? 0 : *std::max_element(n3.begin(), n3.end());
        th("n3 <= m'/1000000", 1000000 * n3max <= m_prime, "n3=" + s(n3max));
        const double lam_n = static_cast<double>(enc_len);
        const double k_max = n1 ? static_cast<double>(n1) / (20.0 * std::log2(std::max(2.0, lam_n / static_cast<double>(n1)))) : 0;
        th("k <= n1 / (20 log(lambda n / n1))", static_cast<double>(k_blocks) <= k_max,
           "k=" + s(k_blocks) + " bound " + num(k_max));
        th("k log(lambda n / k) <= n1/10", 10 * u1_bits() <= n1, "|u_i1|=" + s(u1_bits()));
        th("Enc blocks of O(1) bits (8)", enc_block == 8, "block=" + s(enc_block));
        th("ldACB theorem inequalities", cb.theorem_valid());
        return out;
    }

    bool structurally_valid() const {
        for (const auto& k : constraints())
            if (k.kind == "structural" && !k.held) return false;
        return true;
    }

    /// Throws on the first structural failure. Theorem-side failures are
    /// reported by constraints() and never fatal: desk-scale widths violate them.
    void validate() const {
        for (const auto& k : constraints())
            if (k.kind == "structural" && !k.held)
                throw std::invalid_argument("daext params: " + k.name + (k.detail.empty() ? "" : " (" + k.detail + ")"));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["n"] = n;
        j["delta"] = to_string(delta);
        j["t"] = t;
        j["d_exp"] = d_exp;
        j["expander_seed"] = expander_seed;
        j["h1"] = h1, j["r"] = r, j["h2"] = h2, j["h3"] = h3;
        j["ip_bits"] = ip_bits;
        j["enc"] = enc.to_json();
        j["n1"] = n1;
        j["cb"] = cb.to_json();
        j["m1"] = m1;
        j["G"] = G.to_json();
        j["beta_prime"] = to_string(beta_prime);
        j["mode"] = to_string(mode);
        j["k_blocks"] = k_blocks;
        j["c"] = c;
        auto& d = j["derived"];
        d["l1p"] = l1p(), d["l2"] = l2(), d["l3p"] = l3p();
        d["y_bits"] = y_bits(), d["sc_bits"] = sc_bits();
        d["m_prime"] = m_prime, d["index_bits"] = index_bits, d["enc_block"] = enc_block;
        d["u1_bits"] = u1_bits(), d["n2"] = cb.n2, d["n3"] = n3, d["c_delta"] = c_delta;
        d["out_bits"] = out_bits();
        d["degrees"] = degrees().to_json();
        j["notes"] = notes;
        auto& cs = j["constraints"] = nlohmann::json::array();
        for (const auto& k : constraints()) cs.push_back({{"name", k.name}, {"kind", k.kind}, {"held", k.held}, {"detail", k.detail}});
        j["structurally_valid"] = structurally_valid();
        return j;
    }

    /// Reads the knobs; k_blocks and c are taken as given when present, and
    /// everything else is re-derived.
    static PipelineParams from_json(const nlohmann::json& j) {
        PipelineParams p;
        p.n = j.at("n");
        p.delta = parse_rational(j.at("delta").get<std::string>());
        p.t = j.at("t");
        p.d_exp = j.at("d_exp");
        p.expander_seed = j.at("expander_seed");
        p.h1 = j.at("h1"), p.r = j.at("r"), p.h2 = j.at("h2"), p.h3 = j.at("h3");
        p.ip_bits = j.at("ip_bits");
        p.enc = CodeSpec::from_json(j.at("enc"));
        p.n1 = j.at("n1");
        p.cb = CBParams::from_json(j.at("cb"));
        p.m1 = j.at("m1");
        p.G = CodeSpec::from_json(j.at("G"));
        p.beta_prime = parse_rational(j.at("beta_prime").get<std::string>());
        p.mode = parse_pipeline_mode(j.value("mode", std::string("structural")));
        const bool has_c = j.contains("c");
        if (has_c) p.c = j["c"].get<std::vector<std::uint64_t>>();
        p.finalize(true, !has_c);
        if (j.contains("k_blocks") && j["k_blocks"].get<std::size_t>() != p.k_blocks) {
            p.k_blocks = j["k_blocks"];
            p.finalize(false, !has_c);
            p.notes.push_back("advice blocks: k set explicitly to " + std::to_string(p.k_blocks));
        }
        return p;
    }

    /// n = 1024 with every stage populated: t = 2, three expander maps, 512
    /// global rows into snmExt over GF(2^64), 9-bit advice into ldACB.
    static PipelineParams structural_toy() {
        PipelineParams p;
        p.n = 1024, p.delta = 1, p.t = 2, p.d_exp = 3, p.expander_seed = 0xda7e;
        p.h1 = 1, p.r = 2, p.h2 = 1, p.h3 = 1;
        p.ip_bits = 16;
        p.enc = {"hamming8", 256};
        p.n1 = 32;
        CBParams& cb = p.cb;
        cb.n = 1024, cb.d = 32, cb.t = 1, cb.a = 9, cb.k = 512;
        cb.m1 = 8, cb.m2 = 16;
        cb.la = {32, 16, 1, 8, 8, 8, 8};
        cb.v = 8;
        cb.nipm.n = 1024, cb.nipm.m = 8, cb.nipm.ell = 18, cb.nipm.t = 1;
        cb.nipm.s.assign(18, 8);
        cb.nipm.r.assign(17, 8);
        cb.n2 = 8;
        p.m1 = 8;
        p.G = {"hamming8", 1};
        p.beta_prime = Rational(1, 2);
        p.mode = PipelineMode::structural;
        p.finalize();
        return p;
    }

    /// n = 12, small enough to tabulate: t = 2, one expander map, a single
    /// global row (sc = x) into snmExt over GF(2^6).
    static PipelineParams statistical_toy() {
        PipelineParams p;
        p.n = 12, p.delta = 1, p.t = 2, p.d_exp = 1, p.expander_seed = 0xda7e;
        p.h1 = 0, p.r = 0, p.h2 = 1, p.h3 = 1;
        p.ip_bits = 3;
        p.enc = {"parity:3", 4};
        p.n1 = 4;
        CBParams& cb = p.cb;
        cb.n = 12, cb.d = 4, cb.t = 1, cb.a = 1, cb.k = 6;
        cb.m1 = 2, cb.m2 = 3;
        cb.la = {4, 3, 1, 2, 2, 2, 2};
        cb.v = 2;
        cb.nipm.n = 12, cb.nipm.m = 2, cb.nipm.ell = 2, cb.nipm.t = 1;
        cb.nipm.s = {2, 2};
        cb.nipm.r = {2};
        cb.n2 = 2;
        p.m1 = 4;
        p.G = {"parity:3", 1};
        p.beta_prime = Rational(1, 2);
        p.mode = PipelineMode::statistical;
        p.finalize();
        return p;
    }

    /// Widths straight from the algorithm's formulas (floors, unit constants),
    /// for reporting which constraints hold at a given n. At desk sizes most
    /// widths are zero and the record is structurally invalid.
    static PipelineParams derive(std::size_t n, const Rational& delta, PipelineMode mode) {
        PipelineParams p;
        p.n = n, p.delta = delta, p.mode = mode, p.d_exp = 3;
        const double dl = to_double(delta);
        if (dl <= 0 || dl > 1) throw std::invalid_argument("derive: delta must be in (0, 1]");
        p.t = std::size_t{1} << static_cast<unsigned>(std::ceil(std::log2(10.0 / dl) - 1e-12));
        p.h1 = p.h2 = p.h3 = 1;
        auto fl = [](double v) { return v <= 0 ? std::size_t{0} : static_cast<std::size_t>(std::floor(v + 1e-9)); };
        const double nn = static_cast<double>(n);
        const std::size_t mp = fl(dl * dl * nn / (300.0 * static_cast<double>(p.t * p.l2() * p.l3p())));
        p.ip_bits = std::max<std::size_t>(1, std::min<std::size_t>(64, mp));
        p.enc = n % 4 == 0 ? CodeSpec{"hamming8", n / 4} : CodeSpec{"identity:" + std::to_string(n), 1};
        p.n1 = mp / 100;
        const double lam_n = static_cast<double>(safe_code_bits(p.enc));
        const std::size_t k = p.n1 ? fl(static_cast<double>(p.n1) / (20.0 * std::log2(std::max(2.0, lam_n / static_cast<double>(p.n1))))) : 0;
        // r = log(n / (m'+k+1)) - 1 - h1, rounded down.
        const double ratio = nn / static_cast<double>(mp + k + 1);
        const double rr = std::floor(std::log2(ratio)) - 1.0 - static_cast<double>(p.h1);
        p.r = rr > 0 ? static_cast<std::size_t>(rr) : 0;
        p.k_blocks = k;
        p.cb = CBParams::derive(n, p.n1, 1, p.advice_id_bits(), dl * nn / 2);
        p.m1 = 0;
        p.G = {"identity:0", 1};
        p.beta_prime = 1;
        p.finalize(false, true);
        p.m_prime = mp;
        return p;
    }
};

// ---------------------------------------------------------------------------
// Advice

/// Bit j of the result is bit u_j of block j of enc_x, where u_j is the
/// integer value of index block j of u1.
inline BitVec advice(const BitVec& u1, const BitVec& enc_x, std::size_t k_blocks) {
    if (k_blocks == 0 || enc_x.size() % k_blocks != 0) throw std::invalid_argument("advice: Enc(x) does not split into k blocks");
    if (u1.size() % k_blocks != 0) throw std::invalid_argument("advice: u_i1 does not split into k blocks");
    const std::size_t B = enc_x.size() / k_blocks, w = u1.size() / k_blocks;
    if (w > 63 || (std::uint64_t{1} << w) != B)
        throw std::invalid_argument("advice: index blocks of " + std::to_string(w) + " bits cannot address blocks of " +
                                    std::to_string(B) + " bits");
    BitVec h(k_blocks);
    for (std::size_t j = 0; j < k_blocks; ++j) {
        const std::uint64_t idx = w ? u1.slice(j * w, w).to_u64() : 0;
        if (enc_x.get(j * B + idx)) h.set(j, true);
    }
    return h;
}

/// Number of positions where block j of a and b differ, per block.
inline std::vector<std::size_t> block_differences(const BitVec& a, const BitVec& b, std::size_t k_blocks) {
    if (a.size() != b.size() || k_blocks == 0 || a.size() % k_blocks != 0)
        throw std::invalid_argument("block_differences: indivisible split");
    const std::size_t B = a.size() / k_blocks;
    const BitVec d = a ^ b;
    std::vector<std::size_t> out(k_blocks);
    for (std::size_t j = 0; j < k_blocks; ++j) out[j] = d.slice(j * B, B).popcount();
    return out;
}

/// Pr over uniform u1 that the advice of two codewords agrees:
/// prod_j (1 - l_j / B).
inline Rational advice_collision_product(const BitVec& a, const BitVec& b, std::size_t k_blocks) {
    const auto diffs = block_differences(a, b, k_blocks);
    const long B = static_cast<long>(a.size() / k_blocks);
    Rational p = 1;
    for (auto l : diffs) p *= Rational(B - static_cast<long>(l), B);
    return p;
}

/// Bound on the same probability for codewords at relative distance >= beta.
inline Rational advice_collision_bound(const Rational& beta, std::size_t k_blocks) {
    Rational p = 1;
    for (std::size_t j = 0; j < k_blocks; ++j) p *= (1 - beta);
    return p;
}

// ---------------------------------------------------------------------------
// Code step

inline BitVec disperser_to_extractor(const BitVec& z, const LinearCode& G, const Rational& beta_prime) {
    if (!G.certified_distance) throw std::invalid_argument("disperser_to_extractor: code is not certified");
    if (G.n_code != z.size()) throw std::invalid_argument("disperser_to_extractor: codeword length must equal |z|");
    const Rational o = beta_prime * Rational(static_cast<long>(z.size()));
    if (boost::multiprecision::denominator(o) != 1) throw std::invalid_argument("disperser_to_extractor: beta' m1 is not an integer");
    const auto rows = static_cast<std::size_t>(boost::multiprecision::numerator(o));
    if (rows > G.k) throw std::invalid_argument("disperser_to_extractor: beta' m1 exceeds the rows of G");
    BitVec out(rows);
    for (std::size_t i = 0; i < rows; ++i)
        if (G.generator.row(i).dot(z)) out.set(i, true);
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

struct BlockTrace {
    BitVec x;                   // x_i
    std::vector<BitVec> y;      // SCond_2(x_i), l2 rows
    std::vector<BitVec> sr;     // IP(x'_{j1}, y_{ij2}), l3' * l2 rows, j1 outer
    BitVec r, u, u1, u2, h, ut;
    std::vector<BitVec> sn;     // l1' rows of n1 bits
    BitVec yt, w, v;
};

struct TraceRecord {
    std::vector<BitVec> sc;      // l1' global rows
    std::vector<BitVec> xprime;  // l3' global rows
    BitVec enc_x;
    std::vector<BlockTrace> blocks;
    BitVec z, o;

    /// Hard width check of every stage against p; names the first mismatch.
    void check_widths(const PipelineParams& p) const {
        auto need = [](const BitVec& v, std::size_t w, const std::string& what) {
            if (v.size() != w)
                throw std::logic_error("trace width mismatch at " + what + ": " + std::to_string(v.size()) + " vs " +
                                       std::to_string(w));
        };
        auto rows = [&](const std::vector<BitVec>& vs, std::size_t count, std::size_t w, const std::string& what) {
            if (vs.size() != count)
                throw std::logic_error("trace row count mismatch at " + what + ": " + std::to_string(vs.size()) + " vs " +
                                       std::to_string(count));
            for (const auto& v : vs) need(v, w, what);
        };
        rows(sc, p.l1p(), p.sc_bits(), "sc");
        rows(xprime, p.l3p(), p.xprime_bits(), "x'");
        need(enc_x, p.k_blocks * p.enc_block, "Enc(x)");
        if (blocks.size() != p.t) throw std::logic_error("trace: wrong block count");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const auto& b = blocks[i];
            const std::string at = " (block " + std::to_string(i + 1) + ")";
            need(b.x, p.block_bits(), "x_i" + at);
            rows(b.y, p.l2(), p.y_bits(), "y_ij" + at);
            rows(b.sr, p.l2() * p.l3p(), p.ip_bits, "sr_i" + at);
            need(b.r, p.ip_bits, "r_i" + at);
            need(b.u, p.m_prime, "u_i" + at);
            need(b.u1, p.u1_bits(), "u_i1" + at);
            need(b.u2, p.m_prime - p.u1_bits(), "u_i2" + at);
            need(b.h, p.k_blocks, "h_i" + at);
            need(b.ut, p.m_prime + p.k_blocks, "u~_i" + at);
            rows(b.sn, p.l1p(), p.n1, "sn_i" + at);
            need(b.yt, p.cb.n2, "y~_i" + at);
            need(b.w, p.n3[i], "w_i" + at);
            need(b.v, p.m1, "v_i" + at);
        }
        need(z, p.m1, "z");
        need(o, p.out_bits(), "o");
    }

    nlohmann::json to_json() const {
        auto vec = [](const std::vector<BitVec>& vs) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& v : vs) a.push_back(v.to_text());
            return a;
        };
        nlohmann::json j;
        j["sc"] = {{"stage", "BasicCond^r o SCond_1(x)"}, {"rows", vec(sc)}};
        j["xprime"] = {{"stage", "BasicCond^log t o SCond_3(x)"}, {"rows", vec(xprime)}};
        j["enc_x"] = enc_x.to_text();
        auto& bs = j["blocks"] = nlohmann::json::array();
        for (const auto& b : blocks) {
            nlohmann::json e;
            e["x_i"] = b.x.to_text();
            e["y"] = {{"stage", "1: SCond_2(x_i)"}, {"rows", vec(b.y)}};
            e["sr"] = {{"stage", "3: IP(x'_j1, y_ij2)"}, {"rows", vec(b.sr)}};
            e["r"] = {{"stage", "4: AffineSRExt(sr_i)"}, {"value", b.r.to_text()}};
            e["u"] = {{"stage", "5: LSExt(x, r_i)"}, {"value", b.u.to_text()}};
            e["u1"] = b.u1.to_text();
            e["u2"] = b.u2.to_text();
            e["h"] = {{"stage", "7: advice from Enc(x)"}, {"value", b.h.to_text()}};
            e["ut"] = b.ut.to_text();
            e["sn"] = {{"stage", "8: snmExt(sc_j, u~_i)"}, {"rows", vec(b.sn)}};
            e["yt"] = {{"stage", "9: XOR_j ldACB(x, sn_ij, j)"}, {"value", b.yt.to_text()}};
            e["w"] = {{"stage", "10: LSExt(x, y~_i)"}, {"value", b.w.to_text()}};
            e["v"] = {{"stage", "11: products of c_i-bit blocks"}, {"value", b.v.to_text()}};
            bs.push_back(std::move(e));
        }
        j["z"] = z.to_text();
        j["o"] = o.to_text();
        return j;
    }
};

struct CoreResult {
    BitVec z;
    TraceRecord trace;  // filled only when requested
};

/// Dimension expanders for every half-width the three condensers visit.
/// Maps are random invertible matrices from make_rng(seed, width). Widths up
/// to 8 are certified exhaustively, up to 64 by 256 sampled subspaces, and
/// wider ones carry no certificate.
inline ExpanderFamily pipeline_expanders(const PipelineParams& p) {
    std::vector<std::size_t> halves;
    auto visit = [&](std::size_t w, std::size_t steps) {
        for (std::size_t s = 0; s < steps && w >= 2; ++s, w /= 2) halves.push_back(w / 2);
    };
    visit(p.n, p.h1 + p.r);
    visit(p.block_bits(), p.h2);
    visit(p.n, p.h3 + p.log_t());
    std::sort(halves.begin(), halves.end());
    halves.erase(std::unique(halves.begin(), halves.end()), halves.end());
    ExpanderFamily fam;
    for (auto w : halves) {
        Rng rng = make_rng(p.expander_seed, w);
        DimExpander e;
        e.n = w;
        for (std::size_t i = 0; i < p.d_exp; ++i) e.maps.push_back(GF2Matrix::random_invertible(w, rng));
        if (w <= 8) {
            e.alpha = verify_dimension_expander(e.maps, 0, w).certified_alpha;
            e.certificate = {Certificate::Kind::exhaustive, 0};
        } else if (w <= 64) {
            e.alpha = sample_dimension_expander(e.maps, 0, w, 256, p.expander_seed).certified_alpha;
            e.certificate = {Certificate::Kind::sampled, 256};
        } else {
            e.alpha = 0;
            e.certificate = {Certificate::Kind::none, 0};
        }
        fam.emplace(w, std::move(e));
    }
    return fam;
}

/// A validated parameter set with its expanders and codes built.
class Pipeline {
public:
    explicit Pipeline(PipelineParams p, ExtractorPtr E = default_extractor())
        : p_(std::move(p)), E_(std::move(E)) {
        p_.validate();
        fam_ = pipeline_expanders(p_);
        enc_ = p_.enc.build();
        G_ = p_.G.build();
        if (!enc_.certified_distance || !G_.certified_distance) throw std::invalid_argument("Pipeline: uncertified code");
        snm_idx_ = snm_default_indices(p_.n1);
    }

    const PipelineParams& params() const { return p_; }
    const ExpanderFamily& expanders() const { return fam_; }
    const LinearCode& enc() const { return enc_; }
    const LinearCode& G() const { return G_; }
    const ExtractorProfile& extractor() const { return *E_; }

    /// Steps 1-11 per block and the XOR combine. Blocks run on `workers` threads.
    CoreResult core(const BitVec& x, bool keep_trace = false, unsigned workers = 1) const {
        const auto& p = p_;
        const auto& E = *E_;
        if (x.size() != p.n) throw std::invalid_argument("daext: input must have n bits");
        const auto sc = scond_eval(fam_, x, p.h1 + p.r);
        const auto xp = scond_eval(fam_, x, p.h3 + p.log_t());
        const BitVec enc_x = enc_.encode(x);
        std::vector<BlockTrace> blocks(p.t);
        parallel_for_ranges(p.t, workers, [&](std::uint64_t b, std::uint64_t e, unsigned) {
            for (std::uint64_t i = b; i < e; ++i) blocks[i] = run_block(x, i, sc, xp, enc_x, E);
        });
        CoreResult res;
        res.z = BitVec(p.m1);
        for (const auto& b : blocks) res.z ^= b.v;
        if (keep_trace) {
            res.trace.sc = sc;
            res.trace.xprime = xp;
            res.trace.enc_x = enc_x;
            res.trace.blocks = std::move(blocks);
            res.trace.z = res.z;
            res.trace.o = disperser_to_extractor(res.z, G_, p.beta_prime);
            res.trace.check_widths(p);
        }
        return res;
    }

    BitVec run(const BitVec& x, unsigned workers = 1) const {
        return disperser_to_extractor(core(x, false, workers).z, G_, p_.beta_prime);
    }

    /// Output of run() on every input, as integers; n <= 24.
    std::vector<std::uint64_t> table(unsigned workers = 1) const {
        if (p_.n > 24 || p_.out_bits() > 64) throw BudgetExceeded("Pipeline::table: n above 24");
        std::vector<std::uint64_t> out(pow2(static_cast<unsigned>(p_.n)));
        parallel_for_ranges(out.size(), workers, [&](std::uint64_t b, std::uint64_t e, unsigned) {
            for (std::uint64_t x = b; x < e; ++x) out[x] = run(BitVec::from_u64(x, p_.n)).to_u64();
        });
        return out;
    }

private:
    BlockTrace run_block(const BitVec& x, std::size_t i, const std::vector<BitVec>& sc, const std::vector<BitVec>& xp,
                         const BitVec& enc_x, const ExtractorProfile& E) const {
        const auto& p = p_;
        BlockTrace b;
        b.x = x.slice(i * p.block_bits(), p.block_bits());
        b.y = scond_eval(fam_, b.x, p.h2);
        b.sr.reserve(xp.size() * b.y.size());
        for (const auto& a : xp)
            for (const auto& y : b.y) b.sr.push_back(ip(a, y, p.ip_bits));
        b.r = affine_srext(b.sr);
        b.u = E.extract(x, b.r, p.m_prime);
        b.u1 = b.u.prefix(p.u1_bits());
        b.u2 = b.u.slice(p.u1_bits(), p.m_prime - p.u1_bits());
        b.h = advice(b.u1, enc_x, p.k_blocks);
        b.ut = b.u.concat(b.h);
        b.yt = BitVec(p.cb.n2);
        b.sn.reserve(sc.size());
        for (std::size_t j = 0; j < sc.size(); ++j) {
            b.sn.push_back(snm_ext(sc[j], b.ut, snm_idx_));
            b.yt ^= ldacb(x, b.sn.back(), BitVec::from_u64(j, p.cb.a), p.cb, E);
        }
        b.w = E.extract(x, b.yt, p.n3[i]);
        const std::size_t ci = static_cast<std::size_t>(p.c[i]);
        b.v = BitVec(p.m1);
        for (std::size_t j = 0; j < p.m1; ++j)
            if (b.w.slice(j * ci, ci).popcount() == ci) b.v.set(j, true);
        return b;
    }

    PipelineParams p_;
    ExtractorPtr E_;
    ExpanderFamily fam_;
    LinearCode enc_, G_;
    std::vector<std::size_t> snm_idx_;
};

inline CoreResult daext_core(const Pipeline& P, const BitVec& x, bool keep_trace = true) {
    return P.core(x, keep_trace);
}

inline BitVec daext(const Pipeline& P, const BitVec& x) { return P.run(x); }

}  // namespace gf2lab
