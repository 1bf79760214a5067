#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bitvec.hpp"
#include "xprims.hpp"

namespace gf2lab {

// Low-degree correlation breaking: look-ahead extraction, the independence
// preserving merger, flip-flop assignment and the advice correlation breaker.
// Slice(v, w) is the first w bits of v throughout.

using ExtractorPtr = std::shared_ptr<const ExtractorProfile>;

/// laExt(x, y) with x of n bits and y of d bits.
struct LaWidths {
    std::size_t n = 0, d = 0, t = 0;
    std::size_t s = 0;   // Slice(y, s)
    std::size_t m1 = 0;  // |r~0|
    std::size_t m2 = 0;  // |s1|
    std::size_t m = 0;   // |r0| = |r1|
};

/// NIPM_ell over x of n bits and ell rows of m bits. s[i] is |s_{i+1}|, r[i] is |r_{i+1}|.
struct NipmWidths {
    std::size_t n = 0, m = 0, ell = 0, t = 0;
    std::vector<std::size_t> s;  // ell entries
    std::vector<std::size_t> r;  // ell - 1 entries
    std::size_t out() const { return s.empty() ? 0 : s.back(); }
};

/// Constants the construction leaves unspecified. Defaults keep the derived
/// widths integral at the sizes used in the test suite.
struct CBConstants {
    double C = 1.0;
    double C0 = 1.0;
    double C1 = 1.0;
    double eta = 0.5;
    double beta = 1.0;
    std::string provenance = "unspecified constant: placeholder default";
};

struct Constraint {
    std::string name;
    std::string kind;  // "structural" or "theorem"
    bool held = false;
    std::string detail;
};

struct CBParams {
    std::size_t n = 0, d = 0, t = 1, a = 1;
    double k = 0;             // entropy assumed for x
    double log_inv_eps = 10;  // target log2(1/eps) used only in theorem-side checks
    std::size_t m1 = 0;       // Slice(y, m1)
    std::size_t m2 = 0;       // |q|
    LaWidths la;              // laExt(y, q)
    std::size_t v = 0;        // laExt output width
    NipmWidths nipm;          // NIPM_{2a}(x, v_1..v_2a)
    std::size_t n2 = 0;       // output width
    CBConstants constants;
    bool structural_mode = true;

    /// Widths from the algorithms' formulas, every division rounded down.
    static CBParams derive(std::size_t n, std::size_t d, std::size_t t, std::size_t a, double k,
                           const CBConstants& c = {}, double log_inv_eps = 10) {
        CBParams p;
        p.n = n, p.d = d, p.t = t, p.a = a, p.k = k, p.constants = c, p.log_inv_eps = log_inv_eps;
        const double b = c.beta;
        auto fl = [](double v) { return v <= 0 ? std::size_t{0} : static_cast<std::size_t>(std::floor(v + 1e-9)); };
        p.m1 = fl(static_cast<double>(d) / (4.0 + 2.0 * t));
        p.m2 = fl(b * k * d / ((8.0 + 4.0 * t) * n));
        // laExt runs on source y (entropy d/3) with seed q.
        p.la = derive_la(d, p.m2, t, static_cast<double>(d) / 3.0, b);
        p.v = p.la.m;
        p.nipm = derive_nipm(n, p.v, 2 * a, t, k / 2.0, b);
        p.n2 = p.nipm.out();
        return p;
    }

    static LaWidths derive_la(std::size_t n, std::size_t d, std::size_t t, double k, double beta) {
        auto fl = [](double v) { return v <= 0 ? std::size_t{0} : static_cast<std::size_t>(std::floor(v + 1e-9)); };
        const double tt = static_cast<double>(t), nn = static_cast<double>(n), dd = static_cast<double>(d);
        LaWidths w;
        w.n = n, w.d = d, w.t = t;
        w.s = fl(dd / (2 + 2 * tt));
        w.m1 = fl(beta * k * dd / ((2 * tt + 2) * nn));
        w.m2 = fl(beta * beta * k * dd / (4 * (tt + 1) * nn));
        w.m = fl(beta * beta * beta * k * k * dd / ((8 + 8 * tt) * nn * nn));
        return w;
    }

    static NipmWidths derive_nipm(std::size_t n, std::size_t m, std::size_t ell, std::size_t t, double k, double beta) {
        auto fl = [](double v) { return v <= 0 ? std::size_t{0} : static_cast<std::size_t>(std::floor(v + 1e-9)); };
        NipmWidths w;
        w.n = n, w.m = m, w.ell = ell, w.t = t;
        const double dw = k / (2.0 * static_cast<double>(n)), dq = 0.5;
        w.s.push_back(fl(static_cast<double>(m) / (3.0 + 3.0 * t)));
        for (std::size_t i = 0; i + 1 < ell; ++i) {
            w.r.push_back(fl(dw * beta * static_cast<double>(w.s.back())));
            w.s.push_back(fl(dq * beta * static_cast<double>(w.r.back())));
        }
        return w;
    }

    /// Every slicing and width constraint, then the theorem-side inequalities.
    std::vector<Constraint> constraints() const {
        std::vector<Constraint> out;
        auto st = [&](std::string name, bool ok, std::string detail = {}) {
            out.push_back({std::move(name), "structural", ok, std::move(detail)});
        };
        auto th = [&](std::string name, bool ok, std::string detail = {}) {
            out.push_back({std::move(name), "theorem", ok, std::move(detail)});
        };
        auto num = [](double v) {
            std::ostringstream os;
            os << v;
            return os.str();
        };
        st("1 <= m1 <= d", m1 >= 1 && m1 <= d, std::to_string(m1) + " vs d=" + std::to_string(d));
        st("m2 >= 1", m2 >= 1, std::to_string(m2));
        st("laExt source is y", la.n == d && la.d == m2, "la.n=" + std::to_string(la.n) + " la.d=" + std::to_string(la.d));
        st("1 <= la.s <= la.d", la.s >= 1 && la.s <= la.d, std::to_string(la.s));
        st("la.m1, la.m2 >= 1", la.m1 >= 1 && la.m2 >= 1, std::to_string(la.m1) + "," + std::to_string(la.m2));
        st("1 <= la.m <= la.m1", la.m >= 1 && la.m <= la.m1, std::to_string(la.m));
        st("v = la.m", v == la.m, std::to_string(v));
        st("nipm rows: 2a rows of width v", nipm.ell == 2 * a && nipm.m == v && nipm.n == n,
           "ell=" + std::to_string(nipm.ell) + " m=" + std::to_string(nipm.m));
        st("nipm schedule lengths", nipm.s.size() == nipm.ell && nipm.r.size() + 1 == nipm.ell);
        for (std::size_t i = 0; i < nipm.s.size(); ++i)
            st("nipm s_" + std::to_string(i + 1) + " >= 1", nipm.s[i] >= 1, std::to_string(nipm.s[i]));
        for (std::size_t i = 0; i < nipm.r.size(); ++i)
            st("nipm r_" + std::to_string(i + 1) + " >= 1", nipm.r[i] >= 1, std::to_string(nipm.r[i]));
        st("nipm s_1 <= v", !nipm.s.empty() && nipm.s[0] <= v);
        st("n2 = nipm output", n2 == nipm.out() && n2 >= 1, std::to_string(n2));
        st("a >= 1", a >= 1);

        const double tt = static_cast<double>(t), nn = static_cast<double>(n), dd = static_cast<double>(d);
        const double L = log_inv_eps, C = constants.C, A = static_cast<double>(a), m = static_cast<double>(n2);
        const double e = 4 * A - 3;
        const double k_need = C * std::max(std::pow((tt + 1) * (tt + 1) * L * std::pow(nn, 4 * A - 1) / (m * m * m), 1.0 / e),
                                           (tt + 1) * std::sqrt(nn));
        th("ldACB: k >= C max{((t+1)^2 L n^(4a-1)/m^3)^(1/(4a-3)), (t+1) sqrt n}", k >= k_need,
           "k=" + num(k) + " need " + num(k_need));
        const double d_need = C * (tt + 1) * (tt + 1) *
                              std::max((tt + 1) * nn * std::sqrt(nn) / k,
                                       std::cbrt((tt + 1) * L * std::pow(nn, 4 * A - 1) / std::pow(k, e)));
        th("ldACB: d >= C (t+1)^2 max{(t+1) n sqrt n / k, ((t+1) L n^(4a-1)/k^(4a-3))^(1/3)}", dd >= d_need,
           "d=" + num(dd) + " need " + num(d_need));
        th("entropy after q: k >= k/2 + (t+2) m2", k >= k / 2 + (tt + 2) * static_cast<double>(m2));
        th("seed entropy: d - (t+1)(m1+m2) >= d/3", dd - (tt + 1) * static_cast<double>(m1 + m2) >= dd / 3);
        th("entropy before NIPM: k - (2+t) m2 - 2a v >= k/2",
           k - (2 + tt) * static_cast<double>(m2) - 2 * A * static_cast<double>(v) >= k / 2);
        th("laExt seed slicing: (t+1) s <= d_la / 2", (tt + 1) * static_cast<double>(la.s) <= static_cast<double>(la.d) / 2);
        return out;
    }

    bool structurally_valid() const {
        for (const auto& c : constraints())
            if (c.kind == "structural" && !c.held) return false;
        return true;
    }

    bool theorem_valid() const {
        for (const auto& c : constraints())
            if (c.kind == "theorem" && !c.held) return false;
        return true;
    }

    /// Throws on a structural failure, and on a theorem-side failure unless structural_mode.
    void validate() const {
        for (const auto& c : constraints()) {
            if (c.held) continue;
            if (c.kind == "structural" || !structural_mode)
                throw std::invalid_argument("CBParams: " + c.kind + " constraint failed: " + c.name +
                                            (c.detail.empty() ? "" : " (" + c.detail + ")"));
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["n"] = n, j["d"] = d, j["t"] = t, j["a"] = a, j["k"] = k, j["log_inv_eps"] = log_inv_eps;
        j["m1"] = m1, j["m2"] = m2, j["v"] = v, j["n2"] = n2;
        j["la"] = {{"n", la.n}, {"d", la.d}, {"t", la.t}, {"s", la.s}, {"m1", la.m1}, {"m2", la.m2}, {"m", la.m}};
        j["nipm"] = {{"n", nipm.n}, {"m", nipm.m}, {"ell", nipm.ell}, {"t", nipm.t}, {"s", nipm.s}, {"r", nipm.r}};
        j["constants"] = {{"C", constants.C},       {"C0", constants.C0}, {"C1", constants.C1},
                          {"eta", constants.eta},   {"beta", constants.beta},
                          {"provenance", constants.provenance}};
        j["structural_mode"] = structural_mode;
        return j;
    }

    static CBParams from_json(const nlohmann::json& j) {
        CBParams p;
        p.n = j.at("n"), p.d = j.at("d"), p.t = j.at("t"), p.a = j.at("a"), p.k = j.at("k");
        p.log_inv_eps = j.value("log_inv_eps", 10.0);
        p.m1 = j.at("m1"), p.m2 = j.at("m2"), p.v = j.at("v"), p.n2 = j.at("n2");
        const auto& l = j.at("la");
        p.la = {l.at("n"), l.at("d"), l.at("t"), l.at("s"), l.at("m1"), l.at("m2"), l.at("m")};
        const auto& q = j.at("nipm");
        p.nipm.n = q.at("n"), p.nipm.m = q.at("m"), p.nipm.ell = q.at("ell"), p.nipm.t = q.at("t");
        p.nipm.s = q.at("s").get<std::vector<std::size_t>>();
        p.nipm.r = q.at("r").get<std::vector<std::size_t>>();
        if (j.contains("constants")) {
            const auto& c = j["constants"];
            p.constants.C = c.value("C", 1.0), p.constants.C0 = c.value("C0", 1.0), p.constants.C1 = c.value("C1", 1.0);
            p.constants.eta = c.value("eta", 0.5), p.constants.beta = c.value("beta", 1.0);
            p.constants.provenance = c.value("provenance", p.constants.provenance);
        }
        p.structural_mode = j.value("structural_mode", true);
        return p;
    }

    /// A hand-sized configuration: n = d = 8, t = a = 1, two output bits.
    static CBParams toy(std::size_t n = 8, std::size_t d = 8) {
        CBParams p;
        p.n = n, p.d = d, p.t = 1, p.a = 1, p.k = static_cast<double>(n);
        p.m1 = 2, p.m2 = 4;
        p.la = {d, 4, 1, 2, 3, 3, 2};
        p.v = 2;
        p.nipm.n = n, p.nipm.m = 2, p.nipm.ell = 2, p.nipm.t = 1;
        p.nipm.s = {2, 2};
        p.nipm.r = {2};
        p.n2 = 2;
        return p;
    }
};

inline void check_width(const BitVec& v, std::size_t w, const char* what) {
    if (v.size() != w) throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(w) + " bits, got " +
                                                   std::to_string(v.size()));
}

inline std::pair<BitVec, BitVec> la_ext(const BitVec& x, const BitVec& y, const LaWidths& w,
                                        const ExtractorProfile& E = *default_extractor()) {
    check_width(x, w.n, "la_ext x");
    check_width(y, w.d, "la_ext y");
    if (w.s == 0 || w.s > w.d || w.m == 0 || w.m > w.m1 || w.m2 == 0)
        throw std::invalid_argument("la_ext: inconsistent widths");
    const BitVec s0 = y.prefix(w.s);
    const BitVec r0t = E.extract(x, s0, w.m1);
    const BitVec s1 = E.extract(y, r0t, w.m2);
    const BitVec r1 = E.extract(x, s1, w.m);
    return {r0t.prefix(r1.size()), r1};
}

inline BitVec nipm(const BitVec& x, const std::vector<BitVec>& v, const NipmWidths& w,
                   const ExtractorProfile& E = *default_extractor()) {
    check_width(x, w.n, "nipm x");
    if (w.ell == 0 || v.size() != w.ell) throw std::invalid_argument("nipm: need ell >= 1 rows");
    for (const auto& row : v) check_width(row, w.m, "nipm row");
    if (w.s.size() != w.ell || w.r.size() + 1 != w.ell) throw std::invalid_argument("nipm: schedule length");
    for (std::size_t i = 0; i < w.s.size(); ++i)
        if (w.s[i] == 0) throw std::invalid_argument("nipm: width schedule hits zero at s_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < w.r.size(); ++i)
        if (w.r[i] == 0) throw std::invalid_argument("nipm: width schedule hits zero at r_" + std::to_string(i + 1));
    if (w.s[0] > w.m) throw std::invalid_argument("nipm: s_1 wider than a row");
    BitVec s = v[0].prefix(w.s[0]);
    for (std::size_t i = 0; i + 1 < w.ell; ++i) {
        const BitVec r = E.extract(x, s, w.r[i]);
        s = E.extract(v[i + 1], r, w.s[i + 1]);
    }
    return s;
}

inline std::vector<BitVec> ff_assign(const BitVec& r0, const BitVec& r1, const BitVec& alpha) {
    std::vector<BitVec> out;
    out.reserve(2 * alpha.size());
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        out.push_back(alpha.get(j) ? r1 : r0);
        out.push_back(alpha.get(j) ? r0 : r1);
    }
    return out;
}

inline BitVec ldacb(const BitVec& x, const BitVec& y, const BitVec& id, const CBParams& p,
                    const ExtractorProfile& E = *default_extractor()) {
    check_width(x, p.n, "ldacb x");
    check_width(y, p.d, "ldacb y");
    check_width(id, p.a, "ldacb id");
    const BitVec s = y.prefix(p.m1);
    const BitVec q = E.extract(x, s, p.m2);
    const auto [r0, r1] = la_ext(y, q, p.la, E);
    return nipm(x, ff_assign(r0, r1, id), p.nipm, E);
}

// ---------------------------------------------------------------------------
// Degree calculus. Every extractor call is linear in its source, so an output
// bit has degree source + (D - 1) * seed for a profile of joint degree D.

struct LaDegrees {
    unsigned r0 = 0, s1 = 0, r1 = 0;
};

inline LaDegrees la_degrees(unsigned D, unsigned dx = 1, unsigned dy = 1) {
    LaDegrees g;
    g.r0 = compose_degree(D, dx, dy);
    g.s1 = compose_degree(D, dy, g.r0);
    g.r1 = compose_degree(D, dx, g.s1);
    return g;
}

/// Degree of s_ell given x of degree dx and rows of degree dv.
inline unsigned nipm_degree(unsigned D, std::size_t ell, unsigned dx, unsigned dv) {
    unsigned s = dv;
    for (std::size_t i = 0; i + 1 < ell; ++i) s = compose_degree(D, dv, compose_degree(D, dx, s));
    return s;
}

struct CBDegrees {
    unsigned q = 0;
    LaDegrees la;
    unsigned rows = 0;
    unsigned out = 0;
};

inline CBDegrees ldacb_degrees(unsigned D, std::size_t a, unsigned dx = 1, unsigned dy = 1) {
    CBDegrees g;
    g.q = compose_degree(D, dx, dy);
    g.la = la_degrees(D, dy, g.q);
    g.rows = std::max(g.la.r0, g.la.r1);
    g.out = nipm_degree(D, 2 * a, dx, g.rows);
    return g;
}

}  // namespace gf2lab
