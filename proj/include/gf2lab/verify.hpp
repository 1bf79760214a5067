#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "bitvec.hpp"
#include "common.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "subspace.hpp"

namespace gf2lab {

// Exhaustive and sampled measurement of extractor properties over affine
// sources, for functions given as truth tables.

/// f : F2^n -> F2^m as a table; table[x] holds f(x) with bit j = output bit j.
struct BoolFn {
    std::size_t n = 0, m = 1;
    std::vector<std::uint32_t> table;
    std::string name;

    BoolFn() = default;
    BoolFn(std::size_t n_, std::size_t m_, std::vector<std::uint32_t> t, std::string nm = {})
        : n(n_), m(m_), table(std::move(t)), name(std::move(nm)) {
        if (n > 24) throw std::invalid_argument("BoolFn: n above 24");
        if (m < 1 || m > 16) throw std::invalid_argument("BoolFn: m must be in [1, 16]");
        if (table.size() != (std::size_t{1} << n)) throw std::invalid_argument("BoolFn: table size must be 2^n");
        for (auto v : table)
            if (v >> m) throw std::invalid_argument("BoolFn: value wider than m bits");
    }

    template <class F>
    static BoolFn from(std::size_t n, std::size_t m, F&& f, std::string nm = {}) {
        if (n > 24) throw std::invalid_argument("BoolFn: n above 24");
        std::vector<std::uint32_t> t(std::size_t{1} << n);
        for (std::uint64_t x = 0; x < t.size(); ++x) t[x] = static_cast<std::uint32_t>(f(x));
        return BoolFn(n, m, std::move(t), std::move(nm));
    }

    std::uint32_t operator()(std::uint64_t x) const { return table[x]; }

    /// "n m" header then the values in hex, one per line.
    std::string to_text() const {
        std::ostringstream os;
        os << n << ' ' << m << '\n';
        for (auto v : table) os << std::hex << v << '\n';
        return os.str();
    }

    static BoolFn from_text(const std::string& text, std::string nm = "file") {
        std::istringstream is(text);
        std::size_t n, m;
        if (!(is >> n >> m)) throw std::invalid_argument("BoolFn::from_text: bad header");
        if (n > 24) throw std::invalid_argument("BoolFn::from_text: n above 24");
        std::vector<std::uint32_t> t(std::size_t{1} << n);
        for (auto& v : t)
            if (!(is >> std::hex >> v)) throw std::invalid_argument("BoolFn::from_text: truncated table");
        return BoolFn(n, m, std::move(t), std::move(nm));
    }
};

/// Built-in functions: ip (n even), parity, const0, const1, bit0, and, identity.
inline BoolFn builtin_fn(const std::string& name, std::size_t n) {
    if (n == 0 || n > 24) throw std::invalid_argument("builtin_fn: n must be in [1, 24]");
    if (name == "ip") {
        if (n % 2) throw std::invalid_argument("builtin_fn: ip needs even n");
        const std::uint64_t lo = (std::uint64_t{1} << (n / 2)) - 1;
        return BoolFn::from(n, 1, [&](std::uint64_t x) { return std::popcount((x & lo) & (x >> (n / 2))) & 1; }, name);
    }
    if (name == "parity") return BoolFn::from(n, 1, [](std::uint64_t x) { return std::popcount(x) & 1; }, name);
    if (name == "const0") return BoolFn::from(n, 1, [](std::uint64_t) { return 0; }, name);
    if (name == "const1") return BoolFn::from(n, 1, [](std::uint64_t) { return 1; }, name);
    if (name == "bit0") return BoolFn::from(n, 1, [](std::uint64_t x) { return x & 1; }, name);
    if (name == "and") {
        const std::uint64_t all = (std::uint64_t{1} << n) - 1;
        return BoolFn::from(n, 1, [&](std::uint64_t x) { return x == all ? 1 : 0; }, name);
    }
    if (name == "identity") {
        if (n > 16) throw std::invalid_argument("builtin_fn: identity needs n <= 16");
        return BoolFn::from(n, n, [](std::uint64_t x) { return x; }, name);
    }
    throw std::invalid_argument("builtin_fn: unknown function " + name);
}

// ---------------------------------------------------------------------------
// Reports

struct VerifyMode {
    enum class Kind { exhaustive, sampled } kind = Kind::exhaustive;
    std::uint64_t tuples = 0;  // sampled: random (X, a) tuples; 0 = every tuple
    std::uint64_t points = 0;  // sampled: points per tuple
    std::uint64_t seed = 0;
    double confidence = 0.99;

    static VerifyMode exhaustive() { return {}; }
    static VerifyMode sampled(std::uint64_t tuples, std::uint64_t points, std::uint64_t seed) {
        return {Kind::sampled, tuples, points, seed, 0.99};
    }
    std::string name() const { return kind == Kind::exhaustive ? "exhaustive" : "sampled"; }
};

struct Witness {
    std::vector<std::uint64_t> basis;  // rows of the linear part, canonical echelon form
    std::uint64_t subspace_index = 0;  // position in the canonical enumeration
    std::uint64_t shift = 0;           // coset representative (zero on pivot columns)
    std::optional<std::uint64_t> a;    // direction, for directional properties
    std::optional<std::uint64_t> b;    // conditioning value, for disperser failures

    nlohmann::json to_json(std::size_t n) const {
        nlohmann::json j;
        auto& rows = j["basis"] = nlohmann::json::array();
        for (auto r : basis) rows.push_back(BitVec::from_u64(r, n).to_text());
        j["subspace_index"] = subspace_index;
        j["shift"] = BitVec::from_u64(shift, n).to_text();
        if (a) j["a"] = BitVec::from_u64(*a, n).to_text();
        if (b) j["b"] = *b;
        return j;
    }
};

struct VerifyReport {
    std::string property;
    nlohmann::json parameters;
    std::string mode = "exhaustive";
    std::optional<Rational> exact;   // exhaustive
    double estimate = 0, radius = 0; // sampled
    double confidence = 0;
    bool held = true;                // property-specific pass flag
    std::optional<Witness> witness;
    std::uint64_t tuples = 0;        // (X, a) or X tuples examined
    std::uint64_t evaluations = 0;   // table lookups
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["property"] = property;
        j["parameters"] = parameters;
        j["mode"] = mode;
        if (exact) {
            j["value"] = to_string(*exact);
            j["value_double"] = to_double(*exact);
        } else {
            j["estimate"] = estimate;
            j["radius"] = radius;
            j["confidence"] = confidence;
        }
        j["held"] = held;
        if (witness) j["witness"] = witness->to_json(parameters.value("n", std::size_t{0}));
        j["budget"] = {{"tuples", tuples}, {"evaluations", evaluations}};
        if (!extra.empty()) j["extra"] = extra;
        return j;
    }
};

namespace detail {

/// Coset id of every x in F2^n for the subspace with echelon rows `basis`
/// (pivot = lowest set bit, pivot columns clear in other rows): x is reduced
/// to zero on pivots and its non-pivot bits are packed in column order.
inline void coset_ids(const std::vector<std::uint64_t>& basis, std::size_t n, std::vector<std::uint32_t>& cid,
                      std::vector<std::uint64_t>& rep) {
    std::uint64_t piv = 0;
    for (auto r : basis) piv |= r & (~r + 1);
    std::vector<unsigned> free_cols;
    for (unsigned c = 0; c < n; ++c)
        if (!((piv >> c) & 1)) free_cols.push_back(c);
    const std::size_t N = std::size_t{1} << n;
    cid.resize(N);
    rep.assign(std::size_t{1} << free_cols.size(), 0);
    for (std::uint64_t x = 0; x < N; ++x) {
        std::uint64_t y = x;
        for (auto r : basis)
            if (y & r & (~r + 1)) y ^= r;
        std::uint32_t id = 0;
        for (std::size_t i = 0; i < free_cols.size(); ++i)
            if ((y >> free_cols[i]) & 1) id |= 1u << i;
        cid[x] = id;
        rep[id] = y;
    }
}

/// Best-so-far with lexicographic tie-breaking on (subspace, shift, a).
struct Best {
    std::int64_t num = -1;  // value numerator over a fixed denominator
    std::uint64_t idx = 0, shift = 0, a = 0, b = 0;
    std::vector<std::uint64_t> basis;
    bool set = false;

    void offer(std::int64_t v, std::uint64_t i, std::uint64_t s, std::uint64_t av, const std::vector<std::uint64_t>& B,
               std::uint64_t bv = 0) {
        if (!set || v > num || (v == num && std::tie(i, s, av) < std::tie(idx, shift, a))) {
            num = v, idx = i, shift = s, a = av, b = bv, basis = B, set = true;
        }
    }
    void merge(const Best& o) {
        if (o.set) offer(o.num, o.idx, o.shift, o.a, o.basis, o.b);
    }
};

inline void check_dims(const BoolFn& f, std::size_t k) {
    if (k > f.n) throw std::invalid_argument("verify: k > n");
    if (f.n > 20) throw BudgetExceeded("verify: exhaustive enumeration needs n <= 20");
}

inline std::uint64_t subspace_count(std::size_t n, std::size_t k) {
    const BigInt c = gaussian_binomial(static_cast<unsigned>(n), static_cast<unsigned>(k));
    return c > BigInt(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(c);
}

/// Sum over cosets b of f(x+a) of |c(z,b) 2^m - c(b)|, i.e. the conditional
/// distance numerator over 2^{k+m+1}. counts is indexed [z * 2^m + b].
inline std::int64_t joint_l1(const std::uint32_t* counts, std::size_t m) {
    const std::size_t M = std::size_t{1} << m;
    std::int64_t total = 0;
    for (std::size_t b = 0; b < M; ++b) {
        std::int64_t cb = 0;
        for (std::size_t z = 0; z < M; ++z) cb += counts[z * M + b];
        if (cb == 0) continue;
        for (std::size_t z = 0; z < M; ++z)
            total += std::llabs(static_cast<std::int64_t>(counts[z * M + b]) * static_cast<std::int64_t>(M) - cb);
    }
    return total;
}

/// Hoeffding radius for the mean of +-1 variables, failure probability alpha.
inline double pm1_radius(std::uint64_t N, double alpha) { return std::sqrt(2.0 * std::log(2.0 / alpha) / static_cast<double>(N)); }

/// Radius for a statistical-distance functional of an empirical distribution
/// over K cells: P(|p^ - p|_1 >= e) <= 2^K exp(-N e^2 / 2).
inline double l1_radius(std::uint64_t N, std::size_t K, double alpha) {
    return std::sqrt(2.0 * (static_cast<double>(K) * std::log(2.0) + std::log(1.0 / alpha)) / static_cast<double>(N));
}

/// A uniformly random k-dim subspace in canonical echelon form (pivot =
/// lowest set bit, pivot columns clear in the other rows).
inline std::vector<std::uint64_t> random_subspace(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::uint64_t> rows;
    while (rows.size() < k) {
        std::vector<std::uint64_t> cand = rows;
        cand.push_back(random_bits(rng, static_cast<unsigned>(n)));
        if (GF2Matrix::rank_u64(cand) == cand.size()) rows = std::move(cand);
    }
    std::vector<std::uint64_t> out;
    for (unsigned c = 0; c < n; ++c) {
        const std::uint64_t bit = std::uint64_t{1} << c;
        auto it = std::find_if(rows.begin(), rows.end(), [&](std::uint64_t r) { return r & bit; });
        if (it == rows.end()) continue;
        const std::uint64_t piv = *it;
        rows.erase(it);
        for (auto& r : rows)
            if (r & bit) r ^= piv;
        for (auto& r : out)
            if (r & bit) r ^= piv;
        out.push_back(piv);
    }
    return out;
}

inline std::uint64_t random_point(const std::vector<std::uint64_t>& basis, std::uint64_t shift, Rng& rng) {
    std::uint64_t x = shift;
    for (auto r : basis)
        if (rng() & 1) x ^= r;
    return x;
}

}  // namespace detail

struct DirectionalOptions {
    bool linear_only = false;  // only X through the origin
    unsigned workers = 1;
    Budget budget{};
};

// ---------------------------------------------------------------------------
// Directional bias

/// xor_bias: max over (X, a) of |E_{x in X} (-1)^{f(x) + f(x+a)}| (m = 1).
/// joint: max over (X, a) of |(f(X), f(X+a)) - (U_m, f(X+a))|.
inline VerifyReport directional_bias(const BoolFn& f, std::size_t k, const std::string& definition,
                                     const VerifyMode& mode = VerifyMode::exhaustive(),
                                     const DirectionalOptions& opt = {}) {
    detail::check_dims(f, k);
    const bool xorb = definition == "xor_bias";
    if (!xorb && definition != "joint") throw std::invalid_argument("directional_bias: definition must be joint or xor_bias");
    if (xorb && f.m != 1) throw std::invalid_argument("directional_bias: xor_bias needs m = 1");
    if (k == 0) throw std::invalid_argument("directional_bias: k must be positive");
    const std::size_t n = f.n, m = f.m, N = std::size_t{1} << n, M = std::size_t{1} << m;
    VerifyReport rep;
    rep.property = "directional_bias";
    rep.parameters = {{"f", f.name}, {"n", n}, {"m", m}, {"k", k}, {"definition", definition},
                      {"linear_only", opt.linear_only}};
    rep.mode = mode.name();

    if (mode.kind == VerifyMode::Kind::exhaustive) {
        const std::uint64_t subs = detail::subspace_count(n, k);
        const std::uint64_t cosets = opt.linear_only ? 1 : pow2(static_cast<unsigned>(n - k));
        rep.tuples = sat_mul(sat_mul(subs, cosets), N - 1);
        rep.evaluations = sat_mul(sat_mul(subs, N - 1), N);
        opt.budget.require(rep.evaluations, "directional_bias");
        SubspaceEnumerator en(static_cast<unsigned>(n), static_cast<unsigned>(k));
        const unsigned chunks = chunk_count(en.count(), opt.workers);
        std::vector<detail::Best> best(chunks);

        // One-bit outputs go through bit masks: g[a] = f(x) xor f(x+a) for
        // xor_bias; for joint, fa[a] = f(x+a) and g[a] = f(x) and f(x+a).
        const std::size_t W = (N + 63) / 64;
        const bool masks = m == 1;
        std::vector<std::vector<std::uint64_t>> g, fa;
        std::vector<std::uint64_t> fmask(W, 0);
        if (masks) {
            g.assign(N, std::vector<std::uint64_t>(W, 0));
            if (!xorb) fa.assign(N, std::vector<std::uint64_t>(W, 0));
            for (std::uint64_t x = 0; x < N; ++x)
                if (f(x) & 1) fmask[x / 64] |= std::uint64_t{1} << (x % 64);
            for (std::uint64_t a = 1; a < N; ++a)
                for (std::uint64_t x = 0; x < N; ++x) {
                    const std::uint64_t bit = std::uint64_t{1} << (x % 64);
                    const bool fx = f(x) & 1, fy = f(x ^ a) & 1;
                    if (xorb ? fx != fy : fx && fy) g[a][x / 64] |= bit;
                    if (!xorb && fy) fa[a][x / 64] |= bit;
                }
        }
        parallel_for_ranges(en.count(), opt.workers, [&](std::uint64_t lo, std::uint64_t hi, unsigned c) {
            std::vector<std::uint32_t> cid;
            std::vector<std::uint64_t> rep_of;
            std::vector<std::vector<std::uint64_t>> cmask;
            std::vector<std::uint32_t> counts;
            std::vector<std::int64_t> c1;
            en.for_each_range(lo, hi, [&](std::uint64_t idx, const std::vector<std::uint64_t>& basis) {
                detail::coset_ids(basis, n, cid, rep_of);
                const std::size_t C = opt.linear_only ? 1 : rep_of.size();
                if (masks) {
                    cmask.assign(C, std::vector<std::uint64_t>(W, 0));
                    for (std::uint64_t x = 0; x < N; ++x)
                        if (cid[x] < C) cmask[cid[x]][x / 64] |= std::uint64_t{1} << (x % 64);
                    const std::int64_t K = std::int64_t{1} << k;
                    c1.assign(C, 0);
                    for (std::size_t s = 0; s < C; ++s)
                        for (std::size_t w = 0; w < W; ++w) c1[s] += std::popcount(fmask[w] & cmask[s][w]);
                    for (std::uint64_t a = 1; a < N; ++a) {
                        // Smallest shift attaining the max for this a; offer() settles ties across a.
                        std::int64_t top = -1;
                        std::size_t arg = 0;
                        for (std::size_t s = 0; s < C; ++s) {
                            std::int64_t ones = 0, v;
                            for (std::size_t w = 0; w < W; ++w) ones += std::popcount(g[a][w] & cmask[s][w]);
                            if (xorb) {
                                v = std::llabs(K - 2 * ones);
                            } else {
                                // With c11 = #{f(x) = f(x+a) = 1}, cb = #{f(x+a) = 1}, c1 = #{f(x) = 1}:
                                // numerator 2 (|2 c11 - cb| + |2 (c1 - c11) - (K - cb)|) over 2^{k+2}.
                                std::int64_t cb = 0;
                                for (std::size_t w = 0; w < W; ++w) cb += std::popcount(fa[a][w] & cmask[s][w]);
                                v = 2 * (std::llabs(2 * ones - cb) + std::llabs(2 * (c1[s] - ones) - (K - cb)));
                            }
                            if (v > top) top = v, arg = s;
                        }
                        if (top >= best[c].num) best[c].offer(top, idx, rep_of[arg], a, basis);
                    }
                } else {
                    for (std::uint64_t a = 1; a < N; ++a) {
                        counts.assign(C * M * M, 0);
                        for (std::uint64_t x = 0; x < N; ++x)
                            if (cid[x] < C) ++counts[cid[x] * M * M + f(x) * M + f(x ^ a)];
                        for (std::size_t s = 0; s < C; ++s) {
                            best[c].offer(detail::joint_l1(&counts[s * M * M], m), idx, rep_of[s], a, basis);
                        }
                    }
                }
            });
        });
        detail::Best b;
        for (const auto& p : best) b.merge(p);
        rep.exact = xorb ? dyadic(BigInt(b.num), static_cast<unsigned>(k)) : dyadic(BigInt(b.num), static_cast<unsigned>(k + m + 1));
        rep.witness = Witness{b.basis, b.idx, b.shift, b.a, std::nullopt};
        return rep;
    }

    // Sampled: every tuple (tuples == 0) or random tuples, each estimated from points.
    if (mode.points == 0) throw std::invalid_argument("directional_bias: sampled mode needs points > 0");
    const double alpha_total = 1.0 - mode.confidence;
    std::vector<std::tuple<std::vector<std::uint64_t>, std::uint64_t, std::uint64_t, std::uint64_t>> tuples;  // basis, idx, shift, a
    Rng rng = make_rng(mode.seed, 0x5a3);
    if (mode.tuples == 0) {
        SubspaceEnumerator en(static_cast<unsigned>(n), static_cast<unsigned>(k));
        opt.budget.require(sat_mul(sat_mul(en.count(), N), N), "directional_bias (sampled, all tuples)");
        std::vector<std::uint32_t> cid;
        std::vector<std::uint64_t> reps;
        en.for_each([&](std::uint64_t idx, const std::vector<std::uint64_t>& basis) {
            detail::coset_ids(basis, n, cid, reps);
            const std::size_t C = opt.linear_only ? 1 : reps.size();
            for (std::size_t s = 0; s < C; ++s)
                for (std::uint64_t a = 1; a < N; ++a) tuples.emplace_back(basis, idx, reps[s], a);
        });
    } else {
        for (std::uint64_t i = 0; i < mode.tuples; ++i) {
            auto basis = detail::random_subspace(n, k, rng);
            std::uint64_t s = opt.linear_only ? 0 : random_bits(rng, static_cast<unsigned>(n));
            for (auto r : basis)
                if (s & r & (~r + 1)) s ^= r;
            std::uint64_t a = 0;
            while (a == 0) a = random_bits(rng, static_cast<unsigned>(n));
            tuples.emplace_back(std::move(basis), UINT64_MAX, s, a);
        }
    }
    const double alpha = alpha_total / static_cast<double>(tuples.size());
    rep.radius = xorb ? detail::pm1_radius(mode.points, alpha) : detail::l1_radius(mode.points, M * M, alpha);
    rep.confidence = mode.confidence;
    rep.tuples = tuples.size();
    rep.evaluations = sat_mul(tuples.size(), 2 * mode.points);
    double best = -1;
    for (std::size_t t = 0; t < tuples.size(); ++t) {
        const auto& [basis, idx, s, a] = tuples[t];
        Rng pr = make_rng(mode.seed, 0x1000 + t);
        double val;
        if (xorb) {
            std::int64_t sum = 0;
            for (std::uint64_t i = 0; i < mode.points; ++i) {
                const std::uint64_t x = detail::random_point(basis, s, pr);
                sum += ((f(x) ^ f(x ^ a)) & 1) ? -1 : 1;
            }
            val = std::fabs(static_cast<double>(sum)) / static_cast<double>(mode.points);
        } else {
            std::vector<std::uint32_t> counts(M * M, 0);
            for (std::uint64_t i = 0; i < mode.points; ++i) {
                const std::uint64_t x = detail::random_point(basis, s, pr);
                ++counts[f(x) * M + f(x ^ a)];
            }
            val = static_cast<double>(detail::joint_l1(counts.data(), m)) / static_cast<double>(2 * M * mode.points);
        }
        if (val > best) {
            best = val;
            rep.witness = Witness{basis, idx, s, a, std::nullopt};
        }
    }
    rep.estimate = best;
    return rep;
}

// ---------------------------------------------------------------------------
// Plain affine extraction

/// max over k-dim affine X of |f(X) - U_m|.
inline VerifyReport affine_extractor_distance(const BoolFn& f, std::size_t k,
                                              const VerifyMode& mode = VerifyMode::exhaustive(),
                                              const DirectionalOptions& opt = {}) {
    detail::check_dims(f, k);
    const std::size_t n = f.n, m = f.m, N = std::size_t{1} << n, M = std::size_t{1} << m;
    VerifyReport rep;
    rep.property = "affine_extractor_distance";
    rep.parameters = {{"f", f.name}, {"n", n}, {"m", m}, {"k", k}, {"linear_only", opt.linear_only}};
    rep.mode = mode.name();
    // sum_z |c(z) 2^m - 2^k| over 2^{k+m+1}
    auto l1 = [&](const std::uint32_t* c) {
        std::int64_t t = 0;
        for (std::size_t z = 0; z < M; ++z)
            t += std::llabs(static_cast<std::int64_t>(c[z]) * static_cast<std::int64_t>(M) - (std::int64_t{1} << k));
        return t;
    };
    if (mode.kind == VerifyMode::Kind::exhaustive) {
        SubspaceEnumerator en(static_cast<unsigned>(n), static_cast<unsigned>(k));
        rep.tuples = sat_mul(en.count(), opt.linear_only ? 1 : pow2(static_cast<unsigned>(n - k)));
        rep.evaluations = sat_mul(en.count(), N);
        opt.budget.require(rep.evaluations, "affine_extractor_distance");
        const unsigned chunks = chunk_count(en.count(), opt.workers);
        std::vector<detail::Best> best(chunks);
        parallel_for_ranges(en.count(), opt.workers, [&](std::uint64_t lo, std::uint64_t hi, unsigned c) {
            std::vector<std::uint32_t> cid, counts;
            std::vector<std::uint64_t> reps;
            en.for_each_range(lo, hi, [&](std::uint64_t idx, const std::vector<std::uint64_t>& basis) {
                detail::coset_ids(basis, n, cid, reps);
                const std::size_t C = opt.linear_only ? 1 : reps.size();
                counts.assign(C * M, 0);
                for (std::uint64_t x = 0; x < N; ++x)
                    if (cid[x] < C) ++counts[cid[x] * M + f(x)];
                for (std::size_t s = 0; s < C; ++s) best[c].offer(l1(&counts[s * M]), idx, reps[s], 0, basis);
            });
        });
        detail::Best b;
        for (const auto& p : best) b.merge(p);
        rep.exact = dyadic(BigInt(b.num), static_cast<unsigned>(k + m + 1));
        rep.witness = Witness{b.basis, b.idx, b.shift, std::nullopt, std::nullopt};
        return rep;
    }
    if (mode.points == 0 || mode.tuples == 0) throw std::invalid_argument("affine_extractor_distance: sampled mode needs tuples and points");
    Rng rng = make_rng(mode.seed, 0xaff);
    const double alpha = (1.0 - mode.confidence) / static_cast<double>(mode.tuples);
    rep.radius = detail::l1_radius(mode.points, M, alpha);
    rep.confidence = mode.confidence;
    rep.tuples = mode.tuples;
    rep.evaluations = sat_mul(mode.tuples, mode.points);
    double best = -1;
    for (std::uint64_t t = 0; t < mode.tuples; ++t) {
        auto basis = detail::random_subspace(n, k, rng);
        std::uint64_t s = opt.linear_only ? 0 : random_bits(rng, static_cast<unsigned>(n));
        for (auto r : basis)
            if (s & r & (~r + 1)) s ^= r;
        Rng pr = make_rng(mode.seed, 0x2000 + t);
        std::vector<std::int64_t> counts(M, 0);
        for (std::uint64_t i = 0; i < mode.points; ++i) ++counts[f(detail::random_point(basis, s, pr))];
        double tv = 0;
        for (auto c : counts) tv += std::fabs(static_cast<double>(c) / static_cast<double>(mode.points) - 1.0 / static_cast<double>(M));
        tv /= 2;
        if (tv > best) {
            best = tv;
            rep.witness = Witness{basis, UINT64_MAX, s, std::nullopt, std::nullopt};
        }
    }
    rep.estimate = best;
    return rep;
}

// ---------------------------------------------------------------------------
// Directional disperser

/// For every (X, a): some b has f(X) | f(X+a) = b covering all 2^m values.
/// Fails with the first (X, a) in canonical order that has no such b.
inline VerifyReport disperser_check(const BoolFn& f, std::size_t k, const DirectionalOptions& opt = {}) {
    detail::check_dims(f, k);
    if (k == 0) throw std::invalid_argument("disperser_check: k must be positive");
    const std::size_t n = f.n, m = f.m, N = std::size_t{1} << n, M = std::size_t{1} << m;
    VerifyReport rep;
    rep.property = "disperser_check";
    rep.parameters = {{"f", f.name}, {"n", n}, {"m", m}, {"k", k}, {"linear_only", opt.linear_only}};
    SubspaceEnumerator en(static_cast<unsigned>(n), static_cast<unsigned>(k));
    rep.evaluations = sat_mul(sat_mul(en.count(), N - 1), N);
    opt.budget.require(rep.evaluations, "disperser_check");
    const unsigned chunks = chunk_count(en.count(), opt.workers);
    std::vector<std::optional<Witness>> fail(chunks);
    std::vector<std::uint64_t> seen(chunks, 0);
    parallel_for_ranges(en.count(), opt.workers, [&](std::uint64_t lo, std::uint64_t hi, unsigned c) {
        std::vector<std::uint32_t> cid;
        std::vector<std::uint64_t> reps;
        std::vector<std::uint8_t> present;
        en.for_each_range(lo, hi, [&](std::uint64_t idx, const std::vector<std::uint64_t>& basis) {
            if (fail[c]) return;
            detail::coset_ids(basis, n, cid, reps);
            const std::size_t C = opt.linear_only ? 1 : reps.size();
            for (std::size_t s = 0; s < C && !fail[c]; ++s)
                for (std::uint64_t a = 1; a < N && !fail[c]; ++a) {
                    present.assign(M * M, 0);
                    for (std::uint64_t x = 0; x < N; ++x)
                        if (cid[x] == s) present[f(x ^ a) * M + f(x)] = 1;
                    bool ok = false;
                    for (std::size_t b = 0; b < M && !ok; ++b) {
                        std::size_t cnt = 0;
                        for (std::size_t z = 0; z < M; ++z) cnt += present[b * M + z];
                        ok = cnt == M;
                    }
                    ++seen[c];
                    if (!ok) fail[c] = Witness{basis, idx, reps[s], a, std::nullopt};
                }
        });
    });
    for (auto s : seen) rep.tuples += s;
    rep.held = true;
    for (const auto& w : fail)
        if (w) {
            rep.held = false;
            rep.witness = w;
            break;
        }
    rep.exact = rep.held ? Rational(1) : Rational(0);
    return rep;
}

// ---------------------------------------------------------------------------
// Small-bias families

/// Outcomes listed with equal weight (a multiset over m-bit values). Reports
/// the largest nonempty subset bias eps, the implied distance eps 2^{m/2},
/// and the exact distance from uniform; held means measured <= implied.
inline VerifyReport eps_bias_check(const std::vector<std::uint32_t>& outcomes, std::size_t m) {
    if (m == 0 || m > 20) throw BudgetExceeded("eps_bias_check: m must be in [1, 20]");
    if (outcomes.empty()) throw std::invalid_argument("eps_bias_check: no outcomes");
    const std::size_t M = std::size_t{1} << m;
    std::vector<std::int64_t> w(M, 0);
    for (auto o : outcomes) {
        if (o >= M) throw std::invalid_argument("eps_bias_check: outcome wider than m bits");
        ++w[o];
    }
    const std::vector<std::int64_t> counts = w;
    // Walsh-Hadamard: w[S] = sum_z c(z) (-1)^{|S & z|}.
    for (std::size_t h = 1; h < M; h <<= 1)
        for (std::size_t i = 0; i < M; i += 2 * h)
            for (std::size_t j = i; j < i + h; ++j) {
                const std::int64_t u = w[j], v = w[j + h];
                w[j] = u + v;
                w[j + h] = u - v;
            }
    const BigInt total(static_cast<std::int64_t>(outcomes.size()));
    std::int64_t top = 0;
    std::size_t arg = 1;
    for (std::size_t S = 1; S < M; ++S)
        if (std::llabs(w[S]) > top) top = std::llabs(w[S]), arg = S;
    const Rational eps(BigInt(top), total);
    BigInt l1 = 0;
    for (std::size_t z = 0; z < M; ++z) l1 += boost::multiprecision::abs(BigInt(counts[z]) * BigInt(static_cast<std::int64_t>(M)) - total);
    const Rational dist(l1, total * BigInt(static_cast<std::int64_t>(2 * M)));
    VerifyReport rep;
    rep.property = "eps_bias_check";
    rep.parameters = {{"m", m}, {"outcomes", outcomes.size()}};
    rep.exact = eps;
    // measured <= eps 2^{m/2}  <=>  measured^2 <= eps^2 2^m
    rep.held = dist * dist <= eps * eps * Rational(BigInt(static_cast<std::uint64_t>(M)));
    rep.tuples = M - 1;
    rep.evaluations = outcomes.size();
    rep.extra = {{"max_bias_subset", arg},
                 {"eps", to_string(eps)},
                 {"implied_distance_bound", to_double(eps) * std::sqrt(static_cast<double>(M))},
                 {"measured_distance", to_string(dist)},
                 {"measured_distance_double", to_double(dist)}};
    return rep;
}

/// |E (-1)^{f(x_1) + ... + f(x_m)}| over independent uniform inputs, by
/// enumerating all m * c input bits (m * c <= 24).
inline Rational xor_repetition_correlation(const BoolFn& f, std::size_t reps) {
    if (f.m != 1) throw std::invalid_argument("xor_repetition_correlation: f must be boolean");
    const std::size_t c = f.n, total = c * reps;
    if (total > 24) throw BudgetExceeded("xor_repetition_correlation: more than 24 input bits");
    const std::uint64_t mask = (std::uint64_t{1} << c) - 1;
    std::int64_t sum = 0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << total); ++x) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < reps; ++i) v ^= f((x >> (i * c)) & mask);
        sum += v ? -1 : 1;
    }
    return Rational(BigInt(std::llabs(sum)), BigInt(1) << total);
}

/// |E (-1)^f| for one copy.
inline Rational correlation_with_zero(const BoolFn& f) { return xor_repetition_correlation(f, 1); }

}  // namespace gf2lab
