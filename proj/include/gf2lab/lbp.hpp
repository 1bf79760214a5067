#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitvec.hpp"
#include "common.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "rng.hpp"

namespace gf2lab {

// Linear branching programs over F2^n. Edge targets are node indices, or
// LinearBP::kSink0 / kSink1.

struct LbpNode {
    BitVec query;
    int e0 = -1, e1 = -1;
};

class LinearBP {
public:
    static constexpr int kSink0 = -1;
    static constexpr int kSink1 = -2;

    std::size_t n = 0;
    std::vector<LbpNode> nodes;
    int source = kSink1;

    LinearBP() = default;
    LinearBP(std::size_t n_, std::vector<LbpNode> ns, int src) : n(n_), nodes(std::move(ns)), source(src) { validate(); }

    static bool is_sink(int t) { return t == kSink0 || t == kSink1; }
    std::size_t size() const { return nodes.size(); }

    /// Throws std::invalid_argument naming the first problem found.
    void validate() const {
        auto bad = [](const std::string& what) { throw std::invalid_argument("malformed program: " + what); };
        auto target_ok = [&](int t) { return is_sink(t) || (t >= 0 && static_cast<std::size_t>(t) < nodes.size()); };
        if (!target_ok(source)) bad("source out of range");
        if (nodes.empty() && !is_sink(source)) bad("empty program must start at a sink");
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            if (nodes[v].query.size() != n) bad("node " + std::to_string(v) + " query length");
            if (!target_ok(nodes[v].e0) || !target_ok(nodes[v].e1)) bad("node " + std::to_string(v) + " edge target");
        }
        (void)topo_order();  // acyclic, and every node reachable from the source
    }

    /// Nodes in an order where every edge goes forward; throws on a cycle or
    /// on a node the source cannot reach (it would be a second source).
    std::vector<std::size_t> topo_order() const {
        std::vector<int> indeg(nodes.size(), 0);
        std::vector<bool> seen(nodes.size(), false);
        std::vector<std::size_t> stack;
        if (!is_sink(source)) stack.push_back(static_cast<std::size_t>(source)), seen[source] = true;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (int t : {nodes[v].e0, nodes[v].e1})
                if (!is_sink(t)) {
                    ++indeg[t];
                    if (!seen[t]) seen[t] = true, stack.push_back(static_cast<std::size_t>(t));
                }
        }
        for (std::size_t v = 0; v < nodes.size(); ++v)
            if (!seen[v]) throw std::invalid_argument("malformed program: node " + std::to_string(v) + " unreachable from source");
        std::vector<std::size_t> order;
        if (!is_sink(source)) {
            if (indeg[source] != 0) throw std::invalid_argument("malformed program: cycle through source");
            stack.push_back(static_cast<std::size_t>(source));
        }
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (int t : {nodes[v].e0, nodes[v].e1})
                if (!is_sink(t) && --indeg[t] == 0) stack.push_back(static_cast<std::size_t>(t));
        }
        if (order.size() != nodes.size()) throw std::invalid_argument("malformed program: cycle");
        return order;
    }

    bool eval(const BitVec& x) const {
        if (x.size() != n) throw std::invalid_argument("LinearBP::eval: input length");
        int v = source;
        for (std::size_t steps = 0; !is_sink(v); ++steps) {
            if (steps > nodes.size()) throw std::invalid_argument("malformed program: cycle");
            v = nodes[v].query.dot(x) ? nodes[v].e1 : nodes[v].e0;
        }
        return v == kSink1;
    }

    /// Query masks for n <= 64, for fast evaluation on integer inputs.
    std::vector<std::uint64_t> masks() const {
        if (n > 64) throw std::invalid_argument("LinearBP::masks: n above 64");
        std::vector<std::uint64_t> m;
        for (const auto& v : nodes) m.push_back(v.query.to_u64());
        return m;
    }

    bool eval_u64(std::uint64_t x, const std::vector<std::uint64_t>& m) const {
        int v = source;
        while (!is_sink(v)) v = (std::popcount(m[v] & x) & 1) ? nodes[v].e1 : nodes[v].e0;
        return v == kSink1;
    }

    /// Same program with the sink labels exchanged.
    LinearBP negated() const {
        auto flip = [](int t) { return t == kSink0 ? kSink1 : t == kSink1 ? kSink0 : t; };
        LinearBP p = *this;
        p.source = flip(p.source);
        for (auto& v : p.nodes) v.e0 = flip(v.e0), v.e1 = flip(v.e1);
        return p;
    }

    bool coordinate_queries() const {
        return std::all_of(nodes.begin(), nodes.end(), [](const LbpNode& v) { return v.query.popcount() == 1; });
    }

    /// {n, nodes:[{query, e0, e1}], source, sink0, sink1}; sinks get ids
    /// size() and size() + 1.
    nlohmann::json to_json() const {
        const int s0 = static_cast<int>(nodes.size()), s1 = s0 + 1;
        auto id = [&](int t) { return t == kSink0 ? s0 : t == kSink1 ? s1 : t; };
        nlohmann::json j;
        j["n"] = n;
        auto& arr = j["nodes"] = nlohmann::json::array();
        for (const auto& v : nodes) arr.push_back({{"query", v.query.to_text()}, {"e0", id(v.e0)}, {"e1", id(v.e1)}});
        j["source"] = id(source);
        j["sink0"] = s0;
        j["sink1"] = s1;
        return j;
    }

    static LinearBP from_json(const nlohmann::json& j) {
        const std::size_t n = j.at("n").get<std::size_t>();
        const int s0 = j.at("sink0").get<int>(), s1 = j.at("sink1").get<int>();
        if (s0 == s1) throw std::invalid_argument("malformed program: sink0 == sink1");
        auto map = [&](int t) {
            if (t < 0) throw std::invalid_argument("malformed program: negative node id");
            return t == s0 ? kSink0 : t == s1 ? kSink1 : t;
        };
        std::vector<LbpNode> ns;
        for (const auto& v : j.at("nodes")) {
            const int e0 = v.at("e0").get<int>(), e1 = v.at("e1").get<int>();
            ns.push_back({BitVec::from_text(v.at("query").get<std::string>()), map(e0), map(e1)});
        }
        const int src = map(j.at("source").get<int>());
        for (const auto& v : ns)
            if ((v.e0 >= 0 && static_cast<std::size_t>(v.e0) >= ns.size()) ||
                (v.e1 >= 0 && static_cast<std::size_t>(v.e1) >= ns.size()))
                throw std::invalid_argument("malformed program: edge target neither node nor sink");
        return LinearBP(n, std::move(ns), src);
    }
};

// ---------------------------------------------------------------------------
// Spans and read-once validation

/// Incremental basis over BitVec: each stored vector owns a distinct lowest
/// set bit that no later vector contains.
class SpanBasis {
public:
    explicit SpanBasis(std::size_t n = 0) : n_(n) {}

    bool insert(const BitVec& v) {
        BitVec r = reduce(v);
        if (r.none()) return false;
        vecs_.push_back(std::move(r));
        return true;
    }
    void insert_all(const SpanBasis& o) {
        for (const auto& v : o.vecs_) insert(v);
    }
    BitVec reduce(BitVec v) const {
        for (const auto& b : vecs_)
            if (v.get(b.lowest_set())) v ^= b;
        return v;
    }
    bool contains(const BitVec& v) const { return reduce(v).none(); }
    std::size_t dim() const { return vecs_.size(); }
    const std::vector<BitVec>& vectors() const { return vecs_; }

    /// Reduced row echelon basis, for reporting.
    GF2Matrix rref() const { return GF2Matrix::from_rows(vecs_, n_).rref().basis; }

private:
    std::size_t n_;
    std::vector<BitVec> vecs_;
};

/// A nonzero vector in span(A) ∩ span(B), if there is one.
inline std::optional<BitVec> span_intersection_witness(const SpanBasis& A, const SpanBasis& B, std::size_t n) {
    const std::size_t a = A.dim(), b = B.dim();
    struct Row {
        BitVec v, combo;
    };
    std::vector<Row> rows;
    auto reduce = [&](Row r) {
        for (const auto& s : rows)
            if (r.v.get(s.v.lowest_set())) r.v ^= s.v, r.combo ^= s.combo;
        return r;
    };
    for (std::size_t i = 0; i < a; ++i) {
        BitVec c(a + b);
        c.set(i, true);
        rows.push_back(reduce({A.vectors()[i], std::move(c)}));
    }
    for (std::size_t j = 0; j < b; ++j) {
        BitVec c(a + b);
        c.set(a + j, true);
        Row r = reduce({B.vectors()[j], std::move(c)});
        if (r.v.none()) {
            BitVec w(n);
            for (std::size_t i = 0; i < a; ++i)
                if (r.combo.get(i)) w ^= A.vectors()[i];
            return w;
        }
        rows.push_back(std::move(r));
    }
    return std::nullopt;
}

struct SpanAnnotation {
    std::vector<SpanBasis> pre, post;
};

/// Pre_v: span of queries on source-to-v paths, excluding l_v (forward pass).
/// Post_v: span of l_v and every query below v (reverse pass).
inline SpanAnnotation annotate_spans(const LinearBP& P) {
    const auto order = P.topo_order();
    SpanAnnotation S;
    S.pre.assign(P.size(), SpanBasis(P.n));
    S.post.assign(P.size(), SpanBasis(P.n));
    for (auto v : order)
        for (int t : {P.nodes[v].e0, P.nodes[v].e1})
            if (!LinearBP::is_sink(t)) {
                S.pre[t].insert_all(S.pre[v]);
                S.pre[t].insert(P.nodes[v].query);
            }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto v = *it;
        S.post[v].insert(P.nodes[v].query);
        for (int t : {P.nodes[v].e0, P.nodes[v].e1})
            if (!LinearBP::is_sink(t)) S.post[v].insert_all(S.post[t]);
    }
    return S;
}

struct ReadOnceResult {
    bool ok = true;
    std::optional<std::size_t> node;  // first violating node, by index
    std::optional<BitVec> vector;     // nonzero vector in Pre ∩ Post, or l_v

    nlohmann::json to_json() const {
        nlohmann::json j{{"ok", ok}};
        if (node) j["node"] = *node;
        if (vector) j["vector"] = vector->to_text();
        return j;
    }
};

inline ReadOnceResult is_strongly_read_once(const LinearBP& P) {
    const auto S = annotate_spans(P);
    for (std::size_t v = 0; v < P.size(); ++v)
        if (auto w = span_intersection_witness(S.pre[v], S.post[v], P.n)) return {false, v, *w};
    return {};
}

inline ReadOnceResult is_weakly_read_once(const LinearBP& P) {
    const auto S = annotate_spans(P);
    for (std::size_t v = 0; v < P.size(); ++v)
        if (S.pre[v].contains(P.nodes[v].query)) return {false, v, P.nodes[v].query};
    return {};
}

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationReport {
    std::optional<Rational> exact;  // Pr[P(x) = f(x)]
    double estimate = 0, radius = 0, confidence = 0;
    std::uint64_t samples = 0;

    double value() const { return exact ? to_double(*exact) : estimate; }

    nlohmann::json to_json() const {
        if (exact) return {{"mode", "exhaustive"}, {"agreement", to_string(*exact)}, {"agreement_double", to_double(*exact)}};
        return {{"mode", "sampled"}, {"estimate", estimate}, {"radius", radius}, {"confidence", confidence}, {"samples", samples}};
    }
};

/// Exact agreement Pr_x[P(x) = f(x)] over all 2^n inputs (n <= 28).
inline CorrelationReport correlation_exhaustive(const LinearBP& P, const std::function<bool(std::uint64_t)>& f,
                                                unsigned workers = 1, const Budget& budget = {}) {
    if (P.n > 28) throw BudgetExceeded("correlation: exhaustive mode needs n <= 28");
    const std::uint64_t N = pow2(static_cast<unsigned>(P.n));
    budget.require(sat_mul(N, std::max<std::size_t>(1, P.size())), "correlation");
    const auto m = P.masks();
    std::vector<std::uint64_t> agree(chunk_count(N, workers), 0);
    parallel_for_ranges(N, workers, [&](std::uint64_t b, std::uint64_t e, unsigned c) {
        std::uint64_t a = 0;
        for (std::uint64_t x = b; x < e; ++x) a += P.eval_u64(x, m) == f(x);
        agree[c] = a;
    });
    std::uint64_t total = 0;
    for (auto a : agree) total += a;
    CorrelationReport r;
    r.exact = dyadic(BigInt(total), static_cast<unsigned>(P.n));
    return r;
}

/// Sampled agreement with a two-sided Hoeffding radius at `confidence`.
inline CorrelationReport correlation_sampled(const LinearBP& P, const std::function<bool(const BitVec&)>& f,
                                             std::uint64_t samples, std::uint64_t seed, double confidence = 0.99) {
    if (samples == 0) throw std::invalid_argument("correlation: samples must be positive");
    Rng rng = make_rng(seed, 0xc0);
    std::uint64_t agree = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        BitVec x(P.n);
        for (std::size_t j = 0; j < P.n; ++j) x.set(j, rng() & 1);
        agree += P.eval(x) == f(x);
    }
    CorrelationReport r;
    r.estimate = static_cast<double>(agree) / static_cast<double>(samples);
    r.radius = std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(samples)));
    r.confidence = confidence;
    r.samples = samples;
    return r;
}

// ---------------------------------------------------------------------------
// Constructions

/// Chain accepting exactly shift + rowspan(basis): one node per vector of a
/// basis of the orthogonal complement, each checked against its value at shift.
inline LinearBP subspace_indicator_srolbp(const GF2Matrix& basis, const BitVec& shift) {
    const std::size_t n = basis.cols();
    if (shift.size() != n) throw std::invalid_argument("subspace_indicator_srolbp: shift length");
    if (basis.rank() != basis.rows()) throw std::invalid_argument("subspace_indicator_srolbp: rank-deficient basis");
    const GF2Matrix perp = basis.kernel_basis();  // w with <w, v> = 0 for every basis row v
    std::vector<LbpNode> ns;
    for (std::size_t i = 0; i < perp.rows(); ++i) {
        const int next = i + 1 < perp.rows() ? static_cast<int>(i + 1) : LinearBP::kSink1;
        const bool want = perp.row(i).dot(shift);
        ns.push_back({perp.row(i), want ? LinearBP::kSink0 : next, want ? next : LinearBP::kSink0});
    }
    const int src = ns.empty() ? LinearBP::kSink1 : 0;
    return LinearBP(n, std::move(ns), src);
}

inline BitVec unit(std::size_t n, std::size_t i) {
    BitVec v(n);
    v.set(i, true);
    return v;
}

/// Parity of the listed variables as a width-2 ROBP.
inline LinearBP parity_robp(std::size_t n, const std::vector<std::size_t>& vars) {
    if (vars.empty()) return LinearBP(n, {}, LinearBP::kSink0);
    // Node 0 reads vars[0]; layer j >= 1 has nodes 2j-1 (parity 0) and 2j (parity 1).
    std::vector<LbpNode> ns;
    auto at = [&](std::size_t j, int par) -> int {
        if (j == vars.size()) return par ? LinearBP::kSink1 : LinearBP::kSink0;
        return static_cast<int>(2 * j - 1 + static_cast<std::size_t>(par));
    };
    ns.push_back({unit(n, vars[0]), at(1, 0), at(1, 1)});
    for (std::size_t j = 1; j < vars.size(); ++j)
        for (int par : {0, 1}) ns.push_back({unit(n, vars[j]), at(j + 1, par), at(j + 1, 1 - par)});
    return LinearBP(n, std::move(ns), 0);
}

/// AND of literals (var, wanted value).
inline LinearBP conjunction_robp(std::size_t n, const std::vector<std::pair<std::size_t, bool>>& lits) {
    std::vector<LbpNode> ns;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        const int next = i + 1 < lits.size() ? static_cast<int>(i + 1) : LinearBP::kSink1;
        ns.push_back({unit(n, lits[i].first), lits[i].second ? LinearBP::kSink0 : next,
                      lits[i].second ? next : LinearBP::kSink0});
    }
    return LinearBP(n, std::move(ns), ns.empty() ? LinearBP::kSink1 : 0);
}

/// OR over consecutive blocks of width w of the AND of the block (tribes).
inline LinearBP tribes_robp(std::size_t n, std::size_t w, std::size_t blocks) {
    if (w == 0 || w * blocks > n) throw std::invalid_argument("tribes_robp: blocks do not fit");
    std::vector<LbpNode> ns;
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t i = 0; i < w; ++i) {
            const int fail = b + 1 < blocks ? static_cast<int>((b + 1) * w) : LinearBP::kSink0;
            const int next = i + 1 < w ? static_cast<int>(b * w + i + 1) : LinearBP::kSink1;
            ns.push_back({unit(n, b * w + i), fail, next});
        }
    return LinearBP(n, std::move(ns), ns.empty() ? LinearBP::kSink0 : 0);
}

// ---------------------------------------------------------------------------
// Cut decomposition for coordinate-query ROBPs

struct CutEvent {
    int node = 0;                    // node index, or a sink
    std::vector<std::size_t> read;   // n - d variables, increasing
    std::vector<std::size_t> free;   // the other d variables
    Rational probability = 0;
    bool padded = false;             // path hit a sink early; read set filled with smallest unread

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["node"] = node == LinearBP::kSink0 ? nlohmann::json("sink0") : node == LinearBP::kSink1 ? nlohmann::json("sink1") : nlohmann::json(node);
        j["read_vars"] = read;
        j["free_vars"] = free;
        j["probability"] = to_string(probability);
        j["padded"] = padded;
        return j;
    }
};

/// Events (node, read set) where a computation path has read exactly n - d
/// variables. Paths into one node with different read sets give different
/// events. A path that reaches a sink after fewer reads is padded with the
/// smallest unread variables. Probabilities sum to 1.
inline std::vector<CutEvent> robp_cut(const LinearBP& P, std::size_t d) {
    if (d > P.n) throw std::invalid_argument("robp_cut: d > n");
    if (P.n > 64) throw std::invalid_argument("robp_cut: n above 64");
    if (!P.coordinate_queries()) throw std::invalid_argument("robp_cut: program has non-coordinate queries");
    if (!is_strongly_read_once(P).ok) throw std::invalid_argument("robp_cut: program is not read-once");
    const std::size_t target = P.n - d;
    std::map<std::pair<int, std::uint64_t>, std::pair<Rational, bool>> events;
    std::map<std::pair<int, std::uint64_t>, Rational> frontier{{{P.source, 0}, Rational(1)}};
    while (!frontier.empty()) {
        std::map<std::pair<int, std::uint64_t>, Rational> next;
        for (const auto& [key, mass] : frontier) {
            const auto [v, read] = key;
            const auto cnt = static_cast<std::size_t>(std::popcount(read));
            if (cnt == target) {
                events[{v, read}].first += mass;
                continue;
            }
            if (LinearBP::is_sink(v)) {
                std::uint64_t r = read;
                for (std::size_t i = 0; std::popcount(r) < static_cast<int>(target); ++i)
                    if (!((r >> i) & 1)) r |= std::uint64_t{1} << i;
                auto& e = events[{v, r}];
                e.first += mass;
                e.second = true;
                continue;
            }
            const auto q = P.nodes[v].query.lowest_set();
            const std::uint64_t r = read | (std::uint64_t{1} << q);
            next[{P.nodes[v].e0, r}] += mass / 2;
            next[{P.nodes[v].e1, r}] += mass / 2;
        }
        frontier = std::move(next);
    }
    std::vector<CutEvent> out;
    for (const auto& [key, val] : events) {
        CutEvent e;
        e.node = key.first;
        for (std::size_t i = 0; i < P.n; ++i) ((key.second >> i) & 1 ? e.read : e.free).push_back(i);
        e.probability = val.first;
        e.padded = val.second;
        out.push_back(std::move(e));
    }
    return out;
}

/// Which event x falls in, by walking its path (same rules as robp_cut).
inline std::size_t cut_event_of(const LinearBP& P, std::size_t d, const std::vector<CutEvent>& events, std::uint64_t x) {
    const std::size_t target = P.n - d;
    int v = P.source;
    std::uint64_t read = 0;
    const auto m = P.masks();
    while (static_cast<std::size_t>(std::popcount(read)) < target && !LinearBP::is_sink(v)) {
        const auto q = static_cast<unsigned>(std::countr_zero(m[v]));
        read |= std::uint64_t{1} << q;
        v = ((x >> q) & 1) ? P.nodes[v].e1 : P.nodes[v].e0;
    }
    for (std::size_t i = 0; static_cast<std::size_t>(std::popcount(read)) < target; ++i) read |= std::uint64_t{1} << i;
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::uint64_t r = 0;
        for (auto j : events[i].read) r |= std::uint64_t{1} << j;
        if (events[i].node == v && r == read) return i;
    }
    throw std::logic_error("cut_event_of: path matches no event");
}

// ---------------------------------------------------------------------------
// Separation report

struct CatalogEntry {
    std::string name;
    LinearBP program;
};

/// Small coordinate-query ROBPs: constants, parities, conjunctions, tribes,
/// and the negations of the non-constant ones.
inline std::vector<CatalogEntry> baseline_catalog(std::size_t n, std::uint64_t seed) {
    if (n == 0 || n > 16) throw std::invalid_argument("baseline_catalog: n must be in [1, 16]");
    Rng rng = make_rng(seed, 0xca7);
    std::vector<CatalogEntry> out;
    out.push_back({"const0", LinearBP(n, {}, LinearBP::kSink0)});
    out.push_back({"const1", LinearBP(n, {}, LinearBP::kSink1)});
    std::vector<CatalogEntry> base;
    for (std::size_t j = 1; j <= n; ++j) {
        std::vector<std::size_t> vars(j);
        for (std::size_t i = 0; i < j; ++i) vars[i] = i;
        base.push_back({"parity:prefix" + std::to_string(j), parity_robp(n, vars)});
    }
    for (int t = 0; t < 16; ++t) {
        std::vector<std::size_t> vars;
        for (std::size_t i = 0; i < n; ++i)
            if (rng() & 1) vars.push_back(i);
        if (vars.empty()) vars.push_back(0);
        base.push_back({"parity:random" + std::to_string(t), parity_robp(n, vars)});
    }
    for (int t = 0; t < 32; ++t) {
        const std::size_t len = 1 + static_cast<std::size_t>(t % 8);
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::pair<std::size_t, bool>> lits;
        for (std::size_t i = 0; i < std::min(len, n); ++i) lits.emplace_back(perm[i], rng() & 1);
        base.push_back({"and:random" + std::to_string(t), conjunction_robp(n, lits)});
    }
    for (std::size_t w = 2; w <= 4; ++w)
        if (w <= n) base.push_back({"tribes:w" + std::to_string(w), tribes_robp(n, w, n / w)});
    for (auto& e : base) {
        out.push_back({"not " + e.name, e.program.negated()});
        out.push_back(std::move(e));
    }
    return out;
}

/// The bound implied by a measured directional bias eps at (n, k).
inline nlohmann::json gpt22_bound(double eps, std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("gpt22_bound: k > n");
    const double size = eps * std::ldexp(1.0, static_cast<int>(n) - static_cast<int>(k) - 1);
    return {{"statement", "SROLBP_{sqrt(eps/2)}(f) >= eps * 2^(n-k-1)"},
            {"eps", eps},
            {"n", n},
            {"k", k},
            {"correlation_level", std::sqrt(eps / 2)},
            {"size_lower_bound", size},
            {"status", "derived figure; not verified here"}};
}

/// Indicator of a random affine subspace of dimension n/2 as an SROLBP,
/// checked against direct membership, then scored against the baseline
/// catalog by agreement and by advantage over the better constant.
inline nlohmann::json separation_demo(std::size_t n, std::uint64_t seed, unsigned workers = 1) {
    if (n < 2 || n > 16 || n % 2) throw std::invalid_argument("separation_demo: n must be even in [2, 16]");
    Rng rng = make_rng(seed, 0x5e9);
    GF2Matrix basis(0, n);
    while (basis.rows() < n / 2) {
        GF2Matrix cand = basis;
        cand.append_row(BitVec::from_u64(random_bits(rng, static_cast<unsigned>(n)), n));
        if (cand.rank() == cand.rows()) basis = std::move(cand);
    }
    const BitVec shift = BitVec::from_u64(random_bits(rng, static_cast<unsigned>(n)), n);
    const LinearBP P = subspace_indicator_srolbp(basis, shift);
    const auto ro = is_strongly_read_once(P);
    // Direct membership: x - shift in rowspan(basis).
    auto member = [&](std::uint64_t x) { return basis.span_contains(BitVec::from_u64(x, n) ^ shift); };
    std::vector<bool> table(pow2(static_cast<unsigned>(n)));
    for (std::uint64_t x = 0; x < table.size(); ++x) table[x] = member(x);
    const auto m = P.masks();
    std::uint64_t mismatches = 0;
    for (std::uint64_t x = 0; x < table.size(); ++x) mismatches += P.eval_u64(x, m) != table[x];
    const Rational p1 = dyadic(BigInt(std::uint64_t{1} << (n / 2)), static_cast<unsigned>(n));
    const Rational best_const = std::max(p1, Rational(1) - p1);

    nlohmann::json cat = nlohmann::json::array();
    Rational max_adv = -1;
    std::string argmax;
    for (const auto& e : baseline_catalog(n, seed)) {
        const auto c = correlation_exhaustive(e.program, [&](std::uint64_t x) { return bool(table[x]); }, workers);
        const Rational adv = *c.exact - best_const;
        cat.push_back({{"name", e.name}, {"size", e.program.size()}, {"agreement", to_string(*c.exact)},
                       {"advantage", to_string(adv)}});
        if (adv > max_adv) max_adv = adv, argmax = e.name;
    }
    nlohmann::json j;
    j["n"] = n;
    j["seed"] = seed;
    j["subspace_dim"] = n / 2;
    j["program_size"] = P.size();
    j["strongly_read_once"] = ro.ok;
    j["membership_mismatches"] = mismatches;
    j["best_constant_agreement"] = to_string(best_const);
    j["catalog"] = cat;
    j["max_advantage"] = to_string(max_adv);
    j["max_advantage_by"] = argmax;
    j["program"] = P.to_json();
    return j;
}

}  // namespace gf2lab
