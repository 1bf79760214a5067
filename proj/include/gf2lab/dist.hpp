#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bitvec.hpp"
#include "rational.hpp"

namespace gf2lab {

/// Exact distribution over m-bit outcomes with probabilities count / 2^log_denom.
/// Outcomes with zero probability are not stored.
class ExactDist {
public:
    ExactDist() = default;
    ExactDist(std::size_t outcome_bits, unsigned log_denom) : bits_(outcome_bits), log_denom_(log_denom) {
        if (log_denom > 62) throw std::invalid_argument("ExactDist: denominator above 2^62");
    }

    static ExactDist point(const BitVec& v) {
        ExactDist d(v.size(), 0);
        d.add(v, 1);
        return d;
    }

    /// Uniform over all 2^m outcomes (m <= 20).
    static ExactDist uniform(std::size_t m) {
        if (m > 20) throw std::invalid_argument("ExactDist::uniform: m too large to tabulate");
        ExactDist d(m, static_cast<unsigned>(m));
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << m); ++v) d.add(BitVec::from_u64(v, m), 1);
        return d;
    }

    /// Builds from explicit dyadic weights; counts must sum to 2^log_denom.
    static ExactDist from_counts(std::size_t m, unsigned log_denom,
                                 const std::vector<std::pair<BitVec, std::uint64_t>>& entries) {
        ExactDist d(m, log_denom);
        for (const auto& [v, c] : entries) d.add(v, c);
        d.check_total();
        return d;
    }

    void add(const BitVec& outcome, std::uint64_t count) {
        if (outcome.size() != bits_) throw std::invalid_argument("ExactDist::add: width mismatch");
        if (count == 0) return;
        counts_[outcome] += count;
    }

    void check_total() const {
        std::uint64_t total = 0;
        for (const auto& [_, c] : counts_) total += c;
        if (total != (std::uint64_t{1} << log_denom_)) throw std::logic_error("ExactDist: mass does not sum to 1");
    }

    std::size_t outcome_bits() const noexcept { return bits_; }
    unsigned log_denom() const noexcept { return log_denom_; }
    const std::map<BitVec, std::uint64_t>& counts() const noexcept { return counts_; }
    std::size_t support_size() const noexcept { return counts_.size(); }

    Rational prob(const BitVec& outcome) const {
        auto it = counts_.find(outcome);
        return it == counts_.end() ? Rational(0) : dyadic(it->second, log_denom_);
    }

    std::uint64_t max_count() const {
        std::uint64_t m = 0;
        for (const auto& [_, c] : counts_) m = std::max(m, c);
        return m;
    }

    /// Pushes the distribution through g.
    template <class F>
    ExactDist map(F&& g, std::size_t out_bits) const {
        ExactDist d(out_bits, log_denom_);
        for (const auto& [v, c] : counts_) d.add(g(v), c);
        return d;
    }

    bool operator==(const ExactDist& o) const {
        if (bits_ != o.bits_) return false;
        // Compare as rationals: rescale to the larger denominator.
        if (log_denom_ == o.log_denom_) return counts_ == o.counts_;
        const auto& [lo, hi] = log_denom_ < o.log_denom_ ? std::pair(this, &o) : std::pair(&o, this);
        const unsigned shift = hi->log_denom_ - lo->log_denom_;
        if (lo->counts_.size() != hi->counts_.size()) return false;
        for (const auto& [v, c] : lo->counts_) {
            auto it = hi->counts_.find(v);
            if (it == hi->counts_.end() || it->second != (c << shift)) return false;
        }
        return true;
    }

private:
    std::size_t bits_ = 0;
    unsigned log_denom_ = 0;
    std::map<BitVec, std::uint64_t> counts_;
};

/// Half the L1 distance, exact.
inline Rational stat_distance(const ExactDist& a, const ExactDist& b) {
    if (a.outcome_bits() != b.outcome_bits()) throw std::invalid_argument("stat_distance: width mismatch");
    const unsigned L = std::max(a.log_denom(), b.log_denom());
    const unsigned sa = L - a.log_denom(), sb = L - b.log_denom();
    BigInt sum = 0;
    auto ia = a.counts().begin(), ib = b.counts().begin();
    const auto ea = a.counts().end(), eb = b.counts().end();
    while (ia != ea || ib != eb) {
        BigInt ca = 0, cb = 0;
        if (ib == eb || (ia != ea && ia->first < ib->first)) {
            ca = BigInt(ia->second) << sa;
            ++ia;
        } else if (ia == ea || ib->first < ia->first) {
            cb = BigInt(ib->second) << sb;
            ++ib;
        } else {
            ca = BigInt(ia->second) << sa;
            cb = BigInt(ib->second) << sb;
            ++ia;
            ++ib;
        }
        sum += ca > cb ? BigInt(ca - cb) : BigInt(cb - ca);
    }
    return dyadic(sum, L + 1);
}

/// Distance from the uniform distribution on all 2^m outcomes, without
/// tabulating the uniform distribution.
inline Rational distance_from_uniform(const ExactDist& d) {
    const std::size_t m = d.outcome_bits();
    const unsigned L = d.log_denom();
    // Work over denominator 2^(L+m): outcome count c*2^m versus 2^L.
    BigInt sum = 0;
    const BigInt u = BigInt(1) << L;
    for (const auto& [_, c] : d.counts()) {
        const BigInt cc = BigInt(c) << m;
        sum += cc > u ? BigInt(cc - u) : BigInt(u - cc);
    }
    BigInt missing = (BigInt(1) << m) - BigInt(d.support_size());
    sum += missing * u;
    return dyadic(sum, static_cast<unsigned>(L + m + 1));
}

/// Distance of (A, B) from (U_m, B), where A is the first m outcome bits and
/// B the rest.
inline Rational conditional_distance_from_uniform(const ExactDist& joint, std::size_t m) {
    if (m > joint.outcome_bits() || m > 40) throw std::invalid_argument("conditional_distance_from_uniform: bad split");
    const std::size_t rest = joint.outcome_bits() - m;
    std::map<BitVec, std::pair<std::uint64_t, std::vector<std::uint64_t>>> by_b;  // b -> (marginal, counts)
    for (const auto& [v, c] : joint.counts()) {
        auto& e = by_b[v.slice(m, rest)];
        e.first += c;
        e.second.push_back(c);
    }
    // Over denominator 2^(L+m): c(a,b) 2^m against c(b).
    const BigInt scale = BigInt(1) << m;
    BigInt sum = 0;
    for (const auto& [_, e] : by_b) {
        const BigInt cb(e.first);
        for (auto c : e.second) {
            const BigInt cc = BigInt(c) * scale;
            sum += cc > cb ? BigInt(cc - cb) : BigInt(cb - cc);
        }
        sum += (scale - BigInt(e.second.size())) * cb;
    }
    return dyadic(sum, static_cast<unsigned>(joint.log_denom() + m + 1));
}

inline Rational collision_probability(const ExactDist& d) {
    BigInt s = 0;
    for (const auto& [_, c] : d.counts()) s += BigInt(c) * BigInt(c);
    return dyadic(s, 2 * d.log_denom());
}

/// Distance from d to the nearest distribution with every probability at
/// most 1/K over the 2^m outcome space; requires 2^m >= K.
inline Rational clipped_distance(const ExactDist& d, const Rational& K) {
    if (K > Rational(BigInt(1) << d.outcome_bits()))
        throw std::invalid_argument("clipped_distance: K exceeds the outcome space");
    const Rational cap = Rational(1) / K;
    Rational excess = 0;
    for (const auto& [_, c] : d.counts()) {
        const Rational p = dyadic(c, d.log_denom());
        if (p > cap) excess += p - cap;
    }
    return excess;
}

/// Largest integer k with every probability at most 2^-k.
inline unsigned min_entropy_floor(const ExactDist& d) {
    const std::uint64_t mc = d.max_count();
    const unsigned ceil_log = mc <= 1 ? 0u : static_cast<unsigned>(std::bit_width(mc - 1));
    return d.log_denom() - ceil_log;
}

struct ClosenessCertificate {
    Rational cp;
    bool premise;             // cp <= 1/(K*L)
    Rational clipped;         // exact distance to nearest (log K)-source
    Rational bound_squared;   // 1/L, the square of the distance bound
    bool implication;         // !premise || clipped^2 <= 1/L
    double distance_bound;    // 1/sqrt(L), for display only
    double entropy_floor;     // log2 K, for display only
};

/// Checks the collision-probability lemma on d: if cp <= 1/(KL) then d is
/// within 1/sqrt(L) of a source of min-entropy log K.
inline ClosenessCertificate min_entropy_closeness(const ExactDist& d, const Rational& K, const Rational& L) {
    ClosenessCertificate c;
    c.cp = collision_probability(d);
    c.premise = c.cp <= Rational(1) / (K * L);
    c.clipped = clipped_distance(d, K);
    c.bound_squared = Rational(1) / L;
    c.implication = !c.premise || c.clipped * c.clipped <= c.bound_squared;
    c.distance_bound = 1.0 / std::sqrt(to_double(L));
    c.entropy_floor = std::log2(to_double(K));
    if (!c.implication) throw std::logic_error("min_entropy_closeness: collision lemma violated");
    return c;
}

}  // namespace gf2lab
