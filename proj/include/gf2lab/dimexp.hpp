#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "subspace.hpp"

namespace gf2lab {

/// Linear map on F2^n (n <= 64) stored by columns, for fast repeated application.
class SmallLinearMap {
public:
    SmallLinearMap() = default;
    explicit SmallLinearMap(const GF2Matrix& m) : rows_(m.rows()) {
        if (m.cols() > 64 || m.rows() > 64) throw std::invalid_argument("SmallLinearMap: dimension above 64");
        cols_.assign(m.cols(), 0);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j)
                if (m.get(i, j)) cols_[j] |= std::uint64_t{1} << i;
    }
    std::uint64_t operator()(std::uint64_t x) const noexcept {
        std::uint64_t y = 0;
        while (x) {
            y ^= cols_[static_cast<std::size_t>(std::countr_zero(x))];
            x &= x - 1;
        }
        return y;
    }
    std::size_t in_dim() const noexcept { return cols_.size(); }
    std::size_t out_dim() const noexcept { return rows_; }

private:
    std::size_t rows_ = 0;
    std::vector<std::uint64_t> cols_;
};

struct Certificate {
    enum class Kind { none, exhaustive, sampled } kind = Kind::none;
    std::uint64_t trials = 0;  // sampled only

    std::string to_string() const {
        switch (kind) {
            case Kind::exhaustive: return "exhaustive";
            case Kind::sampled: return "sampled:" + std::to_string(trials);
            default: return "none";
        }
    }
    static Certificate parse(const std::string& s) {
        if (s == "exhaustive") return {Kind::exhaustive, 0};
        if (s == "none") return {Kind::none, 0};
        if (s.rfind("sampled:", 0) == 0) return {Kind::sampled, std::stoull(s.substr(8))};
        throw std::invalid_argument("Certificate::parse: unknown kind " + s);
    }
    bool operator==(const Certificate&) const = default;
};

struct DimExpander {
    std::size_t n = 0;
    std::vector<GF2Matrix> maps;
    Rational alpha = 0;
    Certificate certificate;

    std::size_t d() const { return maps.size(); }

    /// Header "n d alpha certificate", then the d matrices in text form.
    std::string to_text() const {
        std::ostringstream os;
        os << n << ' ' << maps.size() << ' ' << gf2lab::to_string(alpha) << ' ' << certificate.to_string() << '\n';
        for (const auto& m : maps) os << m.to_text();
        return os.str();
    }

    static DimExpander from_text(const std::string& text) {
        std::istringstream is(text);
        DimExpander e;
        std::size_t d = 0;
        std::string alpha, cert;
        if (!(is >> e.n >> d >> alpha >> cert)) throw std::invalid_argument("DimExpander::from_text: bad header");
        e.alpha = parse_rational(alpha);
        e.certificate = Certificate::parse(cert);
        for (std::size_t i = 0; i < d; ++i) {
            e.maps.push_back(GF2Matrix::read_text(is));
            if (e.maps.back().rows() != e.n || e.maps.back().cols() != e.n)
                throw std::invalid_argument("DimExpander::from_text: map is not n x n");
        }
        return e;
    }
};

/// Result of checking dim(sum T_i V) >= (1+alpha) dim V for all small V.
struct ExpanderCheck {
    bool ok = true;
    Rational certified_alpha;             // min over V of dim(sum)/dim V - 1
    std::optional<GF2Matrix> witness;     // first violating V in enumeration order
    std::size_t witness_sum_dim = 0;
    std::uint64_t subspaces_checked = 0;
};

namespace detail {

inline std::size_t image_sum_dim(const std::vector<SmallLinearMap>& maps, const std::vector<std::uint64_t>& v) {
    SmallBasis b;
    for (const auto& T : maps)
        for (auto x : v) b.insert(T(x));
    return b.dim();
}

}  // namespace detail

/// Exhaustive check over every V with 1 <= dim V <= n/2.
inline ExpanderCheck verify_dimension_expander(const std::vector<GF2Matrix>& maps, const Rational& alpha,
                                               std::size_t n, const Budget& budget = {}, unsigned workers = 1) {
    if (maps.empty()) throw std::invalid_argument("verify_dimension_expander: no maps");
    for (const auto& m : maps)
        if (m.rows() != n || m.cols() != n) throw std::invalid_argument("verify_dimension_expander: map is not n x n");
    std::uint64_t total = 0;
    for (std::size_t k = 1; k <= n / 2; ++k) total += SubspaceEnumerator(static_cast<unsigned>(n), static_cast<unsigned>(k)).count();
    budget.require(sat_mul(total, maps.size()), "verify_dimension_expander");

    std::vector<SmallLinearMap> sm;
    for (const auto& m : maps) sm.emplace_back(m);

    ExpanderCheck out;
    out.certified_alpha = Rational(static_cast<long>(maps.size() * n));  // above any achievable ratio
    const BigInt an = boost::multiprecision::numerator(alpha), ad = boost::multiprecision::denominator(alpha);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        SubspaceEnumerator e(static_cast<unsigned>(n), static_cast<unsigned>(k));
        const unsigned chunks = chunk_count(e.count(), workers);
        struct Partial {
            std::size_t min_sum = SIZE_MAX;
            std::optional<std::uint64_t> first_fail;
            std::size_t fail_sum = 0;
        };
        std::vector<Partial> parts(chunks);
        parallel_for_ranges(e.count(), workers, [&](std::uint64_t b, std::uint64_t end, unsigned c) {
            Partial& p = parts[c];
            e.for_each_range(b, end, [&](std::uint64_t idx, const std::vector<std::uint64_t>& rows) {
                const std::size_t s = detail::image_sum_dim(sm, rows);
                p.min_sum = std::min(p.min_sum, s);
                // s >= (1 + an/ad) k  <=>  s*ad >= (ad + an) k
                if (!p.first_fail && BigInt(s) * ad < (ad + an) * BigInt(k)) {
                    p.first_fail = idx;
                    p.fail_sum = s;
                }
            });
        });
        out.subspaces_checked += e.count();
        for (const auto& p : parts) {
            out.certified_alpha = std::min(out.certified_alpha, Rational(static_cast<long>(p.min_sum), static_cast<long>(k)) - 1);
            if (out.ok && p.first_fail) {
                out.ok = false;
                out.witness = e.matrix_at(*p.first_fail);
                out.witness_sum_dim = p.fail_sum;
            }
        }
    }
    if (n < 2) out.certified_alpha = 0;
    return out;
}

/// Sampled check on uniformly random subspaces of each dimension.
inline ExpanderCheck sample_dimension_expander(const std::vector<GF2Matrix>& maps, const Rational& alpha,
                                               std::size_t n, std::uint64_t trials, std::uint64_t seed) {
    std::vector<SmallLinearMap> sm;
    for (const auto& m : maps) sm.emplace_back(m);
    Rng rng = make_rng(seed, 0x5eed);
    ExpanderCheck out;
    out.certified_alpha = Rational(static_cast<long>(maps.size() * n));
    for (std::uint64_t t = 0; t < trials; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(uniform_below(rng, n / 2));
        std::vector<std::uint64_t> rows;
        SmallBasis b;
        while (b.dim() < k) {
            const std::uint64_t v = random_bits(rng, static_cast<unsigned>(n));
            if (b.insert(v)) rows.push_back(v);
        }
        const std::size_t s = detail::image_sum_dim(sm, rows);
        const Rational ratio = Rational(static_cast<long>(s), static_cast<long>(k)) - 1;
        out.certified_alpha = std::min(out.certified_alpha, ratio);
        if (out.ok && ratio < alpha) {
            out.ok = false;
            out.witness = GF2Matrix::from_u64_rows(rows, n);
            out.witness_sum_dim = s;
        }
        ++out.subspaces_checked;
    }
    return out;
}

struct SearchOptions {
    bool include_identity = false;  // force T_1 = I
    unsigned workers = 1;
    Budget budget{};
};

/// Seeded random search: attempt t draws d random invertible maps from
/// make_rng(seed, t) and keeps the first family whose exhaustively certified
/// alpha reaches the target. The returned alpha is the exact certified value.
inline DimExpander search_dimension_expander(std::size_t n, std::size_t d, const Rational& target_alpha,
                                             std::uint64_t seed, std::uint64_t max_tries,
                                             const SearchOptions& opt = {}) {
    if (n == 0 || d == 0) throw std::invalid_argument("search_dimension_expander: n and d must be positive");
    for (std::uint64_t t = 0; t < max_tries; ++t) {
        Rng rng = make_rng(seed, t);
        std::vector<GF2Matrix> maps;
        for (std::size_t i = 0; i < d; ++i)
            maps.push_back(i == 0 && opt.include_identity ? GF2Matrix::identity(n) : GF2Matrix::random_invertible(n, rng));
        const auto check = verify_dimension_expander(maps, target_alpha, n, opt.budget, opt.workers);
        if (check.ok && check.certified_alpha >= target_alpha)
            return DimExpander{n, std::move(maps), check.certified_alpha, {Certificate::Kind::exhaustive, 0}};
    }
    throw std::runtime_error("search_dimension_expander: no family reached the target within max_tries");
}

/// Conjugates every map by S: T -> S T S^-1.
inline std::vector<GF2Matrix> conjugate_maps(const std::vector<GF2Matrix>& maps, const GF2Matrix& S) {
    const GF2Matrix Si = S.inverse();
    std::vector<GF2Matrix> out;
    for (const auto& T : maps) out.push_back(S * T * Si);
    return out;
}

}  // namespace gf2lab
