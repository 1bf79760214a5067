#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitvec.hpp"
#include "common.hpp"
#include "field.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace gf2lab {

// ---------------------------------------------------------------------------
// Inner product over GF(2^m)

/// Views x and y as vectors over GF(2^m) in consecutive m-bit blocks and
/// returns their inner product. A tail shorter than m bits is dropped.
inline BitVec ip(const BitVec& x, const BitVec& y, std::size_t m) {
    if (x.size() != y.size()) throw std::invalid_argument("ip: length mismatch");
    if (m == 0 || m > 64) throw std::invalid_argument("ip: block width must be in [1, 64]");
    const std::size_t blocks = x.size() / m;
    if (m == 1) {
        const std::size_t used = blocks;
        bool acc = false;
        if (used == x.size()) acc = x.dot(y);
        else acc = x.prefix(used).dot(y.prefix(used));
        return BitVec::from_u64(acc ? 1 : 0, 1);
    }
    const GF2kField& F = field_of_degree(static_cast<unsigned>(m));
    std::uint64_t acc = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        acc ^= F.mul(x.slice(b * m, m).to_u64(), y.slice(b * m, m).to_u64());
    return BitVec::from_u64(acc, m);
}

// ---------------------------------------------------------------------------
// Linear seeded extractors

/// A seeded extractor that is linear in its source for every fixed seed.
/// degree() bounds the joint algebraic degree of each output bit in the
/// (source, seed) bits; profiles here are all bilinear except file families.
class ExtractorProfile {
public:
    virtual ~ExtractorProfile() = default;
    virtual BitVec extract(const BitVec& x, const BitVec& seed, std::size_t m) const = 0;
    virtual unsigned degree() const = 0;
    virtual std::string name() const = 0;

    /// The m x n matrix this seed selects.
    GF2Matrix matrix_for_seed(std::size_t n, const BitVec& seed, std::size_t m) const {
        GF2Matrix out(m, n);
        for (std::size_t j = 0; j < n; ++j) {
            BitVec e(n);
            e.set(j, true);
            const BitVec col = extract(e, seed, m);
            for (std::size_t i = 0; i < m; ++i)
                if (col.get(i)) out.set(i, j, true);
        }
        return out;
    }
};

/// out_i = sum_j seed[i - j + n - 1] x_j, seed of exactly n + m - 1 bits.
inline BitVec toeplitz_extract(const BitVec& x, const BitVec& seed, std::size_t m) {
    const std::size_t n = x.size();
    if (n == 0) return BitVec(m);
    if (seed.size() != n + m - 1) throw std::invalid_argument("lsext: seed must have n + m - 1 bits");
    BitVec out(m);
    // Row i of the Toeplitz matrix, read for j = 0..n-1, is seed[i+n-1], seed[i+n-2], ..., seed[i].
    // Reverse x once so each row is a plain window of the seed.
    BitVec xr(n);
    for (std::size_t j = 0; j < n; ++j)
        if (x.get(j)) xr.set(n - 1 - j, true);
    for (std::size_t i = 0; i < m; ++i)
        if (seed.slice(i, n).dot(xr)) out.set(i, true);
    return out;
}

class ToeplitzExtractor final : public ExtractorProfile {
public:
    BitVec extract(const BitVec& x, const BitVec& seed, std::size_t m) const override {
        return toeplitz_extract(x, seed, m);
    }
    unsigned degree() const override { return 2; }
    std::string name() const override { return "toeplitz"; }
};

/// Toeplitz hashing whose n + m - 1 seed bits are a fixed linear expansion E
/// of a shorter seed. E depends only on (n, d, m, salt) and is drawn from the
/// project RNG, so each output bit stays bilinear in (x, seed). A seed of at
/// least n + m - 1 bits uses its prefix directly.
class ExpandedToeplitzExtractor final : public ExtractorProfile {
public:
    explicit ExpandedToeplitzExtractor(std::uint64_t salt = 0x7e3d) : salt_(salt) {}

    BitVec extract(const BitVec& x, const BitVec& seed, std::size_t m) const override {
        const std::size_t n = x.size(), need = n + m - 1;
        if (seed.size() >= need) return toeplitz_extract(x, seed.prefix(need), m);
        if (seed.empty()) throw std::invalid_argument("expanded lsext: empty seed");
        return toeplitz_extract(x, expansion(need, seed.size()).apply(seed), m);
    }
    unsigned degree() const override { return 2; }
    std::string name() const override { return "expanded_toeplitz"; }

    /// The need x d expansion matrix. Cached entries are never erased, so the
    /// reference stays valid for the life of the extractor.
    const GF2Matrix& expansion(std::size_t need, std::size_t d) const {
        std::lock_guard<std::mutex> lock(mu_);
        const auto key = std::make_pair(need, d);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Rng rng = make_rng(salt_ ^ (need * 0x9e3779b97f4a7c15ULL), d);
        return cache_.emplace(key, GF2Matrix::random(need, d, rng)).first->second;
    }

private:
    std::uint64_t salt_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<std::size_t, std::size_t>, GF2Matrix> cache_;
};

/// Explicit family: one m x n matrix per seed value (seed read as an integer).
class FamilyExtractor final : public ExtractorProfile {
public:
    FamilyExtractor(std::size_t n, std::size_t d, std::size_t m, std::vector<GF2Matrix> mats, unsigned degree_bound)
        : n_(n), d_(d), m_(m), mats_(std::move(mats)), degree_(degree_bound) {
        if (d >= 32 || mats_.size() != (std::size_t{1} << d))
            throw std::invalid_argument("FamilyExtractor: need exactly 2^d matrices");
        for (const auto& M : mats_)
            if (M.rows() != m || M.cols() != n) throw std::invalid_argument("FamilyExtractor: matrix shape");
    }

    BitVec extract(const BitVec& x, const BitVec& seed, std::size_t m) const override {
        if (x.size() != n_ || seed.size() != d_ || m != m_) throw std::invalid_argument("FamilyExtractor: shape");
        return mats_[seed.to_u64()].apply(x);
    }
    unsigned degree() const override { return degree_; }
    std::string name() const override { return "family"; }

    /// d-indexed list: header "n d m", then 2^d matrices in text form.
    static FamilyExtractor read_text(std::istream& in) {
        std::size_t n, d, m;
        if (!(in >> n >> d >> m)) throw std::invalid_argument("FamilyExtractor: bad header");
        std::vector<GF2Matrix> mats;
        for (std::size_t s = 0; s < (std::size_t{1} << d); ++s) mats.push_back(GF2Matrix::read_text(in));
        // Each output bit is x-linear with coefficients arbitrary in the seed.
        return FamilyExtractor(n, d, m, std::move(mats), static_cast<unsigned>(d + 1));
    }
    std::string to_text() const {
        std::ostringstream os;
        os << n_ << ' ' << d_ << ' ' << m_ << '\n';
        for (const auto& M : mats_) os << M.to_text();
        return os.str();
    }

private:
    std::size_t n_, d_, m_;
    std::vector<GF2Matrix> mats_;
    unsigned degree_;
};

inline std::shared_ptr<const ExtractorProfile> default_extractor() {
    static const auto p = std::make_shared<const ExpandedToeplitzExtractor>();
    return p;
}

/// Plain Toeplitz LSExt: seed of n + m - 1 bits.
inline BitVec lsext(const BitVec& x, const BitVec& seed, std::size_t m) { return toeplitz_extract(x, seed, m); }

/// Degree of an extractor output bit given the degrees of its source bits
/// (dx) and seed bits (ds) for a profile of joint degree D that is linear in
/// the source: dx + (D - 1) * ds.
inline unsigned compose_degree(unsigned D, unsigned dx, unsigned ds) { return dx + (D - 1) * ds; }

// ---------------------------------------------------------------------------
// Affine somewhere-random-source extractor

using SRMerge = std::function<BitVec(const BitVec&, const BitVec&)>;

/// Default merge: a + Ext(a; seed b) + Ext(b; seed a), width preserved.
/// Symmetric in the extractor terms so equal rows merge to themselves.
inline BitVec default_sr_merge(const BitVec& a, const BitVec& b) {
    const auto& E = *default_extractor();
    return a ^ E.extract(a, b, a.size()) ^ E.extract(b, a, a.size());
}

/// Folds rows pairwise level by level (row 2i with row 2i+1); an odd last row
/// is carried to the next level unchanged.
inline BitVec affine_srext(const std::vector<BitVec>& rows, const SRMerge& merge = default_sr_merge) {
    if (rows.empty()) throw std::invalid_argument("affine_srext: no rows");
    for (const auto& r : rows)
        if (r.size() != rows[0].size()) throw std::invalid_argument("affine_srext: ragged rows");
    std::vector<BitVec> level = rows;
    while (level.size() > 1) {
        std::vector<BitVec> next;
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(merge(level[i], level[i + 1]));
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    return level[0];
}

/// Degree bound of the default fold over t rows of degree-dr inputs.
inline unsigned affine_srext_degree(std::size_t t, unsigned dr, unsigned D = 2) {
    unsigned d = dr;
    for (std::size_t w = t; w > 1; w = (w + 1) / 2) d = std::max(d, compose_degree(D, d, d));
    return d;
}

// ---------------------------------------------------------------------------
// Linear codes

struct LinearCode {
    std::size_t k = 0;
    std::size_t n_code = 0;
    GF2Matrix generator;  // k x n_code, rank k
    std::optional<std::size_t> certified_distance;

    LinearCode() = default;
    explicit LinearCode(GF2Matrix g) : k(g.rows()), n_code(g.cols()), generator(std::move(g)) {
        if (generator.rank() != k) throw std::invalid_argument("LinearCode: generator is rank deficient");
    }

    BitVec encode(const BitVec& msg) const {
        if (msg.size() != k) throw std::invalid_argument("LinearCode::encode: wrong message length");
        return generator.left_apply(msg);
    }

    /// Header "k n distance" (distance or "unknown"), then the generator.
    std::string to_text() const {
        std::ostringstream os;
        os << k << ' ' << n_code << ' ' << (certified_distance ? std::to_string(*certified_distance) : "unknown")
           << '\n'
           << generator.to_text();
        return os.str();
    }

    /// Loads and re-certifies when k <= 20; a stated distance that disagrees is an error.
    static LinearCode from_text(const std::string& text) {
        std::istringstream is(text);
        std::size_t k, n;
        std::string dist;
        if (!(is >> k >> n >> dist)) throw std::invalid_argument("LinearCode::from_text: bad header");
        LinearCode c(GF2Matrix::read_text(is));
        if (c.k != k || c.n_code != n) throw std::invalid_argument("LinearCode::from_text: header/matrix mismatch");
        if (k <= 20) {
            const std::size_t d = certify_distance_of(c);
            if (dist != "unknown" && std::stoul(dist) != d)
                throw std::invalid_argument("LinearCode::from_text: stated distance is wrong");
            c.certified_distance = d;
        }
        return c;
    }

    static std::size_t certify_distance_of(const LinearCode& c) {
        if (c.k > 20) throw BudgetExceeded("certify_distance: k above 20");
        if (c.k == 0) return 0;
        std::size_t best = c.n_code + 1;
        BitVec cur(c.n_code);
        for (std::uint64_t i = 1; i < (std::uint64_t{1} << c.k); ++i) {
            cur ^= c.generator.row(static_cast<std::size_t>(std::countr_zero(i)));
            best = std::min(best, cur.popcount());
        }
        return best;
    }
};

inline std::size_t certify_distance(LinearCode& c) {
    c.certified_distance = LinearCode::certify_distance_of(c);
    return *c.certified_distance;
}

/// Extended Hamming [8,4,4].
inline LinearCode extended_hamming8() {
    LinearCode c(GF2Matrix::from_rows({BitVec::from_string("10000111"), BitVec::from_string("01001011"),
                                       BitVec::from_string("00101101"), BitVec::from_string("00011110")},
                                      8));
    certify_distance(c);
    return c;
}

/// Block-diagonal copies: message blocks encoded independently.
inline LinearCode tiled_code(const LinearCode& base, std::size_t copies) {
    GF2Matrix g(base.k * copies, base.n_code * copies);
    for (std::size_t c = 0; c < copies; ++c)
        for (std::size_t i = 0; i < base.k; ++i)
            for (std::size_t j = 0; j < base.n_code; ++j)
                if (base.generator.get(i, j)) g.set(c * base.k + i, c * base.n_code + j, true);
    LinearCode out(std::move(g));
    out.certified_distance = base.certified_distance;  // min weight sits in one tile
    return out;
}

/// The codeword written out `times` times in a row.
inline LinearCode repeated_code(const LinearCode& base, std::size_t times) {
    GF2Matrix g(base.k, base.n_code * times);
    for (std::size_t i = 0; i < base.k; ++i) {
        BitVec r(0);
        for (std::size_t t = 0; t < times; ++t) r = r.concat(base.generator.row(i));
        g.row(i) = r;
    }
    LinearCode out(std::move(g));
    if (base.certified_distance) out.certified_distance = *base.certified_distance * times;
    return out;
}

/// Even-weight code [k+1, k, 2]: the message followed by its parity.
inline LinearCode parity_code(std::size_t k) {
    GF2Matrix g(k, k + 1);
    for (std::size_t i = 0; i < k; ++i) {
        g.set(i, i, true);
        g.set(i, k, true);
    }
    LinearCode c(std::move(g));
    c.certified_distance = k == 0 ? 0 : 2;
    return c;
}

inline LinearCode identity_code(std::size_t k) {
    LinearCode c(GF2Matrix::identity(k));
    c.certified_distance = k == 0 ? 0 : 1;
    return c;
}

}  // namespace gf2lab
