#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitvec.hpp"

namespace gf2lab {

/// Row-major matrix over F2. Applying M to x gives the vector of row·x.
struct Echelon;

class GF2Matrix {
public:
    GF2Matrix() = default;
    GF2Matrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVec(cols)) {}

    static GF2Matrix from_rows(std::vector<BitVec> rows, std::size_t cols) {
        for (const auto& r : rows)
            if (r.size() != cols) throw std::invalid_argument("GF2Matrix::from_rows: ragged row");
        GF2Matrix m;
        m.cols_ = cols;
        m.rows_ = std::move(rows);
        return m;
    }

    static GF2Matrix from_u64_rows(const std::vector<std::uint64_t>& rows, std::size_t cols) {
        GF2Matrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) m.rows_[i] = BitVec::from_u64(rows[i], cols);
        return m;
    }

    static GF2Matrix identity(std::size_t n) {
        GF2Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.rows_[i].set(i, true);
        return m;
    }

    static GF2Matrix zero(std::size_t rows, std::size_t cols) { return GF2Matrix(rows, cols); }

    template <class Rng>
    static GF2Matrix random(std::size_t rows, std::size_t cols, Rng& rng) {
        GF2Matrix m(rows, cols);
        for (auto& r : m.rows_) {
            for (auto& w : r.mutable_words()) w = rng();
            r.trim();
        }
        return m;
    }

    template <class Rng>
    static GF2Matrix random_invertible(std::size_t n, Rng& rng) {
        for (;;) {
            auto m = random(n, n, rng);
            if (m.rank() == n) return m;
        }
    }

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t cols() const noexcept { return cols_; }

    const BitVec& row(std::size_t i) const { return rows_[i]; }
    BitVec& row(std::size_t i) { return rows_[i]; }
    const std::vector<BitVec>& row_data() const noexcept { return rows_; }

    bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool v) { rows_[r].set(c, v); }

    void append_row(BitVec r) {
        if (r.size() != cols_) throw std::invalid_argument("GF2Matrix::append_row: width mismatch");
        rows_.push_back(std::move(r));
    }

    BitVec apply(const BitVec& x) const {
        if (x.size() != cols_) throw std::invalid_argument("GF2Matrix::apply: dimension mismatch");
        BitVec out(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (rows_[i].dot(x)) out.set(i, true);
        return out;
    }

    /// Row vector times matrix: sum of the rows selected by v.
    BitVec left_apply(const BitVec& v) const {
        if (v.size() != rows_.size()) throw std::invalid_argument("GF2Matrix::left_apply: dimension mismatch");
        BitVec out(cols_);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (v.get(i)) out ^= rows_[i];
        return out;
    }

    GF2Matrix transpose() const {
        GF2Matrix t(cols_, rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (rows_[i].get(j)) t.rows_[j].set(i, true);
        return t;
    }

    /// Matrix product this * o (this applied after o).
    GF2Matrix operator*(const GF2Matrix& o) const {
        if (cols_ != o.rows()) throw std::invalid_argument("GF2Matrix::operator*: dimension mismatch");
        GF2Matrix out(rows_.size(), o.cols());
        for (std::size_t i = 0; i < rows_.size(); ++i) out.rows_[i] = o.left_apply(rows_[i]);
        return out;
    }

    GF2Matrix operator+(const GF2Matrix& o) const {
        if (rows() != o.rows() || cols_ != o.cols_) throw std::invalid_argument("GF2Matrix::operator+: shape mismatch");
        GF2Matrix out = *this;
        for (std::size_t i = 0; i < rows_.size(); ++i) out.rows_[i] ^= o.rows_[i];
        return out;
    }

    /// Stacks the rows of `below` under this matrix.
    GF2Matrix vstack(const GF2Matrix& below) const {
        if (below.cols() != cols_ && below.rows() != 0) throw std::invalid_argument("GF2Matrix::vstack: width mismatch");
        GF2Matrix out = *this;
        for (const auto& r : below.rows_) out.rows_.push_back(r);
        return out;
    }

    /// Columns [begin, begin+len) of every row.
    GF2Matrix column_slice(std::size_t begin, std::size_t len) const {
        GF2Matrix out(rows_.size(), len);
        for (std::size_t i = 0; i < rows_.size(); ++i) out.rows_[i] = rows_[i].slice(begin, len);
        return out;
    }

    GF2Matrix row_slice(std::size_t begin, std::size_t len) const {
        if (begin + len > rows_.size()) throw std::out_of_range("GF2Matrix::row_slice");
        GF2Matrix out;
        out.cols_ = cols_;
        out.rows_.assign(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                         rows_.begin() + static_cast<std::ptrdiff_t>(begin + len));
        return out;
    }

    /// Reduced row echelon form over F2. Pivots are the lowest column index
    /// of each basis row; the basis is fully reduced.
    Echelon rref() const;

    /// Reduces a copy of the rows in place; `work` ends with only the
    /// nonzero reduced rows.
    void rref_into(std::vector<BitVec>& work, std::vector<std::size_t>& pivots) const {
        work = rows_;
        pivots.clear();
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < work.size(); ++c) {
            std::size_t p = r;
            while (p < work.size() && !work[p].get(c)) ++p;
            if (p == work.size()) continue;
            std::swap(work[r], work[p]);
            for (std::size_t i = 0; i < work.size(); ++i)
                if (i != r && work[i].get(c)) work[i] ^= work[r];
            pivots.push_back(c);
            ++r;
        }
        work.resize(r);
    }

    std::size_t rank() const {
        if (cols_ <= 64) {
            std::vector<std::uint64_t> v;
            v.reserve(rows_.size());
            for (const auto& r : rows_) v.push_back(r.to_u64());
            return rank_u64(std::move(v));
        }
        std::vector<BitVec> work;
        std::vector<std::size_t> pivots;
        rref_into(work, pivots);
        return pivots.size();
    }

    /// Basis of {v : M v = 0}, one basis vector per free column.
    GF2Matrix kernel_basis() const {
        std::vector<BitVec> basis;
        std::vector<std::size_t> pivots;
        rref_into(basis, pivots);
        std::vector<bool> is_pivot(cols_, false);
        for (auto p : pivots) is_pivot[p] = true;
        GF2Matrix out(0, cols_);
        for (std::size_t f = 0; f < cols_; ++f) {
            if (is_pivot[f]) continue;
            BitVec v(cols_);
            v.set(f, true);
            for (std::size_t i = 0; i < pivots.size(); ++i)
                if (basis[i].get(f)) v.set(pivots[i], true);
            out.rows_.push_back(std::move(v));
        }
        return out;
    }

    GF2Matrix inverse() const {
        const std::size_t n = rows_.size();
        if (n != cols_) throw std::invalid_argument("GF2Matrix::inverse: not square");
        std::vector<BitVec> a = rows_;
        std::vector<BitVec> inv = identity(n).rows_;
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t p = c;
            while (p < n && !a[p].get(c)) ++p;
            if (p == n) throw std::domain_error("GF2Matrix::inverse: singular matrix");
            std::swap(a[c], a[p]);
            std::swap(inv[c], inv[p]);
            for (std::size_t i = 0; i < n; ++i) {
                if (i != c && a[i].get(c)) {
                    a[i] ^= a[c];
                    inv[i] ^= inv[c];
                }
            }
        }
        return from_rows(std::move(inv), n);
    }

    /// True iff v lies in the row span.
    bool span_contains(const BitVec& v) const {
        GF2Matrix aug = *this;
        aug.append_row(v);
        return aug.rank() == rank();
    }

    bool operator==(const GF2Matrix& o) const noexcept { return cols_ == o.cols_ && rows_ == o.rows_; }

    /// "rows cols" header then one hex row per line (rows written as hex of
    /// their BitVec integer view, without the length prefix).
    std::string to_text() const {
        std::ostringstream os;
        os << rows_.size() << ' ' << cols_ << '\n';
        for (const auto& r : rows_) os << r.to_hex() << '\n';
        return os.str();
    }

    static GF2Matrix read_text(std::istream& in) {
        std::size_t r = 0, c = 0;
        if (!(in >> r >> c)) throw std::invalid_argument("GF2Matrix::read_text: bad header");
        GF2Matrix m(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            std::string hex;
            if (!(in >> hex)) throw std::invalid_argument("GF2Matrix::read_text: missing row");
            m.rows_[i] = BitVec::from_hex(hex, c);
        }
        return m;
    }

    static GF2Matrix from_text(const std::string& text) {
        std::istringstream is(text);
        return read_text(is);
    }

    std::vector<std::uint64_t> to_u64_rows() const {
        std::vector<std::uint64_t> v;
        v.reserve(rows_.size());
        for (const auto& r : rows_) v.push_back(r.to_u64());
        return v;
    }

    static std::size_t rank_u64(std::vector<std::uint64_t> v) {
        std::size_t r = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == 0) continue;
            const std::uint64_t low = v[i] & (~v[i] + 1);
            for (std::size_t j = i + 1; j < v.size(); ++j)
                if (v[j] & low) v[j] ^= v[i];
            ++r;
        }
        return r;
    }

private:
    std::size_t cols_ = 0;
    std::vector<BitVec> rows_;
};

struct Echelon {
    GF2Matrix basis;                  // nonzero rows of the reduced form
    std::vector<std::size_t> pivots;  // pivot column per basis row, increasing
};

inline Echelon GF2Matrix::rref() const {
    std::vector<BitVec> work;
    std::vector<std::size_t> pivots;
    rref_into(work, pivots);
    return {from_rows(std::move(work), cols_), std::move(pivots)};
}

/// Incremental F2 basis over u64 vectors (n <= 64), kept in a form where
/// each stored vector owns a distinct lowest set bit.
class SmallBasis {
public:
    /// Returns true if v was independent and got inserted.
    bool insert(std::uint64_t v) {
        v = reduce(v);
        if (v == 0) return false;
        vecs_.push_back(v);
        return true;
    }
    std::uint64_t reduce(std::uint64_t v) const {
        for (auto b : vecs_)
            if (v & (b & (~b + 1))) v ^= b;
        return v;
    }
    bool contains(std::uint64_t v) const { return reduce(v) == 0; }
    std::size_t dim() const { return vecs_.size(); }
    const std::vector<std::uint64_t>& vectors() const { return vecs_; }

private:
    // Each vector's lowest bit is absent from every later vector.
    std::vector<std::uint64_t> vecs_;
};

}  // namespace gf2lab
