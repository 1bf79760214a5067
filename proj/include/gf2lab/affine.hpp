#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "common.hpp"
#include "dist.hpp"
#include "matrix.hpp"

namespace gf2lab {

/// Uniform distribution on shift + rowspan(basis). Rows are independent.
class AffineSource {
public:
    AffineSource() = default;
    AffineSource(GF2Matrix basis, BitVec shift) : basis_(std::move(basis)), shift_(std::move(shift)) {
        if (basis_.cols() != shift_.size() && basis_.rows() != 0)
            throw std::invalid_argument("AffineSource: shift length differs from basis width");
        if (basis_.rows() == 0) basis_ = GF2Matrix(0, shift_.size());
        if (basis_.rank() != basis_.rows()) throw std::invalid_argument("AffineSource: basis rows are dependent");
    }

    /// Reduces an arbitrary spanning set to a basis first.
    static AffineSource from_spanning(const GF2Matrix& span, BitVec shift) {
        return AffineSource(span.rref().basis, std::move(shift));
    }

    static AffineSource full(std::size_t n) { return AffineSource(GF2Matrix::identity(n), BitVec(n)); }
    static AffineSource point(BitVec v) { return AffineSource(GF2Matrix(0, v.size()), std::move(v)); }

    std::size_t n() const noexcept { return shift_.size(); }
    std::size_t entropy() const noexcept { return basis_.rows(); }
    const GF2Matrix& basis() const noexcept { return basis_; }
    const BitVec& shift() const noexcept { return shift_; }

    bool contains(const BitVec& x) const { return basis_.span_contains(x ^ shift_); }

    /// Visits all 2^entropy support points in Gray-code order from the shift.
    template <class Fn>
    void for_each_point(Fn&& fn) const {
        const std::size_t k = entropy();
        if (k >= 63) throw BudgetExceeded("AffineSource::for_each_point: entropy too large");
        BitVec cur = shift_;
        fn(static_cast<const BitVec&>(cur));
        for (std::uint64_t i = 1; i < (std::uint64_t{1} << k); ++i) {
            cur ^= basis_.row(static_cast<std::size_t>(std::countr_zero(i)));
            fn(static_cast<const BitVec&>(cur));
        }
    }

    std::vector<BitVec> support() const {
        std::vector<BitVec> out;
        for_each_point([&](const BitVec& v) { out.push_back(v); });
        return out;
    }

private:
    GF2Matrix basis_;
    BitVec shift_;
};

/// L(X) + c with a reduced basis.
inline AffineSource affine_apply(const GF2Matrix& L, const BitVec& c, const AffineSource& X) {
    if (L.cols() != X.n()) throw std::invalid_argument("affine_apply: dimension mismatch");
    if (c.size() != L.rows()) throw std::invalid_argument("affine_apply: offset length mismatch");
    GF2Matrix images(0, L.rows());
    for (const auto& b : X.basis().row_data()) images.append_row(L.apply(b));
    return AffineSource::from_spanning(images, L.apply(X.shift()) ^ c);
}

/// Splits X = A + B where L is injective on A's linear part and constant on
/// Supp(B). A carries no shift; B carries X's shift.
inline std::pair<AffineSource, AffineSource> affine_condition(const AffineSource& X, const GF2Matrix& L,
                                                              const BitVec& c) {
    if (L.cols() != X.n()) throw std::invalid_argument("affine_condition: dimension mismatch");
    if (c.size() != L.rows()) throw std::invalid_argument("affine_condition: offset length mismatch");
    const std::size_t k = X.entropy();
    // Column i of M is L applied to basis row i; ker M gives the combinations L kills.
    GF2Matrix M(L.rows(), k);
    for (std::size_t i = 0; i < k; ++i) {
        const BitVec img = L.apply(X.basis().row(i));
        for (std::size_t r = 0; r < L.rows(); ++r)
            if (img.get(r)) M.set(r, i, true);
    }
    const GF2Matrix ker = M.kernel_basis();
    auto combine = [&](const BitVec& coeffs) { return X.basis().left_apply(coeffs); };

    GF2Matrix b_rows(0, X.n());
    GF2Matrix coeff_span(0, k);
    for (const auto& v : ker.row_data()) {
        b_rows.append_row(combine(v));
        coeff_span.append_row(v);
    }
    GF2Matrix a_rows(0, X.n());
    for (std::size_t i = 0; i < k; ++i) {
        BitVec e(k);
        e.set(i, true);
        if (!coeff_span.span_contains(e)) {
            coeff_span.append_row(e);
            a_rows.append_row(X.basis().row(i));
        }
    }
    return {AffineSource(a_rows, BitVec(X.n())), AffineSource(b_rows, X.shift())};
}

/// Pushes the support of X through f. Denominator is 2^H(X).
template <class F>
ExactDist exact_distribution(F&& f, std::size_t out_bits, const AffineSource& X, const Budget& budget = {}) {
    if (X.entropy() > 62) throw BudgetExceeded("exact_distribution: entropy above 62");
    budget.require(pow2(static_cast<unsigned>(X.entropy())), "exact_distribution");
    ExactDist d(out_bits, static_cast<unsigned>(X.entropy()));
    X.for_each_point([&](const BitVec& x) { d.add(f(x), 1); });
    return d;
}

/// Distribution of an explicit multiset of equally likely points (flat source).
template <class F>
ExactDist flat_distribution(F&& f, std::size_t out_bits, const std::vector<BitVec>& support) {
    if (support.empty() || (support.size() & (support.size() - 1)) != 0)
        throw std::invalid_argument("flat_distribution: support size must be a power of two");
    ExactDist d(out_bits, ilog2_exact(support.size()));
    for (const auto& x : support) d.add(f(x), 1);
    return d;
}

}  // namespace gf2lab
