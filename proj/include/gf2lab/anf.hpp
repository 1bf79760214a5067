#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bitvec.hpp"

namespace gf2lab {

inline constexpr unsigned kAnfCap = 20;

/// Multilinear polynomial over F2 in n variables. Monomial with variable set
/// S is indexed by the mask of S; coefficient bit set means present.
class AnfPoly {
public:
    AnfPoly() = default;
    AnfPoly(unsigned n, std::vector<std::uint8_t> coeffs) : n_(n), coeffs_(std::move(coeffs)) {}

    unsigned num_vars() const noexcept { return n_; }
    const std::vector<std::uint8_t>& coefficients() const noexcept { return coeffs_; }

    std::vector<std::uint32_t> monomials() const {
        std::vector<std::uint32_t> out;
        for (std::uint32_t m = 0; m < coeffs_.size(); ++m)
            if (coeffs_[m]) out.push_back(m);
        return out;
    }

    /// Degree of the zero polynomial is reported as 0.
    unsigned degree() const {
        unsigned d = 0;
        for (std::uint32_t m = 0; m < coeffs_.size(); ++m)
            if (coeffs_[m]) d = std::max(d, static_cast<unsigned>(std::popcount(m)));
        return d;
    }

    bool eval(std::uint32_t x) const {
        bool acc = false;
        for (std::uint32_t m = 0; m < coeffs_.size(); ++m)
            if (coeffs_[m] && (m & x) == m) acc = !acc;
        return acc;
    }

    /// Truth table by the inverse transform (the Möbius transform is an involution).
    BitVec truth_table() const {
        std::vector<std::uint8_t> t = coeffs_;
        mobius(t, n_);
        BitVec out(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i]) out.set(i, true);
        return out;
    }

    static void mobius(std::vector<std::uint8_t>& t, unsigned n) {
        for (unsigned j = 0; j < n; ++j) {
            const std::size_t step = std::size_t{1} << j;
            for (std::size_t x = 0; x < t.size(); ++x)
                if (x & step) t[x] ^= t[x ^ step];
        }
    }

private:
    unsigned n_ = 0;
    std::vector<std::uint8_t> coeffs_;
};

/// ANF of the function whose value at input x (bit i = variable i) is table[x].
inline AnfPoly anf_of(const BitVec& table, unsigned cap = kAnfCap) {
    const std::size_t len = table.size();
    if (len == 0 || (len & (len - 1)) != 0) throw std::invalid_argument("anf_of: table length must be 2^n");
    const unsigned n = static_cast<unsigned>(std::countr_zero(len));
    if (n > cap) throw std::invalid_argument("anf_of: variable count above cap");
    std::vector<std::uint8_t> t(len);
    for (std::size_t i = 0; i < len; ++i) t[i] = table.get(i);
    AnfPoly::mobius(t, n);
    return AnfPoly(n, std::move(t));
}

/// Tabulates a predicate over all 2^n inputs.
template <class F>
BitVec truth_table_of(unsigned n, F&& f) {
    if (n > kAnfCap) throw std::invalid_argument("truth_table_of: n above cap");
    BitVec t(std::size_t{1} << n);
    for (std::uint32_t x = 0; x < (std::uint32_t{1} << n); ++x)
        if (f(x)) t.set(x, true);
    return t;
}

/// Algebraic degree of each output bit of a multi-output function given as
/// a map from an n-bit input to a BitVec.
template <class F>
std::vector<unsigned> output_degrees(unsigned n, std::size_t out_bits, F&& f) {
    if (n > kAnfCap) throw std::invalid_argument("output_degrees: n above cap");
    std::vector<BitVec> tables(out_bits, BitVec(std::size_t{1} << n));
    for (std::uint32_t x = 0; x < (std::uint32_t{1} << n); ++x) {
        const BitVec y = f(BitVec::from_u64(x, n));
        for (std::size_t j = 0; j < out_bits; ++j)
            if (y.get(j)) tables[j].set(x, true);
    }
    std::vector<unsigned> out;
    for (const auto& t : tables) out.push_back(anf_of(t).degree());
    return out;
}

}  // namespace gf2lab
