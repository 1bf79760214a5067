#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gf2lab {

/// Raised when an enumeration would exceed its configured work budget.
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Work cap shared by exhaustive routines, counted in elementary evaluations.
struct Budget {
    std::uint64_t max_work = std::uint64_t{1} << 36;

    void require(std::uint64_t work, const std::string& what) const {
        if (work > max_work)
            throw BudgetExceeded(what + ": needs " + std::to_string(work) + " evaluations, budget " +
                                 std::to_string(max_work));
    }
};

inline std::uint64_t pow2(unsigned k) {
    if (k >= 64) throw std::overflow_error("pow2: exponent too large");
    return std::uint64_t{1} << k;
}

/// Saturating multiply, used only for budget estimates.
inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
    return a * b;
}

inline unsigned ilog2_exact(std::uint64_t v) {
    if (v == 0 || (v & (v - 1)) != 0) throw std::invalid_argument("ilog2_exact: not a power of two");
    unsigned r = 0;
    while ((v >> r) != 1) ++r;
    return r;
}

}  // namespace gf2lab
