#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gf2lab {

using u128 = unsigned __int128;

namespace poly2 {

inline int degree(u128 p) {
    if (p == 0) return -1;
    const auto hi = static_cast<std::uint64_t>(p >> 64);
    if (hi) return 64 + static_cast<int>(std::bit_width(hi)) - 1;
    return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(p))) - 1;
}

inline u128 mod(u128 a, u128 f) {
    const int df = degree(f);
    for (int da = degree(a); da >= df; da = degree(a)) a ^= f << (da - df);
    return a;
}

inline u128 gcd(u128 a, u128 b) {
    while (b != 0) {
        a = mod(a, b);
        std::swap(a, b);
    }
    return a;
}

/// a * b mod f for deg a, deg b < deg f <= 64.
inline u128 mulmod(u128 a, u128 b, u128 f) {
    const int df = degree(f);
    u128 r = 0;
    while (b != 0) {
        if (b & 1) r ^= a;
        b >>= 1;
        a <<= 1;
        if ((a >> df) & 1) a ^= f;
    }
    return r;
}

inline std::vector<unsigned> prime_factors(unsigned k) {
    std::vector<unsigned> ps;
    for (unsigned p = 2; p * p <= k; ++p) {
        if (k % p == 0) ps.push_back(p);
        while (k % p == 0) k /= p;
    }
    if (k > 1) ps.push_back(k);
    return ps;
}

/// Rabin's test: f of degree k is irreducible iff x^(2^k) = x mod f and
/// gcd(x^(2^(k/p)) - x, f) = 1 for every prime p dividing k.
inline bool rabin_irreducible(u128 f) {
    const int k = degree(f);
    if (k < 1) return false;
    auto x_pow_2e = [&](unsigned e) {
        u128 r = mod(2, f);
        for (unsigned i = 0; i < e; ++i) r = mulmod(r, r, f);
        return r;
    };
    if (x_pow_2e(static_cast<unsigned>(k)) != mod(2, f)) return false;
    for (unsigned p : prime_factors(static_cast<unsigned>(k)))
        if (degree(gcd(f, x_pow_2e(static_cast<unsigned>(k) / p) ^ mod(2, f))) != 0) return false;
    return true;
}

/// Exhaustive factor search: no polynomial of degree 1..k/2 divides f.
inline bool trial_division_irreducible(u128 f) {
    const int k = degree(f);
    if (k < 1) return false;
    if (k > 24) throw std::invalid_argument("trial_division_irreducible: degree above 24");
    for (int d = 1; 2 * d <= k; ++d)
        for (std::uint64_t g = std::uint64_t{1} << d; g < (std::uint64_t{2} << d); ++g)
            if (mod(f, g) == 0) return false;
    return true;
}

}  // namespace poly2

/// Low-weight irreducible polynomials, one per degree 1..64, "k:hex" with the
/// leading term included.
inline constexpr const char* kModulusTable =
    "1:3\n"
    "2:7\n"
    "3:b\n"
    "4:13\n"
    "5:25\n"
    "6:43\n"
    "7:83\n"
    "8:11b\n"
    "9:203\n"
    "10:409\n"
    "11:805\n"
    "12:1009\n"
    "13:201b\n"
    "14:4021\n"
    "15:8003\n"
    "16:1002b\n"
    "17:20009\n"
    "18:40009\n"
    "19:80027\n"
    "20:100009\n"
    "21:200005\n"
    "22:400003\n"
    "23:800021\n"
    "24:100001b\n"
    "25:2000009\n"
    "26:400001b\n"
    "27:8000027\n"
    "28:10000003\n"
    "29:20000005\n"
    "30:40000003\n"
    "31:80000009\n"
    "32:10000008d\n"
    "33:200000401\n"
    "34:400000081\n"
    "35:800000005\n"
    "36:1000000201\n"
    "37:2000000053\n"
    "38:4000000063\n"
    "39:8000000011\n"
    "40:10000000039\n"
    "41:20000000009\n"
    "42:40000000081\n"
    "43:80000000059\n"
    "44:100000000021\n"
    "45:20000000001b\n"
    "46:400000000003\n"
    "47:800000000021\n"
    "48:100000000002d\n"
    "49:2000000000201\n"
    "50:400000000001d\n"
    "51:800000000004b\n"
    "52:10000000000009\n"
    "53:20000000000047\n"
    "54:40000000000201\n"
    "55:80000000000081\n"
    "56:100000000000095\n"
    "57:200000000000011\n"
    "58:400000000080001\n"
    "59:800000000000095\n"
    "60:1000000000000003\n"
    "61:2000000000000027\n"
    "62:4000000020000001\n"
    "63:8000000000000003\n"
    "64:1000000000000001b\n";

inline std::map<unsigned, u128> parse_modulus_table(const std::string& text) {
    std::map<unsigned, u128> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("modulus table: expected k:hex");
        const unsigned k = static_cast<unsigned>(std::stoul(line.substr(0, colon)));
        u128 f = 0;
        for (char c : line.substr(colon + 1)) {
            unsigned v;
            if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
            else throw std::invalid_argument("modulus table: bad hex digit");
            f = (f << 4) | v;
        }
        if (poly2::degree(f) != static_cast<int>(k)) throw std::invalid_argument("modulus table: degree mismatch");
        out[k] = f;
    }
    return out;
}

/// GF(2^k) for 1 <= k <= 64 in polynomial basis; element bit i is the
/// coefficient of z^i.
class GF2kField {
public:
    /// Uses the built-in table entry for k, certified by Rabin's test (and by
    /// trial division as well when k <= 24).
    explicit GF2kField(unsigned k) : GF2kField(k, builtin_modulus(k)) {}

    GF2kField(unsigned k, u128 modulus) : k_(k), modulus_(modulus) {
        if (k < 1 || k > 64) throw std::invalid_argument("GF2kField: degree must be in [1, 64]");
        if (poly2::degree(modulus) != static_cast<int>(k)) throw std::invalid_argument("GF2kField: modulus degree");
        if (!poly2::rabin_irreducible(modulus)) throw std::invalid_argument("GF2kField: modulus is reducible");
        if (k <= 24 && !poly2::trial_division_irreducible(modulus))
            throw std::logic_error("GF2kField: certification methods disagree");
        low_ = static_cast<std::uint64_t>(modulus);  // drops the x^k term for k = 64
        if (k < 64) low_ &= (std::uint64_t{1} << k) - 1;
        mask_ = k == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << k) - 1);
    }

    static u128 builtin_modulus(unsigned k) {
        static const auto table = parse_modulus_table(kModulusTable);
        auto it = table.find(k);
        if (it == table.end()) throw std::invalid_argument("GF2kField: no table entry for degree");
        return it->second;
    }

    unsigned k() const noexcept { return k_; }
    u128 modulus() const noexcept { return modulus_; }
    std::uint64_t mask() const noexcept { return mask_; }

    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        check(a);
        check(b);
        std::uint64_t r = 0;
        const std::uint64_t top = std::uint64_t{1} << (k_ - 1);
        while (b) {
            if (b & 1) r ^= a;
            b >>= 1;
            const bool carry = a & top;
            a = (a << 1) & mask_;
            if (carry) a ^= low_;
        }
        return r;
    }

    std::uint64_t pow3(std::uint64_t a) const { return mul(mul(a, a), a); }

    std::uint64_t pow(std::uint64_t a, std::uint64_t e) const {
        std::uint64_t r = 1;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

private:
    void check(std::uint64_t a) const {
        if (a & ~mask_) throw std::invalid_argument("GF2kField: element wider than k bits");
    }

    unsigned k_;
    u128 modulus_;
    std::uint64_t low_ = 0, mask_ = 0;
};

/// Cached fields for the built-in table.
inline const GF2kField& field_of_degree(unsigned k) {
    static std::map<unsigned, GF2kField> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, GF2kField(k)).first;
    return it->second;
}

}  // namespace gf2lab
