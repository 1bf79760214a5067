#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace gf2lab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational ratio(const BigInt& num, const BigInt& den) { return Rational(num, den); }

inline Rational dyadic(const BigInt& num, unsigned log_den) {
    BigInt den = 1;
    den <<= log_den;
    return Rational(num, den);
}

inline std::string to_string(const Rational& r) {
    const auto n = boost::multiprecision::numerator(r);
    const auto d = boost::multiprecision::denominator(r);
    if (d == 1) return n.str();
    return n.str() + "/" + d.str();
}

inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

}  // namespace gf2lab
