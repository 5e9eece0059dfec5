#ifndef SURFMIX_NUMERIC_HPP
#define SURFMIX_NUMERIC_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

namespace surfmix {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

/// Exact conversion; every finite double is a dyadic rational.
Rational rational_from_double(double x);

/// Parses "3", "-7/2" or a decimal literal such as "1.25" into an exact rational.
Rational parse_rational(std::string_view text);

/// "p/q" or "p" when q == 1.
std::string to_fraction_string(const Rational& r);

double to_double(const Rational& r);

inline Rational rational_pow(const Rational& base, unsigned exponent)
{
    Rational out{1};
    Rational b = base;
    while (exponent != 0) {
        if (exponent & 1u) out *= b;
        exponent >>= 1;
        if (exponent != 0) b *= b;
    }
    return out;
}

inline int sign(const Rational& r) { return r.sign(); }

} // namespace surfmix

#endif
