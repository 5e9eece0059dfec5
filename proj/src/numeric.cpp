#include "surfmix/numeric.hpp"
#include "surfmix/surd.hpp"

#include <algorithm>
#include <cmath>

namespace surfmix {

Rational rational_from_double(double x)
{
    if (!std::isfinite(x)) throw std::domain_error("cannot convert a non-finite value to a rational");
    Rational r;
    mpq_set_d(r.backend().data(), x);
    return r;
}

namespace {

/// Signed decimal integer; leading zeros are not an octal prefix here.
BigInt parse_decimal(std::string s)
{
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument("not a decimal integer");
    s.erase(0, std::min(s.find_first_not_of('0'), s.size() - 1));
    const BigInt v(s);
    return negative ? BigInt(-v) : v;
}

} // namespace

Rational parse_rational(std::string_view text)
{
    std::string s(text);
    auto bad = [&] { return std::invalid_argument("not a rational number: '" + s + "'"); };
    if (s.empty()) throw bad();
    try {
        if (const auto slash = s.find('/'); slash != std::string::npos) {
            const BigInt num = parse_decimal(s.substr(0, slash));
            const BigInt den = parse_decimal(s.substr(slash + 1));
            if (den == 0) throw bad();
            return Rational(num, den);
        }
        if (const auto dot = s.find('.'); dot != std::string::npos) {
            if (s.find_first_of("eE") != std::string::npos) return rational_from_double(std::stod(s));
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            const auto places = s.size() - dot - 1;
            if (digits.empty() || digits == "-" || digits == "+") throw bad();
            BigInt den = 1;
            for (std::size_t i = 0; i < places; ++i) den *= 10;
            return Rational(parse_decimal(digits), den);
        }
        if (s.find_first_of("eE") != std::string::npos) return rational_from_double(std::stod(s));
        return Rational(parse_decimal(s));
    } catch (const std::invalid_argument&) {
        throw bad();
    } catch (const std::runtime_error&) {
        throw bad();
    }
}

std::string to_fraction_string(const Rational& r)
{
    return r.str();
}

double to_double(const Rational& r)
{
    return r.convert_to<double>();
}

double to_double(const QuadraticNumber& x)
{
    return to_double(x.rational_part()) + to_double(x.root_part()) * std::sqrt(to_double(x.radicand()));
}

std::string to_string(const QuadraticNumber& x)
{
    Rational a = x.rational_part(), b = x.root_part();
    const Rational& r = x.radicand();
    if (b == 0 || r == 0) return to_fraction_string(a);
    // a perfect-square radicand folds into the rational part
    const BigInt pn = sqrt(numerator(r)), pd = sqrt(denominator(r));
    if (pn * pn == numerator(r) && pd * pd == denominator(r)) return to_fraction_string(a + b * Rational(pn, pd));
    const std::string root = "sqrt(" + to_fraction_string(r) + ")";
    const std::string tail = (b == 1 ? "" : b == -1 ? "-" : to_fraction_string(b) + "*") + root;
    if (a == 0) return tail;
    if (b < 0) return to_fraction_string(a) + " - " + (b == -1 ? "" : to_fraction_string(-b) + "*") + root;
    return to_fraction_string(a) + " + " + tail;
}

} // namespace surfmix
