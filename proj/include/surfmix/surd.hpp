#ifndef SURFMIX_SURD_HPP
#define SURFMIX_SURD_HPP

#include <string>

#include "surfmix/numeric.hpp"

namespace surfmix {

inline int exact_sign(const Rational& r) { return r.sign(); }

/// Element a + b*sqrt(radicand) of a quadratic extension of Base.
///
/// Base is either Rational or another Surd, so Surd<Surd<Rational>> models
/// Q(sqrt(r1), sqrt(r2)). The radicand is a nonnegative rational; a radicand of
/// zero or a perfect square is allowed and handled by the sign routine.
/// Mixed-radicand arithmetic is a logic error and throws.
template <class Base>
class Surd {
public:
    Surd() = default;
    Surd(Base a, Base b, Rational radicand) : a_(std::move(a)), b_(std::move(b)), radicand_(std::move(radicand))
    {
        if (radicand_ < 0) throw std::domain_error("Surd: negative radicand");
    }
    /// Embeds a base element.
    static Surd constant(Base a, Rational radicand) { return Surd(std::move(a), Base(zero_like(a)), std::move(radicand)); }

    const Base& rational_part() const { return a_; }
    const Base& root_part() const { return b_; }
    const Rational& radicand() const { return radicand_; }

    friend Surd operator+(const Surd& x, const Surd& y) { check(x, y); return Surd(x.a_ + y.a_, x.b_ + y.b_, x.radicand_); }
    friend Surd operator-(const Surd& x, const Surd& y) { check(x, y); return Surd(x.a_ - y.a_, x.b_ - y.b_, x.radicand_); }
    friend Surd operator-(const Surd& x) { return Surd(-x.a_, -x.b_, x.radicand_); }
    friend Surd operator*(const Surd& x, const Surd& y)
    {
        check(x, y);
        return Surd(x.a_ * y.a_ + x.b_ * y.b_ * x.radicand_, x.a_ * y.b_ + x.b_ * y.a_, x.radicand_);
    }
    friend Surd operator*(const Surd& x, const Base& s) { return Surd(x.a_ * s, x.b_ * s, x.radicand_); }
    friend Surd operator*(const Base& s, const Surd& x) { return x * s; }
    Surd& operator+=(const Surd& y) { return *this = *this + y; }
    Surd& operator-=(const Surd& y) { return *this = *this - y; }

    /// Exact sign of a + b*sqrt(r).
    friend int exact_sign(const Surd& x)
    {
        const int sa = exact_sign(x.a_);
        const int sb = x.radicand_ == 0 ? 0 : exact_sign(x.b_);
        if (sb == 0) return sa;
        if (sa == 0) return sb;
        if (sa == sb) return sa;
        // opposite signs: compare a^2 against b^2 r
        const int s = exact_sign(x.a_ * x.a_ - x.b_ * x.b_ * x.radicand_);
        return sa > 0 ? s : -s;
    }

    friend bool operator==(const Surd& x, const Surd& y) { return exact_sign(x - y) == 0; }
    friend bool operator<(const Surd& x, const Surd& y) { return exact_sign(x - y) < 0; }
    friend bool operator<=(const Surd& x, const Surd& y) { return exact_sign(x - y) <= 0; }

private:
    static Base zero_like(const Base& a)
    {
        if constexpr (std::is_same_v<Base, Rational>) {
            (void)a;
            return Rational(0);
        } else {
            return Base::constant(zero_like(a.rational_part()), a.radicand());
        }
    }
    static void check(const Surd& x, const Surd& y)
    {
        if (x.radicand_ != y.radicand_) throw std::logic_error("Surd: mismatched radicands");
    }

    Base a_{};
    Base b_{};
    Rational radicand_{0};
};

/// Elements of Q(sqrt(r)).
using QuadraticNumber = Surd<Rational>;

inline QuadraticNumber quadratic(const Rational& a, const Rational& b, const Rational& radicand)
{
    return QuadraticNumber(a, b, radicand);
}

double to_double(const QuadraticNumber& x);

/// "a + b*sqrt(r)" with fraction strings.
std::string to_string(const QuadraticNumber& x);

} // namespace surfmix

#endif
