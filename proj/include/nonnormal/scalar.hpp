#pragma once

#include <cmath>
#include <complex>
#include <cctype>
#include <ostream>
#include <string>
#include <type_traits>

#include <gmpxx.h>

#include "errors.hpp"

namespace nonnormal {

using Complex = std::complex<double>;

// Gaussian rational a + bi with GMP rationals; arithmetic is exact and
// results are always canonical.
class RationalComplex {
public:
    RationalComplex() : re_(0), im_(0) {}
    template <class I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
    RationalComplex(I v) : re_(static_cast<long>(v)), im_(0) {}
    RationalComplex(mpq_class re, mpq_class im = 0) : re_(std::move(re)), im_(std::move(im))
    {
        re_.canonicalize();
        im_.canonicalize();
    }

    // Exact: every finite double is a dyadic rational.
    static RationalComplex from_double(double re, double im = 0.0)
    {
        require(std::isfinite(re) && std::isfinite(im), "non-finite value has no rational form");
        return RationalComplex(mpq_class(re), mpq_class(im));
    }

    const mpq_class& real() const { return re_; }
    const mpq_class& imag() const { return im_; }
    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }

    RationalComplex& operator+=(const RationalComplex& o)
    {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    RationalComplex& operator-=(const RationalComplex& o)
    {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    RationalComplex& operator*=(const RationalComplex& o)
    {
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ *= o.re_;
            return *this;
        }
        mpq_class r = re_ * o.re_ - im_ * o.im_;
        mpq_class i = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        im_ = std::move(i);
        return *this;
    }
    RationalComplex& operator/=(const RationalComplex& o)
    {
        if (o.is_zero()) throw NumericalFailure("exact division by zero");
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ /= o.re_;
            return *this;
        }
        mpq_class den = o.re_ * o.re_ + o.im_ * o.im_;
        mpq_class r = (re_ * o.re_ + im_ * o.im_) / den;
        mpq_class i = (im_ * o.re_ - re_ * o.im_) / den;
        re_ = std::move(r);
        im_ = std::move(i);
        return *this;
    }

    friend RationalComplex operator+(RationalComplex a, const RationalComplex& b) { return a += b; }
    friend RationalComplex operator-(RationalComplex a, const RationalComplex& b) { return a -= b; }
    friend RationalComplex operator*(RationalComplex a, const RationalComplex& b) { return a *= b; }
    friend RationalComplex operator/(RationalComplex a, const RationalComplex& b) { return a /= b; }
    friend RationalComplex operator-(const RationalComplex& a)
    {
        return RationalComplex(mpq_class(-a.re_), mpq_class(-a.im_));
    }
    friend bool operator==(const RationalComplex& a, const RationalComplex& b)
    {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const RationalComplex& a, const RationalComplex& b) { return !(a == b); }

    std::string str() const
    {
        if (sgn(im_) == 0) return re_.get_str();
        std::string s = sgn(re_) == 0 ? std::string() : re_.get_str();
        if (sgn(im_) > 0 && !s.empty()) s += "+";
        return s + im_.get_str() + "i";
    }
    friend std::ostream& operator<<(std::ostream& os, const RationalComplex& z) { return os << z.str(); }

private:
    mpq_class re_;
    mpq_class im_;
};

inline RationalComplex conj(const RationalComplex& z)
{
    return RationalComplex(z.real(), mpq_class(-z.imag()));
}

inline Complex to_complex(const Complex& z) { return z; }
inline Complex to_complex(const RationalComplex& z) { return {z.real().get_d(), z.imag().get_d()}; }

inline double magnitude(const Complex& z) { return std::abs(z); }
inline double magnitude(const RationalComplex& z) { return std::abs(to_complex(z)); }

inline bool is_zero(const Complex& z) { return z.real() == 0.0 && z.imag() == 0.0; }
inline bool is_zero(const RationalComplex& z) { return z.is_zero(); }

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Complex> {
    static constexpr bool exact = false;
    static Complex from_complex(Complex z) { return z; }
};

template <>
struct scalar_traits<RationalComplex> {
    static constexpr bool exact = true;
    static RationalComplex from_complex(Complex z) { return RationalComplex::from_double(z.real(), z.imag()); }
};

template <class T>
inline constexpr bool is_exact_v = scalar_traits<T>::exact;

// Parses "p/q", integers and decimals with optional exponent ("0.1", "1e-2")
// into an exact rational.
inline mpq_class parse_rational(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    require(!s.empty(), "empty rational literal");
    if (s.find('/') != std::string::npos) {
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw InvalidArgument("bad rational literal: " + text);
        require(sgn(q.get_den()) != 0, "zero denominator in: " + text);
        q.canonicalize();
        return q;
    }
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
        if (s[i] == '.') {
            if (seen_point) throw InvalidArgument("bad rational literal: " + text);
            seen_point = true;
        } else {
            digits += s[i];
            if (seen_point) ++frac_digits;
        }
    }
    if (digits.empty()) throw InvalidArgument("bad rational literal: " + text);
    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw InvalidArgument("bad rational literal: " + text);
        std::size_t used = 0;
        try {
            exponent = std::stol(s.substr(i + 1), &used);
        } catch (const std::exception&) {
            throw InvalidArgument("bad rational literal: " + text);
        }
        if (i + 1 + used != s.size()) throw InvalidArgument("bad rational literal: " + text);
    }
    mpz_class num(digits, 10);
    long e = exponent - frac_digits;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    mpq_class q = e < 0 ? mpq_class(num, scale) : mpq_class(num * scale);
    q.canonicalize();
    return negative ? mpq_class(-q) : q;
}

} // namespace nonnormal
