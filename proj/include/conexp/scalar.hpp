#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "conexp/beta.hpp"
#include "conexp/rational_function.hpp"

namespace conexp {

/// Raised when an exact computation needs a transcendental constant such as e^c, c != 0.
class NonRationalConstant : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// (re, im) pair over an arbitrary field; std::complex is only specified for float types.
template <class F>
struct Complex {
    F re{};
    F im{};

    Complex() = default;
    Complex(F r) : re(std::move(r)), im(0) {}  // NOLINT: real embedding
    Complex(F r, F i) : re(std::move(r)), im(std::move(i)) {}

    static Complex i() { return Complex(F(0), F(1)); }

    Complex conj() const { return {re, -im}; }
    Complex operator-() const { return {-re, -im}; }
    friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
    friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator/(const Complex& a, const Complex& b) {
        const F n = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    Complex& operator+=(const Complex& o) { return *this = *this + o; }
    Complex& operator-=(const Complex& o) { return *this = *this - o; }
    Complex& operator*=(const Complex& o) { return *this = *this * o; }
    friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
};

using Exact = RationalFunction;
using Float = double;
using ExactComplex = Complex<RationalFunction>;
using FloatComplex = Complex<double>;

template <class F>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr bool complex = false;
    using Real = double;
    static double from_int(long v) { return static_cast<double>(v); }
    static double from_ratio(long n, long d) { return static_cast<double>(n) / static_cast<double>(d); }
    static double beta(const Beta& b) { return b.value(); }
    static bool is_zero(double v) { return v == 0.0; }
    static double real_value(double v, const Beta&) { return v; }
    static std::complex<double> value(double v, const Beta&) { return v; }
    static double exp(double v) { return std::exp(v); }
    static double conj(double v) { return v; }
    static std::string str(double v) { return std::to_string(v); }
};

template <>
struct ScalarTraits<RationalFunction> {
    static constexpr bool exact = true;
    static constexpr bool complex = false;
    using Real = RationalFunction;
    static RationalFunction from_int(long v) { return RationalFunction(v); }
    static RationalFunction from_ratio(long n, long d) { return RationalFunction(n, d); }
    static RationalFunction beta(const Beta&) { return RationalFunction::beta(); }
    static bool is_zero(const RationalFunction& v) { return v.is_zero(); }
    static double real_value(const RationalFunction& v, const Beta& b) { return v.evaluate(b.value()); }
    static std::complex<double> value(const RationalFunction& v, const Beta& b) { return real_value(v, b); }
    static RationalFunction exp(const RationalFunction& v) {
        if (v.is_zero()) return RationalFunction(1);
        throw NonRationalConstant("exp(c) with c = " + v.str() + " is not in Q(beta)");
    }
    static RationalFunction conj(const RationalFunction& v) { return v; }
    static std::string str(const RationalFunction& v) { return v.str(); }
};

template <class F>
struct ScalarTraits<Complex<F>> {
    using Base = ScalarTraits<F>;
    static constexpr bool exact = Base::exact;
    static constexpr bool complex = true;
    using Real = F;
    static Complex<F> from_int(long v) { return Complex<F>(Base::from_int(v)); }
    static Complex<F> from_ratio(long n, long d) { return Complex<F>(Base::from_ratio(n, d)); }
    static Complex<F> beta(const Beta& b) { return Complex<F>(Base::beta(b)); }
    static bool is_zero(const Complex<F>& v) { return Base::is_zero(v.re) && Base::is_zero(v.im); }
    static std::complex<double> value(const Complex<F>& v, const Beta& b) {
        return {Base::real_value(v.re, b), Base::real_value(v.im, b)};
    }
    static Complex<F> exp(const Complex<F>& v) {
        if constexpr (Base::exact) {
            if (is_zero(v)) return Complex<F>(F(1));
            throw NonRationalConstant("exp of a nonzero exact complex constant");
        } else {
            const auto z = std::exp(std::complex<double>(v.re, v.im));
            return {z.real(), z.imag()};
        }
    }
    static Complex<F> conj(const Complex<F>& v) { return v.conj(); }
    static std::string str(const Complex<F>& v) { return "(" + Base::str(v.re) + ", " + Base::str(v.im) + ")"; }
};

template <class F>
concept Scalar = requires { ScalarTraits<F>::exact; };

}  // namespace conexp
