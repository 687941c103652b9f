#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conexp {

/// Dense univariate polynomial with integer coefficients, lowest degree first.
/// Invariant: no trailing zero coefficients (the zero polynomial is empty).
class IntPoly {
public:
    IntPoly() = default;
    explicit IntPoly(std::vector<mpz_class> coeffs) : c_(std::move(coeffs)) { trim(); }

    static IntPoly constant(const mpz_class& v) { return IntPoly(std::vector<mpz_class>{v}); }
    static IntPoly x() { return IntPoly(std::vector<mpz_class>{0, 1}); }
    /// a*x + b
    static IntPoly linear(const mpz_class& a, const mpz_class& b) {
        return IntPoly(std::vector<mpz_class>{b, a});
    }

    bool is_zero() const noexcept { return c_.empty(); }
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    const mpz_class& lc() const { return c_.back(); }
    const std::vector<mpz_class>& coeffs() const noexcept { return c_; }
    const mpz_class& operator[](std::size_t i) const { return c_[i]; }

    mpz_class content() const {
        mpz_class g = 0;
        for (const auto& v : c_) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
            if (g == 1) break;
        }
        return g;
    }

    IntPoly operator-() const {
        IntPoly r = *this;
        for (auto& v : r.c_) v = -v;
        return r;
    }

    friend IntPoly operator+(const IntPoly& a, const IntPoly& b) {
        std::vector<mpz_class> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] = a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
        return IntPoly(std::move(r));
    }
    friend IntPoly operator-(const IntPoly& a, const IntPoly& b) { return a + (-b); }

    friend IntPoly operator*(const IntPoly& a, const IntPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<mpz_class> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                mpz_addmul(r[i + j].get_mpz_t(), a.c_[i].get_mpz_t(), b.c_[j].get_mpz_t());
        }
        return IntPoly(std::move(r));
    }

    friend IntPoly operator*(const IntPoly& a, const mpz_class& s) {
        if (s == 0) return {};
        IntPoly r = a;
        for (auto& v : r.c_) v *= s;
        return r;
    }

    /// Divides every coefficient by s; s must divide the content.
    IntPoly divexact(const mpz_class& s) const {
        IntPoly r = *this;
        for (auto& v : r.c_) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), s.get_mpz_t());
        return r;
    }

    IntPoly pow(int e) const {
        IntPoly r = constant(1), base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            e >>= 1;
            if (e) base = base * base;
        }
        return r;
    }

    /// Exact quotient this / f when f is primitive and divides this in Z[x]; nullopt otherwise.
    /// By Gauss's lemma a primitive divisor over Q[x] divides over Z[x].
    std::optional<IntPoly> exact_quotient(const IntPoly& f) const {
        if (f.is_zero()) return std::nullopt;
        if (is_zero()) return IntPoly{};
        if (degree() < f.degree()) return std::nullopt;
        std::vector<mpz_class> rem = c_;
        std::vector<mpz_class> q(rem.size() - f.c_.size() + 1);
        const int df = f.degree();
        mpz_class t;
        for (int i = static_cast<int>(rem.size()) - 1; i >= df; --i) {
            if (rem[i] == 0) continue;
            if (!mpz_divisible_p(rem[i].get_mpz_t(), f.lc().get_mpz_t())) return std::nullopt;
            mpz_divexact(t.get_mpz_t(), rem[i].get_mpz_t(), f.lc().get_mpz_t());
            q[i - df] = t;
            for (int j = 0; j <= df; ++j)
                mpz_submul(rem[i - df + j].get_mpz_t(), t.get_mpz_t(), f.c_[j].get_mpz_t());
        }
        for (int i = 0; i < df; ++i)
            if (rem[i] != 0) return std::nullopt;
        return IntPoly(std::move(q));
    }

    double evaluate(double x) const {
        double r = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + it->get_d();
        return r;
    }

    mpq_class evaluate(const mpq_class& x) const {
        mpq_class r = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + mpq_class(*it);
        return r;
    }

    friend bool operator==(const IntPoly& a, const IntPoly& b) { return a.c_ == b.c_; }
    friend bool operator<(const IntPoly& a, const IntPoly& b) {
        if (a.c_.size() != b.c_.size()) return a.c_.size() < b.c_.size();
        for (std::size_t i = a.c_.size(); i-- > 0;)
            if (a.c_[i] != b.c_[i]) return a.c_[i] < b.c_[i];
        return false;
    }

    std::string str(const char* var = "b") const {
        if (is_zero()) return "0";
        std::string s;
        for (std::size_t i = c_.size(); i-- > 0;) {
            if (c_[i] == 0) continue;
            std::string coef = c_[i].get_str();
            if (!s.empty()) {
                if (coef[0] == '-') { s += " - "; coef.erase(0, 1); }
                else s += " + ";
            }
            if (i == 0) { s += coef; continue; }
            if (coef == "-1") s += "-";
            else if (coef != "1") s += coef + "*";
            s += var;
            if (i > 1) s += "^" + std::to_string(i);
        }
        return s;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<mpz_class> c_;
};

/// Element of Q(beta): an integer polynomial over a factored denominator
/// den_const * prod f_i^{e_i}, each f_i primitive with positive leading coefficient.
/// After normalization no f_i divides the numerator and the integer contents are coprime.
/// Equality falls back to cross-multiplication, so it is exact even if two stored
/// factors share a common divisor.
class RationalFunction {
public:
    RationalFunction() = default;
    RationalFunction(long v) : num_(IntPoly::constant(v)) {}  // NOLINT: implicit from integers
    explicit RationalFunction(mpq_class q) {
        if (q.get_den() == 0) throw std::domain_error("RationalFunction: zero denominator");
        q.canonicalize();
        num_ = IntPoly::constant(q.get_num());
        den_const_ = q.get_den();
    }
    RationalFunction(long n, long d) : RationalFunction(mpq_class(n, d)) {}
    /// num / den with both given as polynomials in beta.
    static RationalFunction ratio(const IntPoly& num, const IntPoly& den) {
        RationalFunction n;
        n.num_ = num;
        n.normalize();
        RationalFunction d;
        d.num_ = den;
        return n / d;
    }

    static RationalFunction beta() {
        RationalFunction r;
        r.num_ = IntPoly::x();
        return r;
    }

    bool is_zero() const noexcept { return num_.is_zero(); }
    const IntPoly& numerator() const noexcept { return num_; }

    IntPoly expanded_denominator() const {
        IntPoly d = IntPoly::constant(den_const_);
        for (const auto& [f, e] : factors_) d = d * f.pow(e);
        return d;
    }

    bool is_rational() const noexcept { return factors_.empty() && num_.degree() <= 0; }
    mpq_class as_rational() const {
        if (!is_rational()) throw std::domain_error("RationalFunction: not a constant");
        mpq_class q(num_.is_zero() ? mpz_class(0) : num_[0], den_const_);
        q.canonicalize();
        return q;
    }

    double evaluate(double b) const {
        double d = den_const_.get_d();
        for (const auto& [f, e] : factors_) {
            const double fv = f.evaluate(b);
            for (int i = 0; i < e; ++i) d *= fv;
        }
        return num_.evaluate(b) / d;
    }

    mpq_class evaluate(const mpq_class& b) const {
        mpq_class d(den_const_);
        for (const auto& [f, e] : factors_) {
            const mpq_class fv = f.evaluate(b);
            for (int i = 0; i < e; ++i) d *= fv;
        }
        if (d == 0) throw std::domain_error("RationalFunction: pole at evaluation point");
        return num_.evaluate(b) / d;
    }

    RationalFunction operator-() const {
        RationalFunction r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        RationalFunction r;
        mpz_lcm(r.den_const_.get_mpz_t(), a.den_const_.get_mpz_t(), b.den_const_.get_mpz_t());
        IntPoly ca = IntPoly::constant(r.den_const_ / a.den_const_);
        IntPoly cb = IntPoly::constant(r.den_const_ / b.den_const_);
        r.factors_ = a.factors_;
        for (const auto& [f, e] : b.factors_) {
            auto& slot = r.factors_[f];
            slot = std::max(slot, e);
        }
        for (const auto& [f, e] : r.factors_) {
            const auto ia = a.factors_.find(f);
            const int ea = e - (ia == a.factors_.end() ? 0 : ia->second);
            if (ea > 0) ca = ca * f.pow(ea);
            const auto ib = b.factors_.find(f);
            const int eb = e - (ib == b.factors_.end() ? 0 : ib->second);
            if (eb > 0) cb = cb * f.pow(eb);
        }
        r.num_ = a.num_ * ca + b.num_ * cb;
        r.normalize();
        return r;
    }
    friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
        return a + (-b);
    }

    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero() || b.is_zero()) return {};
        RationalFunction r;
        r.num_ = a.num_ * b.num_;
        r.den_const_ = a.den_const_ * b.den_const_;
        r.factors_ = a.factors_;
        for (const auto& [f, e] : b.factors_) r.factors_[f] += e;
        r.normalize();
        return r;
    }

    RationalFunction inverse() const {
        if (is_zero()) throw std::domain_error("RationalFunction: division by zero");
        RationalFunction r;
        r.num_ = IntPoly::constant(den_const_);
        for (const auto& [f, e] : factors_) r.num_ = r.num_ * f.pow(e);
        // Split the old numerator into content, rational linear factors and a remainder.
        mpz_class cont = num_.content();
        IntPoly rest = num_.divexact(cont);
        if (rest.lc() < 0) {
            rest = -rest;
            r.num_ = -r.num_;
        }
        r.den_const_ = cont;
        for (auto& lin : split_rational_roots(rest)) r.factors_[lin.first] += lin.second;
        if (rest.degree() >= 1) r.factors_[rest] += 1;
        r.normalize();
        return r;
    }

    friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
        return a * b.inverse();
    }

    RationalFunction& operator+=(const RationalFunction& o) { return *this = *this + o; }
    RationalFunction& operator-=(const RationalFunction& o) { return *this = *this - o; }
    RationalFunction& operator*=(const RationalFunction& o) { return *this = *this * o; }
    RationalFunction& operator/=(const RationalFunction& o) { return *this = *this / o; }

    friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
        if (a.num_ == b.num_ && a.den_const_ == b.den_const_ && a.factors_ == b.factors_) return true;
        if (a.is_zero() != b.is_zero()) return false;
        return a.num_ * b.expanded_denominator() == b.num_ * a.expanded_denominator();
    }

    std::string str() const {
        const std::string n = num_.str();
        if (factors_.empty() && den_const_ == 1) return n;
        std::string d = den_const_ == 1 ? "" : den_const_.get_str();
        for (const auto& [f, e] : factors_) {
            if (!d.empty()) d += "*";
            d += "(" + f.str() + ")";
            if (e > 1) d += "^" + std::to_string(e);
        }
        return "(" + n + ")/" + (d.empty() ? "1" : d);
    }

private:
    void normalize() {
        if (num_.is_zero()) {
            den_const_ = 1;
            factors_.clear();
            return;
        }
        for (auto it = factors_.begin(); it != factors_.end();) {
            while (it->second > 0) {
                auto q = num_.exact_quotient(it->first);
                if (!q) break;
                num_ = std::move(*q);
                --it->second;
            }
            it = it->second == 0 ? factors_.erase(it) : std::next(it);
        }
        mpz_class g = num_.content();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), den_const_.get_mpz_t());
        if (g != 1) {
            num_ = num_.divexact(g);
            mpz_divexact(den_const_.get_mpz_t(), den_const_.get_mpz_t(), g.get_mpz_t());
        }
    }

    /// Removes rational linear factors (a*x + b, a > 0, gcd(a,b) = 1) from a primitive
    /// polynomial with positive leading coefficient. Candidate roots come from the
    /// rational-root theorem; skipped when the end coefficients are too large to factor.
    static std::vector<std::pair<IntPoly, int>> split_rational_roots(IntPoly& p) {
        std::vector<std::pair<IntPoly, int>> out;
        int zero_mult = 0;
        while (p.degree() >= 1 && p[0] == 0) {
            p = *p.exact_quotient(IntPoly::x());
            ++zero_mult;
        }
        if (zero_mult) out.emplace_back(IntPoly::x(), zero_mult);
        if (p.degree() < 1) return out;
        const auto small = [](const mpz_class& v) { return abs(v) < 1000000; };
        if (!small(p[0]) || !small(p.lc())) return out;
        const auto divisors = [](long v) {
            std::vector<long> d;
            v = v < 0 ? -v : v;
            for (long i = 1; i * i <= v; ++i)
                if (v % i == 0) {
                    d.push_back(i);
                    if (i != v / i) d.push_back(v / i);
                }
            return d;
        };
        const auto num_divs = divisors(p[0].get_si());
        const auto den_divs = divisors(p.lc().get_si());
        for (long a : den_divs) {
            for (long b : num_divs) {
                for (long sb : {b, -b}) {
                    if (std::gcd(a, sb < 0 ? -sb : sb) != 1) continue;
                    const IntPoly lin = IntPoly::linear(a, sb);
                    int mult = 0;
                    while (p.degree() >= 1) {
                        auto q = p.exact_quotient(lin);
                        if (!q) break;
                        p = std::move(*q);
                        ++mult;
                    }
                    if (mult) out.emplace_back(lin, mult);
                }
            }
        }
        return out;
    }

    IntPoly num_;
    mpz_class den_const_ = 1;
    std::map<IntPoly, int> factors_;
};

}  // namespace conexp
