#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conexp/beta.hpp"
#include "conexp/scalar.hpp"
#include "conexp/term.hpp"

namespace conexp {

class ModeMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TermNotInTrhs : public std::domain_error {
public:
    explicit TermNotInTrhs(const TermIndex& t)
        : std::domain_error("term not in T_rhs: " + describe(t)), term(t) {}
    TermIndex term;

private:
    static std::string describe(const TermIndex& t) {
        return "(a=" + std::to_string(t.a) + ",k=" + std::to_string(t.k) + ",m=" + std::to_string(t.m) +
               ",l=" + std::to_string(t.l) + "," + to_string(t.parity) + ")";
    }
};

class MissingConstantTerm : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InsufficientDegree : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Map key: the basis term plus the power s of the formal unit u = beta^{1/beta}.
/// Float-mode expansions fold u into the coefficient and always carry s = 0.
struct TermKey {
    TermIndex term;
    int u_power = 0;

    friend bool operator==(const TermKey&, const TermKey&) = default;
    friend auto operator<=>(const TermKey& x, const TermKey& y) {
        if (auto c = x.term <=> y.term; c != 0) return c;
        return x.u_power <=> y.u_power;
    }
};

inline bool is_constant_term(const TermIndex& t) { return t == TermIndex{}; }

/// Finite linear combination of cone-expansion terms, with remainder order Q.
/// Canonical: no zero coefficients; every stored exponent is numerically below Q.
template <Scalar F>
class Expansion {
public:
    using Traits = ScalarTraits<F>;
    using Map = std::map<TermKey, F>;

    explicit Expansion(const Beta& beta, Order order = Order::inf()) : beta_(beta), order_(order) {}

    static Expansion constant(const Beta& beta, const F& c, Order order = Order::inf()) {
        Expansion e(beta, order);
        e.add_term(TermIndex{}, c);
        return e;
    }

    static Expansion monomial(const Beta& beta, const TermIndex& t, const F& c, int u_power = 0,
                              Order order = Order::inf()) {
        Expansion e(beta, order);
        e.add_term(t, c, u_power);
        return e;
    }

    const Beta& beta() const noexcept { return beta_; }
    const Order& order() const noexcept { return order_; }
    const Map& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }

    /// Accumulates c into the coefficient of (t, u_power); terms at or above Q are dropped.
    void add_term(const TermIndex& t, const F& c, int u_power = 0) {
        require_well_formed(t);
        if (Traits::is_zero(c) || !order_.admits(t.exponent(), beta_)) return;
        if constexpr (!Traits::exact) u_power = 0;
        const TermKey key{t, u_power};
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            terms_.emplace(key, c);
            return;
        }
        it->second += c;
        if (Traits::is_zero(it->second)) terms_.erase(it);
    }

    F coefficient(const TermIndex& t, int u_power = 0) const {
        auto it = terms_.find(TermKey{t, u_power});
        return it == terms_.end() ? Traits::from_int(0) : it->second;
    }

    F constant_term() const { return coefficient(TermIndex{}); }

    /// Lowers Q to min(Q, q) and drops terms that no longer fit.
    Expansion truncated(Order q) const {
        Expansion r(beta_, min(order_, q, beta_));
        for (const auto& [key, c] : terms_)
            if (r.order_.admits(key.term.exponent(), beta_)) r.terms_.emplace(key, c);
        return r;
    }

    /// Smallest stored exponent (nullopt when empty).
    std::optional<Exponent> min_exponent() const {
        std::optional<Exponent> best;
        for (const auto& [key, c] : terms_) {
            const Exponent x = key.term.exponent();
            if (!best || compare(x, *best, beta_) < 0) best = x;
        }
        return best;
    }

    /// Smallest exponent among terms other than the constant.
    std::optional<Exponent> nonconstant_min_exponent() const {
        std::optional<Exponent> best;
        for (const auto& [key, c] : terms_) {
            if (is_constant_term(key.term) && key.u_power == 0) continue;
            const Exponent x = key.term.exponent();
            if (!best || compare(x, *best, beta_) < 0) best = x;
        }
        return best;
    }

    Expansion without_constant() const {
        Expansion r = *this;
        r.terms_.erase(TermKey{TermIndex{}, 0});
        return r;
    }

    /// Pointwise value at (rho, theta) with beta taken numerically.
    std::complex<double> evaluate(double rho, double theta) const {
        const double b = beta_.value();
        const double u = std::pow(b, 1.0 / b);
        const double lg = std::log(rho);
        std::complex<double> sum = 0.0;
        for (const auto& [key, c] : terms_) {
            const auto& t = key.term;
            double basis = std::pow(rho, t.exponent().value(beta_)) * std::pow(lg, t.m) *
                           (t.parity == Parity::Cos ? std::cos(t.l * theta) : std::sin(t.l * theta));
            if (key.u_power) basis *= std::pow(u, key.u_power);
            sum += Traits::value(c, beta_) * basis;
        }
        return sum;
    }
    double evaluate_real(double rho, double theta) const { return evaluate(rho, theta).real(); }

    friend bool operator==(const Expansion& x, const Expansion& y) {
        return x.beta_ == y.beta_ && x.order_ == y.order_ && x.terms_ == y.terms_;
    }
    /// Equality of the stored terms only, ignoring Q.
    bool same_terms(const Expansion& o) const { return beta_ == o.beta_ && terms_ == o.terms_; }

    std::string str() const {
        std::string s;
        for (const auto& [key, c] : terms_) {
            if (!s.empty()) s += " + ";
            s += Traits::str(c) + "*" + (key.u_power ? "u^" + std::to_string(key.u_power) + "*" : "") +
                 key.term.str();
        }
        return (s.empty() ? "0" : s) + " + O~" + order_.str();
    }

private:
    template <Scalar G>
    friend class Expansion;

    Beta beta_;
    Order order_;
    Map terms_;
};

namespace detail {

inline Order add_orders(const Order& x, const Order& y) {
    if (x.infinite || y.infinite) return Order::inf();
    return Order::at(x.e + y.e);
}

template <Scalar F>
void require_same_beta(const Expansion<F>& x, const Expansion<F>& y) {
    if (!(x.beta() == y.beta()))
        throw ModeMismatch("expansions have different beta: " + x.beta().str() + " vs " + y.beta().str());
}

/// sigma = a + k/beta as a scalar.
template <Scalar F>
F sigma(const Exponent& x, const Beta& b) {
    using T = ScalarTraits<F>;
    return T::from_int(x.a) + T::from_int(x.k) / T::beta(b);
}

/// Stored exponent used by the product truncation rule; an empty expansion contributes its Q.
template <Scalar F>
Order lowest(const Expansion<F>& e) {
    if (auto x = e.min_exponent()) return Order::at(*x);
    return e.order();
}

}  // namespace detail

template <Scalar F>
Expansion<F> add(const Expansion<F>& x, const Expansion<F>& y) {
    detail::require_same_beta(x, y);
    Expansion<F> r(x.beta(), min(x.order(), y.order(), x.beta()));
    for (const auto& [key, c] : x.terms()) r.add_term(key.term, c, key.u_power);
    for (const auto& [key, c] : y.terms()) r.add_term(key.term, c, key.u_power);
    return r;
}

template <Scalar F>
Expansion<F> scale(const Expansion<F>& x, const F& s) {
    Expansion<F> r(x.beta(), x.order());
    if (ScalarTraits<F>::is_zero(s)) return r;
    for (const auto& [key, c] : x.terms()) r.add_term(key.term, c * s, key.u_power);
    return r;
}

template <Scalar F>
Expansion<F> negate(const Expansion<F>& x) {
    return scale(x, ScalarTraits<F>::from_int(-1));
}

template <Scalar F>
Expansion<F> subtract(const Expansion<F>& x, const Expansion<F>& y) {
    return add(x, negate(y));
}

template <Scalar F>
Expansion<F> mul(const Expansion<F>& x, const Expansion<F>& y) {
    using T = ScalarTraits<F>;
    detail::require_same_beta(x, y);
    const Beta& b = x.beta();
    Order q = min(detail::add_orders(x.order(), detail::lowest(y)), detail::add_orders(y.order(), detail::lowest(x)), b);
    q = min(q, detail::add_orders(x.order(), y.order()), b);
    Expansion<F> r(b, q);
    const F half = T::from_ratio(1, 2);
    for (const auto& [kx, cx] : x.terms()) {
        for (const auto& [ky, cy] : y.terms()) {
            const TermIndex& s = kx.term;
            const TermIndex& t = ky.term;
            const Exponent e = s.exponent() + t.exponent();
            if (!q.admits(e, b)) continue;
            const int m = s.m + t.m;
            const int u = kx.u_power + ky.u_power;
            const F c = cx * cy;
            const int sum = s.l + t.l;
            const int diff = s.l - t.l;
            const int adiff = diff < 0 ? -diff : diff;
            const auto put = [&](int l, Parity p, const F& coef) {
                if (l == 0 && p == Parity::Sin) return;
                r.add_term(TermIndex{e.a, e.k, m, l, p}, coef, u);
            };
            // sin(A-B) with A-B < 0 flips sign.
            const F sdiff = diff < 0 ? -c * half : c * half;
            if (s.l == 0 && s.parity == Parity::Cos) {
                put(t.l, t.parity, c);
            } else if (t.l == 0 && t.parity == Parity::Cos) {
                put(s.l, s.parity, c);
            } else if (s.parity == Parity::Cos && t.parity == Parity::Cos) {
                put(adiff, Parity::Cos, c * half);
                put(sum, Parity::Cos, c * half);
            } else if (s.parity == Parity::Sin && t.parity == Parity::Sin) {
                put(adiff, Parity::Cos, c * half);
                put(sum, Parity::Cos, -c * half);
            } else if (s.parity == Parity::Sin) {  // sin A cos B
                put(sum, Parity::Sin, c * half);
                put(adiff, Parity::Sin, sdiff);
            } else {  // cos A sin B
                put(sum, Parity::Sin, c * half);
                put(adiff, Parity::Sin, -sdiff);
            }
        }
    }
    return r;
}

template <Scalar F>
Expansion<F> operator+(const Expansion<F>& x, const Expansion<F>& y) { return add(x, y); }
template <Scalar F>
Expansion<F> operator-(const Expansion<F>& x, const Expansion<F>& y) { return subtract(x, y); }
template <Scalar F>
Expansion<F> operator*(const Expansion<F>& x, const Expansion<F>& y) { return mul(x, y); }

template <Scalar F>
Expansion<F> d_rho(const Expansion<F>& x) {
    using T = ScalarTraits<F>;
    const Beta& b = x.beta();
    Expansion<F> r(b, x.order() - Exponent{1, 0});
    for (const auto& [key, c] : x.terms()) {
        const TermIndex& t = key.term;
        const F sg = detail::sigma<F>(t.exponent(), b);
        r.add_term(TermIndex{t.a - 1, t.k, t.m, t.l, t.parity}, c * sg, key.u_power);
        if (t.m > 0) r.add_term(TermIndex{t.a - 1, t.k, t.m - 1, t.l, t.parity}, c * T::from_int(t.m), key.u_power);
    }
    return r;
}

template <Scalar F>
Expansion<F> d_theta_over_rho(const Expansion<F>& x) {
    using T = ScalarTraits<F>;
    Expansion<F> r(x.beta(), x.order() - Exponent{1, 0});
    for (const auto& [key, c] : x.terms()) {
        const TermIndex& t = key.term;
        if (t.l == 0) continue;
        const Parity p = t.parity == Parity::Cos ? Parity::Sin : Parity::Cos;
        const long sgn = t.parity == Parity::Cos ? -t.l : t.l;
        r.add_term(TermIndex{t.a - 1, t.k, t.m, t.l, p}, c * T::from_int(sgn), key.u_power);
    }
    return r;
}

/// Cone Laplacian d_rho^2 + rho^{-1} d_rho + beta^{-2} rho^{-2} d_theta^2, termwise.
template <Scalar F>
Expansion<F> laplacian(const Expansion<F>& x) {
    using T = ScalarTraits<F>;
    const Beta& b = x.beta();
    const F bb = T::beta(b);
    Expansion<F> r(b, x.order() - Exponent{2, 0});
    for (const auto& [key, c] : x.terms()) {
        const TermIndex& t = key.term;
        const F sg = detail::sigma<F>(t.exponent(), b);
        const F l2 = T::from_int(static_cast<long>(t.l) * t.l) / (bb * bb);
        const auto put = [&](int m, const F& coef) {
            r.add_term(TermIndex{t.a - 2, t.k, m, t.l, t.parity}, c * coef, key.u_power);
        };
        put(t.m, sg * sg - l2);
        if (t.m >= 1) put(t.m - 1, T::from_int(2L * t.m) * sg);
        if (t.m >= 2) put(t.m - 2, T::from_int(static_cast<long>(t.m) * (t.m - 1)));
    }
    return r;
}

/// Constructive inverse of the cone Laplacian on Span(T_rhs). Non-resonant targets
/// (exponent of the preimage != l/beta) use the same log power; resonant ones raise it by one.
/// Lower-log residues are peeled off by processing the highest log power first.
template <Scalar F>
Expansion<F> invert_laplacian(const Expansion<F>& v) {
    using T = ScalarTraits<F>;
    const Beta& b = v.beta();
    for (const auto& [key, c] : v.terms())
        if (!is_in_Trhs(key.term)) throw TermNotInTrhs(key.term);

    const F bb = T::beta(b);
    Expansion<F> u(b, v.order() + Exponent{2, 0});
    std::map<TermKey, F> pending(v.terms().begin(), v.terms().end());
    const auto subtract_pending = [&](const TermKey& key, const F& coef) {
        if (T::is_zero(coef)) return;
        auto [it, fresh] = pending.try_emplace(key, -coef);
        if (!fresh) {
            it->second -= coef;
            if (T::is_zero(it->second)) pending.erase(it);
        }
    };

    while (!pending.empty()) {
        auto pick = pending.begin();
        for (auto it = pending.begin(); it != pending.end(); ++it)
            if (it->first.term.m > pick->first.term.m) pick = it;
        const TermKey key = pick->first;
        const F c = pick->second;
        pending.erase(pick);

        const TermIndex& t = key.term;
        const Exponent up{t.a + 2, t.k};
        const F sg = detail::sigma<F>(up, b);
        const auto lower = [&](int m, const F& coef) {
            subtract_pending(TermKey{TermIndex{t.a, t.k, m, t.l, t.parity}, key.u_power}, coef);
        };
        if (up.a != 0 || t.k != t.l) {
            const F denom = sg * sg - T::from_int(static_cast<long>(t.l) * t.l) / (bb * bb);
            if (T::is_zero(denom)) throw std::logic_error("invert_laplacian: vanishing non-resonant denominator");
            const F coef = c / denom;
            u.add_term(TermIndex{up.a, up.k, t.m, t.l, t.parity}, coef, key.u_power);
            if (t.m >= 1) lower(t.m - 1, T::from_int(2L * t.m) * sg * coef);
            if (t.m >= 2) lower(t.m - 2, T::from_int(static_cast<long>(t.m) * (t.m - 1)) * coef);
        } else {
            if (t.l == 0) throw TermNotInTrhs(t);
            const int m1 = t.m + 1;
            const F coef = c * bb / T::from_int(2L * t.l * m1);
            u.add_term(TermIndex{up.a, up.k, m1, t.l, t.parity}, coef, key.u_power);
            if (t.m >= 1) lower(t.m - 1, T::from_int(static_cast<long>(m1) * t.m) * coef);
        }
    }
    return u;
}

template <Scalar F>
Expansion<Complex<F>> complexify(const Expansion<F>& x) {
    Expansion<Complex<F>> r(x.beta(), x.order());
    for (const auto& [key, c] : x.terms()) r.add_term(key.term, Complex<F>(c), key.u_power);
    return r;
}

template <Scalar F>
Expansion<F> real_part(const Expansion<Complex<F>>& x) {
    Expansion<F> r(x.beta(), x.order());
    for (const auto& [key, c] : x.terms()) r.add_term(key.term, c.re, key.u_power);
    return r;
}

template <Scalar F>
Expansion<F> imag_part(const Expansion<Complex<F>>& x) {
    Expansion<F> r(x.beta(), x.order());
    for (const auto& [key, c] : x.terms()) r.add_term(key.term, c.im, key.u_power);
    return r;
}

template <Scalar F>
Expansion<Complex<F>> conjugate(const Expansion<Complex<F>>& x) {
    Expansion<Complex<F>> r(x.beta(), x.order());
    for (const auto& [key, c] : x.terms()) r.add_term(key.term, c.conj(), key.u_power);
    return r;
}

/// P f * conj(P) g with P = |z1|^{1-beta} d/dz1, written through d_rho and rho^{-1} d_theta:
/// 1/4 [f_r g_r + beta^{-2} f_t g_t + i beta^{-1} (f_r g_t - f_t g_r)].
template <Scalar F>
Expansion<Complex<F>> p_pair(const Expansion<Complex<F>>& f, const Expansion<Complex<F>>& g) {
    using C = Complex<F>;
    using T = ScalarTraits<C>;
    detail::require_same_beta(f, g);
    const C inv_b = T::from_int(1) / T::beta(f.beta());
    const auto fr = d_rho(f), ft = d_theta_over_rho(f);
    const auto gr = d_rho(g), gt = d_theta_over_rho(g);
    auto sum = mul(fr, gr) + scale(mul(ft, gt), inv_b * inv_b);
    sum = sum + scale(mul(fr, gt) - mul(ft, gr), C::i() * inv_b);
    return scale(sum, T::from_ratio(1, 4));
}

/// z1^p conj(z1)^q with z1 = beta^{1/beta} rho^{1/beta} e^{i theta}. Exact mode keeps the
/// factor beta^{(p+q)/beta} as u^{p+q}; float mode multiplies it in.
template <Scalar F>
Expansion<Complex<F>> expand_smooth_monomial(const Beta& beta, int p, int q) {
    if (p < 0 || q < 0) throw std::invalid_argument("expand_smooth_monomial: negative degree");
    using C = Complex<F>;
    using T = ScalarTraits<C>;
    Expansion<C> r(beta);
    const int k = p + q;
    const int l = p > q ? p - q : q - p;
    C unit = T::from_int(1);
    int u_power = k;
    if constexpr (!T::exact) {
        unit = C(std::pow(std::pow(beta.value(), 1.0 / beta.value()), k));
        u_power = 0;
    }
    r.add_term(TermIndex{0, k, 0, l, Parity::Cos}, unit, u_power);
    if (l > 0) {
        const C isgn = p > q ? C::i() : -C::i();
        r.add_term(TermIndex{0, k, 0, l, Parity::Sin}, isgn * unit, u_power);
    }
    return r;
}

/// Taylor data of a smooth F(x_1..x_N) around the constant terms of its arguments:
/// coefficients D^alpha F(c) / alpha! for |alpha| <= degree.
template <Scalar F>
struct TaylorPolynomial {
    int arity = 1;
    int degree = 0;
    std::map<std::vector<int>, F> coeffs;
};

/// exp around c, one variable.
template <Scalar F>
TaylorPolynomial<F> exp_taylor(const F& c, int degree) {
    using T = ScalarTraits<F>;
    TaylorPolynomial<F> tp{1, degree, {}};
    const F ec = T::exp(c);
    F fact = T::from_int(1);
    for (int n = 0; n <= degree; ++n) {
        if (n > 0) fact = fact * T::from_int(n);
        tp.coeffs[{n}] = ec / fact;
    }
    return tp;
}

/// F(c + u) = sum_{|alpha| <= d} D^alpha F(c)/alpha! prod u_i^{alpha_i}, truncated at q.
template <Scalar F>
Expansion<F> compose_smooth(const TaylorPolynomial<F>& taylor, const std::vector<Expansion<F>>& args, Order q) {
    using T = ScalarTraits<F>;
    if (args.empty()) throw std::invalid_argument("compose_smooth: no arguments");
    if (static_cast<int>(args.size()) != taylor.arity)
        throw std::invalid_argument("compose_smooth: arity mismatch");
    const Beta& b = args.front().beta();
    Order eff = q;
    std::optional<Exponent> smin;
    std::vector<Expansion<F>> dev;
    for (const auto& a : args) {
        detail::require_same_beta(args.front(), a);
        eff = min(eff, a.order(), b);
        Expansion<F> d = a.without_constant();
        if (auto x = d.min_exponent()) {
            if (x->scaled(b) <= 0)
                throw MissingConstantTerm("compose_smooth: argument has a nonconstant term of exponent <= 0");
            if (!smin || compare(*x, *smin, b) < 0) smin = x;
        }
        dev.push_back(std::move(d));
    }
    if (smin && !eff.infinite && (taylor.degree * smin->scaled(b) < eff.e.scaled(b)))
        throw InsufficientDegree("compose_smooth: degree " + std::to_string(taylor.degree) +
                                 " too small for order " + eff.str());
    if (smin && eff.infinite)
        throw InsufficientDegree("compose_smooth: infinite order requested for a non-polynomial composition");

    // powers[i][n] = dev_i^n
    std::vector<std::vector<Expansion<F>>> powers(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) {
        powers[i].push_back(Expansion<F>::constant(b, T::from_int(1), eff));
        for (int n = 1; n <= taylor.degree; ++n) powers[i].push_back(mul(powers[i].back(), dev[i]).truncated(eff));
    }
    Expansion<F> r(b, eff);
    for (const auto& [alpha, coef] : taylor.coeffs) {
        if (T::is_zero(coef)) continue;
        int total = 0;
        for (int n : alpha) total += n;
        if (total > taylor.degree) continue;
        Expansion<F> term = Expansion<F>::constant(b, coef, eff);
        for (std::size_t i = 0; i < alpha.size(); ++i)
            if (alpha[i] > 0) term = mul(term, powers[i][alpha[i]]).truncated(eff);
        r = add(r, term);
    }
    return r.truncated(eff);
}

/// Smallest d with d * sigma_min >= q.
inline int composition_degree(Exponent smin, Order q, const Beta& b) {
    if (q.infinite) throw InsufficientDegree("composition_degree: infinite order");
    const auto s = smin.scaled(b);
    const auto target = q.e.scaled(b);
    if (target <= 0) return 0;
    return static_cast<int>((target + s - 1) / s);
}

/// exp(arg) to order q with the degree chosen to meet the composition contract.
template <Scalar F>
Expansion<F> compose_exp(const Expansion<F>& arg, Order q) {
    const Order eff = min(q, arg.order(), arg.beta());
    const auto smin = arg.nonconstant_min_exponent();
    int degree = 0;
    if (smin && smin->scaled(arg.beta()) > 0) degree = composition_degree(*smin, eff, arg.beta());
    return compose_smooth(exp_taylor(arg.constant_term(), degree), {arg}, eff);
}

/// Exact-to-float conversion: coefficients evaluated at beta, u^s folded in.
template <Scalar F>
Expansion<double> to_float(const Expansion<F>& x) {
    const Beta& b = x.beta();
    const double u = std::pow(b.value(), 1.0 / b.value());
    Expansion<double> r(b, x.order());
    for (const auto& [key, c] : x.terms()) {
        if constexpr (ScalarTraits<F>::complex)
            r.add_term(key.term, ScalarTraits<F>::value(c, b).real() * std::pow(u, key.u_power));
        else
            r.add_term(key.term, ScalarTraits<F>::real_value(c, b) * std::pow(u, key.u_power));
    }
    return r;
}

}  // namespace conexp
