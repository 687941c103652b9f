#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "conexp/beta.hpp"

namespace conexp {

enum class Parity : std::uint8_t { Cos = 0, Sin = 1 };

inline const char* to_string(Parity p) { return p == Parity::Cos ? "cos" : "sin"; }

inline Parity parse_parity(const std::string& s) {
    if (s == "cos") return Parity::Cos;
    if (s == "sin") return Parity::Sin;
    throw std::invalid_argument("parity must be \"cos\" or \"sin\", got \"" + s + "\"");
}

/// Formal exponent a + k/beta, kept as the integer pair (a, k).
struct Exponent {
    int a = 0;
    int k = 0;

    friend bool operator==(const Exponent&, const Exponent&) = default;
    friend Exponent operator+(Exponent x, Exponent y) { return {x.a + y.a, x.k + y.k}; }
    friend Exponent operator-(Exponent x, Exponent y) { return {x.a - y.a, x.k - y.k}; }
    friend Exponent operator*(int n, Exponent x) { return {n * x.a, n * x.k}; }

    double value(const Beta& b) const { return a + k / b.value(); }
    /// beta.num * (a + k/beta) = a*num + k*den, an exact integer proxy for ordering.
    std::int64_t scaled(const Beta& b) const { return a * b.num() + k * b.den(); }
};

/// Numeric order at beta with (a, k)-lexicographic tie-breaking.
inline std::strong_ordering compare(Exponent x, Exponent y, const Beta& b) {
    if (auto c = x.scaled(b) <=> y.scaled(b); c != 0) return c;
    return std::tie(x.a, x.k) <=> std::tie(y.a, y.k);
}

/// Purely numeric comparison, ignoring the tie-break.
inline bool numerically_less(Exponent x, Exponent y, const Beta& b) { return x.scaled(b) < y.scaled(b); }

/// Truncation order Q of an expansion; infinite means the expansion is exact.
struct Order {
    bool infinite = true;
    Exponent e{};

    static Order inf() { return {}; }
    static Order at(Exponent x) { return {false, x}; }
    static Order at(int a, int k = 0) { return {false, {a, k}}; }

    friend bool operator==(const Order&, const Order&) = default;
    friend Order operator+(Order o, Exponent x) { return o.infinite ? o : at(o.e + x); }
    friend Order operator-(Order o, Exponent x) { return o.infinite ? o : at(o.e - x); }

    /// True iff a term of exponent x is below this order (stored terms satisfy this strictly).
    bool admits(Exponent x, const Beta& b) const { return infinite || numerically_less(x, e, b); }
    double value(const Beta& b) const { return infinite ? 1e300 : e.value(b); }
    std::string str() const {
        return infinite ? "inf" : "(" + std::to_string(e.a) + "," + std::to_string(e.k) + ")";
    }
};

inline Order min(const Order& x, const Order& y, const Beta& b) {
    if (x.infinite) return y;
    if (y.infinite) return x;
    return compare(x.e, y.e, b) <= 0 ? x : y;
}

/// One basis function rho^{a + k/beta} (log rho)^m trig(l theta).
struct TermIndex {
    int a = 0;
    int k = 0;
    int m = 0;
    int l = 0;
    Parity parity = Parity::Cos;

    Exponent exponent() const { return {a, k}; }
    bool well_formed() const { return k >= 0 && m >= 0 && l >= 0 && !(parity == Parity::Sin && l == 0); }

    friend bool operator==(const TermIndex&, const TermIndex&) = default;
    friend auto operator<=>(const TermIndex& x, const TermIndex& y) {
        return std::tie(x.a, x.k, x.m, x.l, x.parity) <=> std::tie(y.a, y.k, y.m, y.l, y.parity);
    }

    std::string str() const {
        return "rho^(" + std::to_string(a) + "+" + std::to_string(k) + "/b)" +
               (m ? " log^" + std::to_string(m) : std::string()) + " " + to_string(parity) + "(" +
               std::to_string(l) + "t)";
    }
    friend std::ostream& operator<<(std::ostream& os, const TermIndex& t) {
        return os << "(a=" << t.a << ",k=" << t.k << ",m=" << t.m << ",l=" << t.l << ","
                  << to_string(t.parity) << ")";
    }
};

inline void require_well_formed(const TermIndex& t) {
    if (!t.well_formed()) {
        throw std::invalid_argument("malformed term (a=" + std::to_string(t.a) + ",k=" + std::to_string(t.k) +
                                    ",m=" + std::to_string(t.m) + ",l=" + std::to_string(t.l) + ")");
    }
}

/// Angular part and log bound shared by both basis families: k >= l, k - l even,
/// m <= max{0, k - 1}.
inline bool satisfies_angular_and_log_bounds(const TermIndex& t) {
    return t.k >= t.l && (t.k - t.l) % 2 == 0 && t.m <= std::max(0, t.k - 1);
}

/// Membership in T_log: rho^{2j + k/beta}(log rho)^m cos/sin(l theta).
inline bool is_in_Tlog(const TermIndex& t) {
    if (!t.well_formed()) return false;
    return t.a >= 0 && t.a % 2 == 0 && satisfies_angular_and_log_bounds(t);
}

/// True for the resonant family rho^{k/beta - 2}(log rho)^{k-1} trig(k theta), k >= 1.
inline bool is_resonant_exclusion(const TermIndex& t) {
    return t.a == -2 && t.k >= 1 && t.l == t.k && t.m == t.k - 1;
}

/// Membership in T_rhs = rho^{-2} T_log minus rho^{-2} and the resonant family.
/// Both parities of the resonant family are excluded: neither has a preimage in T_log.
inline bool is_in_Trhs(const TermIndex& t) {
    if (!t.well_formed()) return false;
    const TermIndex lifted{t.a + 2, t.k, t.m, t.l, t.parity};
    if (!is_in_Tlog(lifted)) return false;
    if (t.a == -2 && t.k == 0 && t.m == 0 && t.l == 0) return false;
    return !is_resonant_exclusion(t);
}

}  // namespace conexp
