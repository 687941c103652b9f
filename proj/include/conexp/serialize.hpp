#pragma once

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "conexp/expansion.hpp"

namespace conexp {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Integers that fit in int64 are written as numbers, larger ones as decimal strings.
inline json mpz_to_json(const mpz_class& v) {
    if (v.fits_slong_p()) return v.get_si();
    return v.get_str();
}

inline mpz_class mpz_from_json(const json& j, const std::string& where) {
    if (j.is_number_integer()) return mpz_class(std::to_string(j.get<long long>()));
    if (j.is_string()) {
        mpz_class v;
        if (v.set_str(j.get<std::string>(), 10) != 0) throw FormatError(where + ": bad integer string");
        return v;
    }
    throw FormatError(where + ": expected an integer");
}

inline json poly_to_json(const IntPoly& p) {
    json a = json::array();
    for (const auto& c : p.coeffs()) a.push_back(mpz_to_json(c));
    if (a.empty()) a.push_back(0);
    return a;
}

inline IntPoly poly_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw FormatError(where + ": expected a nonempty integer array");
    std::vector<mpz_class> c;
    for (std::size_t i = 0; i < j.size(); ++i) c.push_back(mpz_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return IntPoly(std::move(c));
}

}  // namespace detail

/// Coefficient polynomials listed from the constant term upward, in the variable beta.
inline json to_json(const RationalFunction& r) {
    return json{{"num", detail::poly_to_json(r.numerator())}, {"den", detail::poly_to_json(r.expanded_denominator())}};
}

inline void coefficient_from_json(const json& j, RationalFunction& out, const std::string& where) {
    if (j.is_number_integer()) {
        out = RationalFunction(mpq_class(detail::mpz_from_json(j, where)));
        return;
    }
    if (j.is_string()) {
        mpq_class q;
        if (q.set_str(j.get<std::string>(), 10) != 0) throw FormatError(where + ": bad rational string");
        if (q.get_den() == 0) throw FormatError(where + ": zero denominator");
        q.canonicalize();
        out = RationalFunction(q);
        return;
    }
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw FormatError(where + ": expected {\"num\": [...], \"den\": [...]}");
    const IntPoly den = detail::poly_from_json(j["den"], where + ".den");
    if (den.is_zero()) throw FormatError(where + ".den: zero denominator");
    out = RationalFunction::ratio(detail::poly_from_json(j["num"], where + ".num"), den);
}

inline json to_json(double v) { return v; }

inline void coefficient_from_json(const json& j, double& out, const std::string& where) {
    if (j.is_number()) {
        out = j.get<double>();
        return;
    }
    if (j.is_object() && j.contains("num")) {
        throw FormatError(where + ": exact coefficient in a float-mode document; evaluate at beta first");
    }
    throw FormatError(where + ": expected a number");
}

inline json order_to_json(const Order& q) {
    if (q.infinite) return "inf";
    return json{{"a", q.e.a}, {"k", q.e.k}};
}

inline Order order_from_json(const json& j, const std::string& where) {
    if (j.is_string() && j.get<std::string>() == "inf") return Order::inf();
    if (!j.is_object() || !j.contains("a") || !j.contains("k") || !j["a"].is_number_integer() ||
        !j["k"].is_number_integer())
        throw FormatError(where + ": expected {\"a\": int, \"k\": int} or \"inf\"");
    return Order::at(j["a"].get<int>(), j["k"].get<int>());
}

template <Scalar F>
    requires(!ScalarTraits<F>::complex)
json to_json(const Expansion<F>& e) {
    json terms = json::array();
    for (const auto& [key, c] : e.terms()) {
        const TermIndex& t = key.term;
        terms.push_back(json{{"a", t.a},
                             {"k", t.k},
                             {"m", t.m},
                             {"l", t.l},
                             {"parity", to_string(t.parity)},
                             {"u_power", key.u_power},
                             {"coeff", to_json(c)}});
    }
    return json{{"beta", e.beta().str()}, {"order", order_to_json(e.order())}, {"terms", terms}};
}

template <Scalar F>
    requires(!ScalarTraits<F>::complex)
Expansion<F> expansion_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("expansion: expected an object");
    if (!j.contains("beta") || !j["beta"].is_string()) throw FormatError("expansion.beta: expected \"p/q\"");
    const Beta b = Beta::parse(j["beta"].get<std::string>());
    const Order q = j.contains("order") ? order_from_json(j["order"], "expansion.order") : Order::inf();
    Expansion<F> e(b, q);
    if (!j.contains("terms")) return e;
    if (!j["terms"].is_array()) throw FormatError("expansion.terms: expected an array");
    for (std::size_t i = 0; i < j["terms"].size(); ++i) {
        const json& t = j["terms"][i];
        const std::string where = "expansion.terms[" + std::to_string(i) + "]";
        const auto field = [&](const char* name, int dflt, bool required) {
            if (!t.contains(name)) {
                if (required) throw FormatError(where + "." + name + ": missing");
                return dflt;
            }
            if (!t[name].is_number_integer()) throw FormatError(where + "." + name + ": expected an integer");
            return t[name].get<int>();
        };
        TermIndex ti{field("a", 0, true), field("k", 0, true), field("m", 0, false), field("l", 0, false),
                     Parity::Cos};
        if (t.contains("parity")) ti.parity = parse_parity(t["parity"].get<std::string>());
        if (ti.k < 0 || ti.m < 0 || ti.l < 0) throw FormatError(where + ": k, m, l must be nonnegative");
        if (ti.parity == Parity::Sin && ti.l == 0) throw FormatError(where + ": sin requires l >= 1");
        const int u = field("u_power", 0, false);
        if (!t.contains("coeff")) throw FormatError(where + ".coeff: missing");
        F c{};
        coefficient_from_json(t["coeff"], c, where + ".coeff");
        if constexpr (ScalarTraits<F>::exact) {
            e.add_term(ti, c, u);
        } else {
            e.add_term(ti, c * std::pow(std::pow(b.value(), 1.0 / b.value()), u));
        }
    }
    return e;
}

/// Rows: exponent (numeric), a, k, log power, mode l, parity, u power, coefficient (numeric).
template <Scalar F>
void write_csv_table(std::ostream& os, const Expansion<F>& e) {
    os << "exponent,a,k,log_power,l,parity,u_power,coefficient,coefficient_exact\n";
    os.precision(17);
    const Beta& b = e.beta();
    const double u = std::pow(b.value(), 1.0 / b.value());
    for (const auto& [key, c] : e.terms()) {
        const TermIndex& t = key.term;
        const double v = ScalarTraits<F>::value(c, b).real() * std::pow(u, key.u_power);
        std::string exact = ScalarTraits<F>::exact ? ScalarTraits<F>::str(c) : "";
        if (ScalarTraits<F>::exact && key.u_power) exact += " * u^" + std::to_string(key.u_power);
        os << t.exponent().value(b) << ',' << t.a << ',' << t.k << ',' << t.m << ',' << t.l << ','
           << to_string(t.parity) << ',' << key.u_power << ',' << v << ",\"" << exact << "\"\n";
    }
}

}  // namespace conexp
