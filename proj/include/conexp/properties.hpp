#pragma once

// Invariant suites over the term algebra and the bootstrap, shared by `conexp check` and the
// acceptance binary. Reports contain no timings so identical inputs give identical output.

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "conexp/bootstrap.hpp"
#include "conexp/random.hpp"

namespace conexp::properties {

struct Counterexample {
    std::string suite;
    std::string beta;
    std::string detail;  // operands and offending term with full indices
};

struct SuiteReport {
    explicit SuiteReport(std::string n) : name(std::move(n)) {}

    std::string name;
    long long checked = 0;
    long long failures = 0;
    std::vector<Counterexample> examples;  // first few failures

    bool pass() const { return failures == 0; }
    void fail(Counterexample c, std::size_t keep = 20) {
        ++failures;
        if (examples.size() < keep) examples.push_back(std::move(c));
    }
};

using TermPredicate = std::function<bool(const TermIndex&)>;

struct Predicates {
    TermPredicate tlog = is_in_Tlog;
    TermPredicate trhs = is_in_Trhs;

    /// Deliberately wrong log bound m <= max{0, k - 2}, for testing the suites themselves.
    static Predicates mutated() {
        Predicates p;
        p.tlog = [](const TermIndex& t) { return is_in_Tlog(t) && t.m <= std::max(0, t.k - 2); };
        return p;
    }
};

namespace detail {

inline std::string show(const TermIndex& t) {
    return "(a=" + std::to_string(t.a) + ",k=" + std::to_string(t.k) + ",m=" + std::to_string(t.m) +
           ",l=" + std::to_string(t.l) + "," + to_string(t.parity) + ")";
}

// Products are structural; float coefficients are dyadic here so no term cancels spuriously.
inline void product_check(SuiteReport& rep, const Beta& b, const TermIndex& x, const TermIndex& y,
                          const Expansion<double>* pre, const TermPredicate& pred) {
    Expansion<double> p = mul(Expansion<double>::monomial(b, x, 1.0), Expansion<double>::monomial(b, y, 1.0));
    if (pre) p = mul(*pre, p);
    ++rep.checked;
    for (const auto& [key, c] : p.terms())
        if (!pred(key.term)) {
            rep.fail({rep.name, b.str(), show(x) + " * " + show(y) + " -> " + show(key.term)});
            return;
        }
}

}  // namespace detail

/// Random rational betas in (0, 1), distinct, deterministic in the seed.
inline std::vector<Beta> random_betas(gen::Rng& rng, int count, int max_den = 40) {
    std::vector<Beta> out;
    while (static_cast<int>(out.size()) < count) {
        const int den = gen::uniform_int(rng, 2, max_den);
        const Beta b(gen::uniform_int(rng, 1, den - 1), den);
        if (std::find(out.begin(), out.end(), b) == out.end()) out.push_back(b);
    }
    return out;
}

/// T_log * T_log in T_log, T_log * T_rhs in T_rhs, rho^{-2} * (nonconstant T_log)^2 in T_rhs.
inline std::vector<SuiteReport> closure_suites(const std::vector<Beta>& betas, int max_index,
                                               const Predicates& pred = {}) {
    const auto tlog = gen::enumerate_tlog(max_index);
    const auto trhs = gen::enumerate_trhs(max_index);
    SuiteReport prod{"product_closure"}, mixed{"logrhs_1"}, shifted{"logrhs_2"};
    for (const Beta& b : betas) {
        const auto inv_rho2 = Expansion<double>::monomial(b, TermIndex{-2, 0, 0, 0, Parity::Cos}, 1.0);
        for (const auto& x : tlog) {
            for (const auto& y : tlog) detail::product_check(prod, b, x, y, nullptr, pred.tlog);
            for (const auto& y : trhs) detail::product_check(mixed, b, x, y, nullptr, pred.trhs);
            if (x == TermIndex{}) continue;
            for (const auto& y : tlog)
                if (!(y == TermIndex{})) detail::product_check(shifted, b, x, y, &inv_rho2, pred.trhs);
        }
    }
    return {prod, mixed, shifted};
}

/// laplacian(invert_laplacian(v)) == v exactly for random single-term v in T_rhs with random
/// coefficients in Q(beta), and every preimage term in T_log.
inline SuiteReport inversion_suite(gen::Rng& rng, int samples, int max_index, const Predicates& pred = {}) {
    SuiteReport rep{"exact_inversion"};
    for (int i = 0; i < samples; ++i) {
        const Beta b = gen::random_beta(rng);
        const TermIndex t = gen::random_trhs(rng, max_index);
        const auto v = Expansion<RationalFunction>::monomial(b, t, gen::random_field_element(rng));
        const auto u = invert_laplacian(v);
        ++rep.checked;
        bool ok = laplacian(u).same_terms(v);
        for (const auto& [key, c] : u.terms()) ok = ok && pred.tlog(key.term);
        if (!ok) rep.fail({rep.name, b.str(), "v = " + detail::show(t)});
    }
    return rep;
}

/// Laplacian(rho^{k/beta} log rho cos k theta) = (2k/beta) rho^{k/beta - 2} cos k theta, k = 1..k_max.
inline SuiteReport log_identity_suite(const std::vector<Beta>& betas, int k_max) {
    SuiteReport rep{"log_identity"};
    for (const Beta& b : betas)
        for (int k = 1; k <= k_max; ++k) {
            const auto u = Expansion<RationalFunction>::monomial(b, TermIndex{0, k, 1, k, Parity::Cos}, RationalFunction(1));
            const auto expect = Expansion<RationalFunction>::monomial(
                b, TermIndex{-2, k, 0, k, Parity::Cos}, RationalFunction(2 * k) / RationalFunction::beta());
            ++rep.checked;
            if (!laplacian(u).same_terms(expect)) rep.fail({rep.name, b.str(), "k = " + std::to_string(k)});
        }
    return rep;
}

/// Random exact problems bootstrapped to Q = 4 + 2/beta: no RhsStructureViolation, every term of
/// phi_Q in T_log (a even, m <= max{0, k - 1}), and the formal residual has sigma >= Q - 2.
inline std::vector<SuiteReport> bootstrap_suites(gen::Rng& rng, int samples, const Predicates& pred = {}) {
    SuiteReport structure{"bootstrap_structure"}, residual{"formal_residual"};
    const Order q = Order::at(4, 2);
    for (int i = 0; i < samples; ++i) {
        const auto prob = gen::random_problem(rng);
        const std::string tag = "problem " + std::to_string(i) + ", lambda = " + prob.lambda.str();
        ++structure.checked;
        try {
            const auto phi = run_bootstrap(prob, q).first;
            for (const auto& [key, c] : phi.terms())
                if (!pred.tlog(key.term)) {
                    structure.fail({structure.name, prob.beta.str(), tag + ": term " + detail::show(key.term)});
                    break;
                }
            ++residual.checked;
            const auto r = formal_residual(prob, phi, q);
            const Exponent floor = q.e - Exponent{2, 0};
            for (const auto& [key, c] : r.terms())
                if (numerically_less(key.term.exponent(), floor, prob.beta)) {
                    residual.fail({residual.name, prob.beta.str(), tag + ": residual term " + detail::show(key.term)});
                    break;
                }
        } catch (const RhsStructureViolation& e) {
            structure.fail({structure.name, prob.beta.str(), tag + ": " + e.what()});
        }
    }
    return {structure, residual};
}

}  // namespace conexp::properties
