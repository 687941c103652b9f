#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conexp/expansion.hpp"

namespace conexp {

class RhsStructureViolation : public std::logic_error {
public:
    explicit RhsStructureViolation(const TermIndex& t)
        : std::logic_error("right-hand side term outside T_rhs: " + t.str()), term(t) {}
    TermIndex term;
};

class NonTermination : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// coefficient * rho^{l/beta} T(l theta); l = 0 is the constant.
template <Scalar F>
struct HarmonicDatum {
    int l = 0;
    Parity parity = Parity::Cos;
    F coefficient{};
};

/// Laplacian(phi) = 4 exp(lambda phi + h) on the punctured disc.
template <Scalar F>
struct ModelProblem {
    Beta beta;
    F lambda;
    Expansion<F> h;
    std::vector<HarmonicDatum<F>> harmonic_data;
};

template <Scalar F>
struct BootstrapRecord {
    Order q;                 // order of the input iterate
    Expansion<F> rhs;        // 4 exp(lambda phi + h) to order q
    Expansion<F> increment;  // inverse Laplacian of rhs
    Order next;              // order of the new iterate
};

template <Scalar F>
struct BootstrapTrace {
    std::vector<BootstrapRecord<F>> steps;
};

template <Scalar F>
Expansion<F> harmonic_expansion(const Beta& beta, const std::vector<HarmonicDatum<F>>& data, Order q) {
    Expansion<F> r(beta, q);
    for (const auto& d : data) {
        if (d.l < 0) throw std::invalid_argument("harmonic datum with negative l");
        if (d.l == 0 && d.parity == Parity::Sin) continue;
        r.add_term(TermIndex{0, d.l, 0, d.l, d.parity}, d.coefficient);
    }
    return r;
}

/// Real expansion of h = sum Re(c_pq z1^p conj(z1)^q).
template <Scalar F>
Expansion<F> smooth_real_function(const Beta& beta, const std::vector<std::pair<std::pair<int, int>, Complex<F>>>& taylor) {
    Expansion<Complex<F>> sum(beta);
    for (const auto& [pq, c] : taylor) sum = add(sum, scale(expand_smooth_monomial<F>(beta, pq.first, pq.second), c));
    return real_part(sum);
}

namespace detail {

inline Order starting_order(const Beta& b) {
    const Exponent two{2, 0}, inv{0, 1};
    return Order::at(compare(two, inv, b) < 0 ? two : inv);
}

template <Scalar F>
Expansion<F> rhs_of(const ModelProblem<F>& prob, const Expansion<F>& phi, Order q) {
    using T = ScalarTraits<F>;
    return scale(compose_exp(add(scale(phi, prob.lambda), prob.h), q), T::from_int(4));
}

}  // namespace detail

template <Scalar F>
Expansion<F> bootstrap_step(const Expansion<F>& phi, const ModelProblem<F>& prob, Order target,
                            BootstrapRecord<F>* record = nullptr) {
    const Beta& b = prob.beta;
    const Order q = phi.order();
    if (q.infinite) throw std::invalid_argument("bootstrap_step: iterate must have finite order");
    if (auto x = phi.nonconstant_min_exponent(); x && x->scaled(b) <= 0)
        throw std::invalid_argument("bootstrap_step: iterate has a nonconstant term of exponent <= 0");
    Expansion<F> rhs = detail::rhs_of(prob, phi, q);
    for (const auto& [key, c] : rhs.terms())
        if (!is_in_Trhs(key.term)) throw RhsStructureViolation(key.term);
    const Order next = min(q + Exponent{2, 0}, target, b);
    Expansion<F> inc = invert_laplacian(rhs);
    Expansion<F> out = add(harmonic_expansion(b, prob.harmonic_data, next), inc.truncated(next));
    if (record) *record = BootstrapRecord<F>{q, std::move(rhs), std::move(inc), next};
    return out;
}

template <Scalar F>
std::pair<Expansion<F>, BootstrapTrace<F>> run_bootstrap(const ModelProblem<F>& prob, Order target) {
    const Beta& b = prob.beta;
    if (target.infinite) throw std::invalid_argument("run_bootstrap: target order must be finite");
    if (!(prob.h.beta() == b)) throw ModeMismatch("run_bootstrap: h has a different beta");
    if (auto x = prob.h.min_exponent(); x && x->scaled(b) < 0)
        throw std::invalid_argument("run_bootstrap: h has a negative exponent");
    BootstrapTrace<F> trace;
    Expansion<F> phi = harmonic_expansion(b, prob.harmonic_data, min(detail::starting_order(b), target, b));
    while (numerically_less(phi.order().e, target.e, b)) {
        BootstrapRecord<F> rec{Order::inf(), Expansion<F>(b), Expansion<F>(b), Order::inf()};
        Expansion<F> next = bootstrap_step(phi, prob, target, &rec);
        if (!numerically_less(phi.order().e, next.order().e, b))
            throw NonTermination("run_bootstrap: order did not increase past " + phi.order().str());
        trace.steps.push_back(std::move(rec));
        phi = std::move(next);
    }
    return {std::move(phi), std::move(trace)};
}

/// Laplacian(phi) - 4 exp(lambda phi + h), with phi's own terms taken as exact and the
/// composition carried to order q. The expansion keeps every term below q.
template <Scalar F>
Expansion<F> formal_residual(const ModelProblem<F>& prob, const Expansion<F>& phi, Order q) {
    Expansion<F> exact(phi.beta());
    for (const auto& [key, c] : phi.terms()) exact.add_term(key.term, c, key.u_power);
    return subtract(laplacian(exact), detail::rhs_of(prob, exact, q));
}

/// True when every residual term has exponent >= q - 2.
template <Scalar F>
bool residual_meets_order(const Expansion<F>& residual, Order q) {
    const Exponent floor = q.e - Exponent{2, 0};
    for (const auto& [key, c] : residual.terms())
        if (numerically_less(key.term.exponent(), floor, residual.beta())) return false;
    return true;
}

}  // namespace conexp
