#pragma once

// Seeded generators for random terms, field elements and model problems.

#include <random>
#include <vector>

#include "conexp/bootstrap.hpp"
#include "conexp/expansion.hpp"

namespace conexp::gen {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Random rational beta in (0, 1) with denominator <= max_den.
inline Beta random_beta(Rng& rng, int max_den = 12) {
    const int den = uniform_int(rng, 2, max_den);
    const int num = uniform_int(rng, 1, den - 1);
    return Beta(num, den);
}

inline TermIndex tlog_term(int j, int k, int m, int l, Parity p) { return TermIndex{2 * j, k, m, l, p}; }

/// Uniform-ish element of T_log with j, k, l, m bounded by `max`.
inline TermIndex random_tlog(Rng& rng, int max) {
    for (;;) {
        const int j = uniform_int(rng, 0, max);
        const int k = uniform_int(rng, 0, max);
        const int l = uniform_int(rng, 0, k);
        if ((k - l) % 2) continue;
        const int m = uniform_int(rng, 0, std::max(0, k - 1));
        const Parity p = (l > 0 && uniform_int(rng, 0, 1)) ? Parity::Sin : Parity::Cos;
        TermIndex t = tlog_term(j, k, m, l, p);
        if (is_in_Tlog(t)) return t;
    }
}

inline TermIndex random_trhs(Rng& rng, int max) {
    for (;;) {
        TermIndex t = random_tlog(rng, max);
        t.a -= 2;
        if (is_in_Trhs(t)) return t;
    }
}

/// Every T_log term with j, k, l, m <= max.
inline std::vector<TermIndex> enumerate_tlog(int max) {
    std::vector<TermIndex> out;
    for (int j = 0; j <= max; ++j)
        for (int k = 0; k <= max; ++k)
            for (int l = 0; l <= std::min(k, max); ++l)
                for (int m = 0; m <= max; ++m)
                    for (Parity p : {Parity::Cos, Parity::Sin}) {
                        const TermIndex t = tlog_term(j, k, m, l, p);
                        if (is_in_Tlog(t)) out.push_back(t);
                    }
    return out;
}

inline std::vector<TermIndex> enumerate_trhs(int max) {
    std::vector<TermIndex> out;
    for (TermIndex t : enumerate_tlog(max)) {
        t.a -= 2;
        if (is_in_Trhs(t)) out.push_back(t);
    }
    return out;
}

inline RationalFunction random_rational(Rng& rng, int span = 9) {
    int d = uniform_int(rng, 1, span);
    return RationalFunction(uniform_int(rng, -span, span), d);
}

/// Random nonzero element of Q(beta) built from small polynomials.
inline RationalFunction random_field_element(Rng& rng) {
    RationalFunction num = random_rational(rng);
    if (uniform_int(rng, 0, 1)) num = num + random_rational(rng) * RationalFunction::beta();
    if (num.is_zero()) num = RationalFunction(1);
    if (uniform_int(rng, 0, 2) == 0)
        num = num / (RationalFunction(uniform_int(rng, 1, 5)) * RationalFunction::beta() + RationalFunction(uniform_int(rng, 1, 5)));
    return num;
}

inline Expansion<RationalFunction> random_exact_expansion(Rng& rng, const Beta& b, int terms, int max) {
    Expansion<RationalFunction> e(b);
    for (int i = 0; i < terms; ++i) e.add_term(random_tlog(rng, max), random_field_element(rng));
    return e;
}

/// Random n = 1 model problem with rational data. Exact mode needs exp of the constant term of
/// lambda phi + h to be rational, so the harmonic constant is chosen as c = -h_00 / lambda.
inline ModelProblem<RationalFunction> random_problem(Rng& rng) {
    static const Beta betas[] = {{1, 3}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {2, 5}, {3, 5}, {4, 5}, {3, 7}, {5, 7}};
    const Beta b = betas[uniform_int(rng, 0, 9)];
    const RationalFunction lambda(uniform_int(rng, -4, 4), 4);
    std::vector<std::pair<std::pair<int, int>, ExactComplex>> taylor;
    RationalFunction h00(0);
    for (int p = 0; p <= 3; ++p)
        for (int q = 0; p + q <= 3; ++q) {
            if (uniform_int(rng, 0, 2) == 0) continue;
            if (p == 0 && q == 0) {
                if (lambda.is_zero()) continue;
                h00 = random_rational(rng, 4);
                taylor.push_back({{0, 0}, ExactComplex(h00)});
                continue;
            }
            taylor.push_back({{p, q}, ExactComplex(random_rational(rng, 4), random_rational(rng, 4))});
        }
    std::vector<HarmonicDatum<RationalFunction>> data;
    const RationalFunction c = lambda.is_zero() ? random_rational(rng, 4) : -h00 / lambda;
    data.push_back({0, Parity::Cos, c});
    for (int l = 1; l <= 2; ++l)
        for (Parity par : {Parity::Cos, Parity::Sin})
            if (uniform_int(rng, 0, 1)) data.push_back({l, par, random_rational(rng, 4)});
    return ModelProblem<RationalFunction>{b, lambda, smooth_real_function<RationalFunction>(b, taylor), data};
}

}  // namespace conexp::gen
