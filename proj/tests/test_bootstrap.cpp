#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "conexp/bootstrap.hpp"
#include "support.hpp"

using namespace conexp;

namespace {

using R = RationalFunction;
using EX = Expansion<R>;

R Q(long n, long d = 1) { return R(n, d); }
TermIndex T(int a, int k, int m, int l, Parity p = Parity::Cos) { return TermIndex{a, k, m, l, p}; }

ModelProblem<R> constant_problem(const Beta& b, R lambda, R c) {
    return ModelProblem<R>{b, lambda, EX(b), {{0, Parity::Cos, c}}};
}

// phi'' + phi'/rho = 4 e^phi with phi(0) = phi'(0) = 0, integrated with RK4 in s = log rho
// from rho = 1e-6. Returns samples (rho, phi).
std::vector<std::pair<double, double>> radial_solution(double rho_end, int steps) {
    double s = std::log(1e-6), phi = 0, psi = 0;  // psi = rho phi'
    const double ds = (std::log(rho_end) - s) / steps;
    const auto f = [](double s_, double ph, double ps) {
        return std::pair<double, double>{ps, 4 * std::exp(2 * s_ + ph)};
    };
    std::vector<std::pair<double, double>> out;
    for (int i = 0; i < steps; ++i) {
        const auto [k1a, k1b] = f(s, phi, psi);
        const auto [k2a, k2b] = f(s + ds / 2, phi + ds / 2 * k1a, psi + ds / 2 * k1b);
        const auto [k3a, k3b] = f(s + ds / 2, phi + ds / 2 * k2a, psi + ds / 2 * k2b);
        const auto [k4a, k4b] = f(s + ds, phi + ds * k3a, psi + ds * k3b);
        phi += ds / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
        psi += ds / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
        s += ds;
        out.emplace_back(std::exp(s), phi);
    }
    return out;
}

}  // namespace

TEST(Harmonic, Examples) {
    const Beta b(2, 3);
    const auto c = harmonic_expansion<R>(b, {{0, Parity::Cos, Q(5)}}, Order::at(4));
    EXPECT_EQ(c.size(), 1u);
    EXPECT_EQ(c.constant_term(), Q(5));
    const auto h1 = harmonic_expansion<R>(b, {{1, Parity::Cos, Q(1)}}, Order::at(4));
    EXPECT_EQ(h1.coefficient(T(0, 1, 0, 1)), Q(1));
}

TEST(Harmonic, LaplacianVanishes) {
    conexp::testing::Rng rng(1);
    for (int i = 0; i < 30; ++i) {
        const Beta b = conexp::testing::random_beta(rng);
        std::vector<HarmonicDatum<R>> data;
        for (int l = 0; l <= 6; ++l) {
            data.push_back({l, Parity::Cos, conexp::testing::random_rational(rng)});
            if (l) data.push_back({l, Parity::Sin, conexp::testing::random_rational(rng)});
        }
        EXPECT_TRUE(laplacian(harmonic_expansion(b, data, Order::at(20))).empty());
    }
}

TEST(Harmonic, TruncatesStrictly) {
    const Beta b(1, 2);
    const auto e = harmonic_expansion<R>(b, {{1, Parity::Cos, Q(1)}, {2, Parity::Cos, Q(1)}}, Order::at(4));
    EXPECT_EQ(e.size(), 1u);  // rho^4 cos 2 theta sits at the order
}

TEST(BootstrapStep, LinearProblemOneStep) {
    const Beta b(2, 3);
    const auto prob = constant_problem(b, Q(0), Q(7, 3));
    const EX phi0 = EX::constant(b, Q(7, 3), Order::at(0, 1));
    const EX phi1 = bootstrap_step(phi0, prob, Order::at(6));
    EXPECT_EQ(phi1.size(), 2u);
    EXPECT_EQ(phi1.constant_term(), Q(7, 3));
    EXPECT_EQ(phi1.coefficient(T(2, 0, 0, 0)), Q(1));
    EXPECT_EQ(phi1.order(), Order::at(2, 1));
}

TEST(BootstrapStep, PicardTwoSteps) {
    const Beta b(1, 2);
    const auto prob = constant_problem(b, Q(1), Q(0));
    EX phi = EX(b, Order::at(2));
    phi = bootstrap_step(phi, prob, Order::at(6));
    EXPECT_EQ(phi.coefficient(T(2, 0, 0, 0)), Q(1));
    EXPECT_EQ(phi.order(), Order::at(4));
    phi = bootstrap_step(phi, prob, Order::at(6));
    EXPECT_EQ(phi.coefficient(T(2, 0, 0, 0)), Q(1));
    EXPECT_EQ(phi.coefficient(T(4, 0, 0, 0)), Q(1, 4));
    EXPECT_EQ(phi.order(), Order::at(6));
}

TEST(BootstrapStep, SmoothForcingCoefficient) {
    // h = eps Re z1, lambda = 0: the rho^{1/beta + 2} cos theta coefficient is
    // 4 eps u / ((1/beta + 2)^2 - 1/beta^2).
    const R eps = Q(1, 10);
    for (const Beta b : {Beta(2, 3), Beta(1, 3), Beta(3, 4)}) {
        const EX h = smooth_real_function<R>(b, {{{1, 0}, ExactComplex(eps)}});
        ModelProblem<R> prob{b, Q(0), h, {{0, Parity::Cos, Q(0)}}};
        const auto [phi, trace] = run_bootstrap(prob, Order::at(2, 2));
        const R ib = Q(1) / R::beta();
        const R expected = Q(4) * eps / ((ib + Q(2)) * (ib + Q(2)) - ib * ib);
        EXPECT_EQ(phi.coefficient(T(2, 1, 0, 1), 1), expected) << b.str();
        // Numeric cross-check of the same term: its cone Laplacian is 4 eps Re z1.
        const double bv = b.value(), r = 0.3, th = 0.4, dh = 1e-4;
        const EX one = EX::monomial(b, T(2, 1, 0, 1), expected, 1);
        const auto f = [&](double rr, double tt) { return one.evaluate_real(rr, tt); };
        const double lap = (f(r + dh, th) - 2 * f(r, th) + f(r - dh, th)) / (dh * dh) +
                           (f(r + dh, th) - f(r - dh, th)) / (2 * dh * r) +
                           (f(r, th + dh) - 2 * f(r, th) + f(r, th - dh)) / (dh * dh * bv * bv * r * r);
        const double rez = 0.1 * std::pow(bv * r, 1 / bv) * std::cos(th);
        EXPECT_NEAR(lap, 4 * rez, 1e-6);
    }
}

TEST(BootstrapStep, RejectsNonpositiveNonconstantTerm) {
    const Beta b(1, 2);
    const auto prob = constant_problem(b, Q(1), Q(0));
    EX phi(b, Order::at(2));
    phi.add_term(T(0, 0, 1, 0), Q(1));
    EXPECT_THROW(bootstrap_step(phi, prob, Order::at(4)), std::invalid_argument);
}

TEST(Bootstrap, LinearProblemIsExact) {
    const Beta b(3, 5);
    const auto [phi, trace] = run_bootstrap(constant_problem(b, Q(0), Q(-2, 7)), Order::at(6));
    EXPECT_EQ(phi.size(), 2u);
    EXPECT_EQ(phi.constant_term(), Q(-2, 7));
    EXPECT_EQ(phi.coefficient(T(2, 0, 0, 0)), Q(1));
    EXPECT_FALSE(numerically_less(phi.order().e, Exponent{6, 0}, b));
}

TEST(Bootstrap, RadialOracle) {
    const Beta b(2, 3);
    const auto [phi, trace] = run_bootstrap(constant_problem(b, Q(1), Q(0)), Order::at(8));
    EXPECT_EQ(phi.coefficient(T(2, 0, 0, 0)), Q(1));
    EXPECT_EQ(phi.coefficient(T(4, 0, 0, 0)), Q(1, 4));
    EXPECT_EQ(phi.coefficient(T(6, 0, 0, 0)), Q(1, 12));

    // Least-squares fit of the numeric radial solution on powers rho^2 .. rho^12.
    const auto samples = radial_solution(0.3, 40000);
    std::vector<std::pair<double, double>> fit;
    for (const auto& s : samples)
        if (s.first >= 0.02) fit.push_back(s);
    Eigen::MatrixXd A(fit.size(), 6);
    Eigen::VectorXd y(fit.size());
    for (std::size_t i = 0; i < fit.size(); ++i) {
        for (int n = 1; n <= 6; ++n) A(i, n - 1) = std::pow(fit[i].first / 0.3, 2 * n);
        y(i) = fit[i].second;
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    const auto coef = [&](int n) { return c(n - 1) / std::pow(0.3, 2 * n); };
    EXPECT_NEAR(coef(1), 1.0, 1e-6);
    EXPECT_NEAR(coef(2), 0.25, 1e-4);
    EXPECT_NEAR(coef(3), 1.0 / 12, 2e-3);
    EXPECT_EQ(phi.coefficient(T(8, 0, 0, 0)), Q(0));  // sits at the order
}

TEST(Bootstrap, TraceOrdersIncrease) {
    const Beta b(3, 7);
    const auto [phi, trace] = run_bootstrap(constant_problem(b, Q(1), Q(0)), Order::at(4, 2));
    ASSERT_FALSE(trace.steps.empty());
    double prev = -1;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        const double inc = s.next.value(b) - s.q.value(b);
        EXPECT_GT(s.q.value(b), prev);
        EXPECT_LE(inc, 2 + 1e-12);
        if (i + 1 < trace.steps.size()) { EXPECT_GE(inc, 1 - 1e-12); }
        prev = s.q.value(b);
    }
}

TEST(Bootstrap, RandomProblemsStructureAndResidual) {
    conexp::testing::Rng rng(99);
    for (int i = 0; i < 10; ++i) {
        const auto prob = conexp::testing::random_problem(rng);
        const Beta& b = prob.beta;
        const Order target = Order::at(4, 2);
        const auto [phi, trace] = run_bootstrap(prob, target);
        for (const auto& [key, c] : phi.terms()) {
            EXPECT_EQ(key.term.a % 2, 0) << key.term;
            EXPECT_TRUE(key.term.m <= std::max(0, key.term.k - 1)) << key.term;
        }
        const auto res = formal_residual(prob, phi, target);
        EXPECT_TRUE(residual_meets_order(res, target)) << b.str() << " " << res.str();
    }
}

TEST(Bootstrap, ExtensionReproducesLowerTerms) {
    conexp::testing::Rng rng(5);
    for (int i = 0; i < 5; ++i) {
        const auto prob = conexp::testing::random_problem(rng);
        const Order lo = Order::at(3), hi = Order::at(5);
        const auto phi_lo = run_bootstrap(prob, lo).first;
        const auto phi_hi = run_bootstrap(prob, hi).first;
        EXPECT_TRUE(phi_hi.truncated(lo).same_terms(phi_lo));
    }
}

TEST(Bootstrap, FloatModeMatchesExact) {
    conexp::testing::Rng rng(8);
    for (int i = 0; i < 5; ++i) {
        const auto prob = conexp::testing::random_problem(rng);
        const Beta& b = prob.beta;
        ModelProblem<double> fp{b, prob.lambda.evaluate(b.value()), to_float(prob.h), {}};
        for (const auto& d : prob.harmonic_data) fp.harmonic_data.push_back({d.l, d.parity, d.coefficient.evaluate(b.value())});
        const auto ex = to_float(run_bootstrap(prob, Order::at(4)).first);
        const auto fl = run_bootstrap(fp, Order::at(4)).first;
        ASSERT_EQ(ex.size(), fl.size());
        for (const auto& [key, c] : ex.terms()) EXPECT_NEAR(fl.coefficient(key.term), c, 1e-12 * (1 + std::abs(c)));
    }
}

TEST(Bootstrap, FloatModeAllowsNonzeroConstant) {
    // lambda = 1, c = 1: rho^2 coefficient is e^c.
    const Beta b(2, 3);
    ModelProblem<double> fp{b, 1.0, Expansion<double>(b), {{0, Parity::Cos, 1.0}}};
    const auto phi = run_bootstrap(fp, Order::at(6)).first;
    EXPECT_NEAR(phi.coefficient(T(2, 0, 0, 0)), std::exp(1.0), 1e-14);
    EXPECT_NEAR(phi.coefficient(T(4, 0, 0, 0)), std::exp(2.0) / 4, 1e-13);
}

TEST(Bootstrap, ExactModeRejectsIrrationalExponential) {
    const Beta b(1, 2);
    EXPECT_THROW(run_bootstrap(constant_problem(b, Q(1), Q(1)), Order::at(4)), NonRationalConstant);
}

TEST(Bootstrap, InfiniteTargetRejected) {
    const Beta b(1, 2);
    EXPECT_THROW(run_bootstrap(constant_problem(b, Q(1), Q(0)), Order::inf()), std::invalid_argument);
}
