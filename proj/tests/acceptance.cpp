// Acceptance run: one PASS/FAIL line per criterion 1-9 with the measured quantity and runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "conexp/coordinates.hpp"
#include "conexp/numeric/verify.hpp"
#include "conexp/properties.hpp"

using namespace conexp;
using namespace conexp::numeric;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, double limit_s, const std::function<Outcome()>& run) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = run();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0 || s <= limit_s;
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::printf("%s criterion %d: %s | %s | %.2f s%s\n", ok ? "PASS" : "FAIL", n, title.c_str(), o.detail.c_str(), s,
                in_time ? "" : " (over time limit)");
    std::fflush(stdout);
}

std::string suites_detail(const std::vector<properties::SuiteReport>& rs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (i) os << ", ";
        os << rs[i].name << " " << rs[i].failures << "/" << rs[i].checked;
        if (!rs[i].examples.empty()) os << " first: beta=" << rs[i].examples[0].beta << " " << rs[i].examples[0].detail;
    }
    return os.str();
}

bool all_pass(const std::vector<properties::SuiteReport>& rs) {
    for (const auto& r : rs)
        if (!r.pass() || r.checked == 0) return false;
    return true;
}

// Random element of Span(T_log) whose terms all have exponent >= 2.
Expansion<double> manufactured(gen::Rng& rng, const Beta& b) {
    std::uniform_real_distribution<double> u(-1, 1);
    Expansion<double> e(b);
    while (e.terms().size() < 4) {
        const TermIndex t = gen::random_tlog(rng, 3);
        if (t.exponent().value(b) >= 2) e.add_term(t, u(rng));
    }
    return e;
}

}  // namespace

int main() {
    // Bootstrap runs of criteria 3 and 4 are shared.
    std::optional<std::vector<properties::SuiteReport>> boot;
    gen::Rng boot_rng(3003);
    const auto bootstrap_reports = [&]() -> const std::vector<properties::SuiteReport>& {
        if (!boot) boot = properties::bootstrap_suites(boot_rng, 100);
        return *boot;
    };

    report(1, "closure suite, j,k,l,m <= 6, 50 random beta", 60, [] {
        gen::Rng rng(1001);
        const auto rs = properties::closure_suites(properties::random_betas(rng, 50), 6);
        return Outcome{all_pass(rs), "counterexamples/checked: " + suites_detail(rs)};
    });

    report(2, "exact inversion on 1000 random T_rhs terms, log identity k <= 20", 60, [] {
        gen::Rng rng(2002);
        const auto inv = properties::inversion_suite(rng, 1000, 10);
        const auto log = properties::log_identity_suite(properties::random_betas(rng, 10), 20);
        return Outcome{inv.pass() && log.pass() && inv.checked == 1000, suites_detail({inv, log})};
    });

    report(3, "bootstrap structure, 100 random problems to Q = 4 + 2/beta", 300, [&] {
        const auto& rs = bootstrap_reports();
        return Outcome{rs[0].pass() && rs[0].checked == 100, suites_detail({rs[0]})};
    });

    report(4, "formal residual sigma >= Q - 2 for the runs of (3)", 0, [&] {
        const auto& rs = bootstrap_reports();
        return Outcome{rs[1].pass() && rs[1].checked == 100, suites_detail({rs[1]})};
    });

    report(5, "manufactured solutions, order >= 1.5 over N_rho 64/128/256, N_theta 64", 300, [] {
        gen::Rng rng(5005);
        const Beta betas[] = {{1, 2}, {2, 3}, {3, 4}, {2, 5}, {3, 5}};
        const double rho_min = 1e-4, rho_max = 0.5;
        double worst = INFINITY;
        for (int n = 0; n < 10; ++n) {
            const Beta& b = betas[n % 5];
            const auto phi = manufactured(rng, b);
            const auto f = to_float(laplacian(phi));
            std::vector<double> err;
            for (int nr : {64, 128, 256}) {
                const PolarGrid g(b, nr, 64, rho_min, rho_max);
                const auto exact = sample(g, phi);
                const auto u = solve_poisson(sample(g, f), exact.ring(g.n_rho()));
                err.push_back(max_abs_on(u - exact, 10 * rho_min, rho_max / 2));
            }
            worst = std::min({worst, std::log2(err[0] / err[1]), std::log2(err[1] / err[2])});
        }
        std::ostringstream os;
        os << "minimum observed order " << worst << " (target 1.5)";
        return Outcome{worst >= 1.5, os.str()};
    });

    // Criteria 6-8 come from one verification run with the odd-a control columns enabled.
    std::optional<VerifyResult> vr;
    double verify_seconds = 0;
    const auto verification = [&]() -> const VerifyResult& {
        if (!vr) {
            const Beta b(2, 3);
            ModelProblem<double> prob{b, 1.0, smooth_real_function<double>(b, {{{1, 0}, Complex<double>(0.1)}}),
                                      {{0, Parity::Cos, 0.0}}};
            VerifyOptions opt;
            opt.inject_odd = true;
            const auto t0 = std::chrono::steady_clock::now();
            vr = run_verification(prob, opt);
            verify_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        return *vr;
    };

    report(6, "end-to-end beta = 2/3, lambda = 1, h = 0.1 Re z1, Q = 7", 600, [&] {
        const auto& r = verification();
        std::ostringstream os;
        os.precision(3);
        for (const auto& c : r.comparisons)
            os << "l=" << c.l << " rho^" << c.column.exponent(Beta(2, 3)) << " rel " << c.relative_error << "/" << c.tolerance
               << "; ";
        for (const auto& f : r.fits)
            if (f.parity == Parity::Cos && f.l <= 1) os << "slope l=" << f.l << " " << f.residual_slope << "; ";
        os << "target " << r.slope_target;
        return Outcome{r.coefficients_pass && r.slopes_pass && r.comparisons.size() == 6, os.str()};
    });

    report(7, "weighted-derivative probe slopes >= -0.05, k1 + k2 <= 2", 0, [&] {
        const auto& r = verification();
        double worst = INFINITY;
        for (const auto& p : r.probes) worst = std::min(worst, p.slope);
        std::ostringstream os;
        os << r.probes.size() << " probes, minimum slope " << worst;
        return Outcome{r.probes_pass && r.probes.size() == 6, os.str()};
    });

    report(8, "odd-a column injected: |coeff| < 3 SE", 0, [&] {
        const auto& r = verification();
        std::ostringstream os;
        os.precision(3);
        for (const auto& c : r.controls)
            os << "l=" << c.l << " rho^" << c.column.exponent(Beta(2, 3)) << " coeff " << c.column.fitted << " SE "
               << c.column.std_error << " ratio " << c.ratio << "; ";
        os << "verify verdict with injection: " << (r.pass ? "PASS" : "FAIL");
        return Outcome{r.controls_pass && r.controls.size() == 2 && !r.pass, os.str()};
    });

    report(9, "frame_forward * frame_backward = I and cone_distance = lifted distance, 1e-12", 0, [] {
        std::mt19937_64 rng(9009);
        std::uniform_real_distribution<double> u(0, 1);
        double frame = 0, dist = 0;
        for (int i = 0; i < 100; ++i) {
            const double beta = 0.05 + 0.9 * u(rng);
            const double rho0 = 0.01 + 0.49 * u(rng);
            const std::vector<double> xi0{u(rng) - 0.5, u(rng) - 0.5};
            const LiftedChart chart(PolarPoint(rho0, 2 * std::numbers::pi * u(rng), xi0), beta);
            const auto point = [&] {
                std::vector<double> xi(2);
                for (int k = 0; k < 2; ++k) xi[k] = xi0[k] + (2 * u(rng) - 1) * rho0 / 3;
                return PolarPoint(rho0 * std::exp((2 * u(rng) - 1) * 0.69), chart.base().theta + (2 * u(rng) - 1) * 0.099, xi);
            };
            const PolarPoint p = point(), q = point();
            const Eigen::MatrixXcd m = chart.frame_forward(p) * chart.frame_backward(p);
            frame = std::max(frame, (m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff());
            const auto lp = chart.lifted_vector(p), lq = chart.lifted_vector(q);
            double d2 = 0;
            for (std::size_t k = 0; k < lp.size(); ++k) d2 += std::norm(lp[k] - lq[k]);
            dist = std::max(dist, std::abs(cone_distance(p, q, beta) - std::sqrt(d2)));
        }
        std::ostringstream os;
        os << "max |FB - I| " << frame << ", max distance gap " << dist;
        return Outcome{frame <= 1e-12 && dist <= 1e-12, os.str()};
    });

    std::printf("verification run time %.2f s\n", verify_seconds);
    std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
