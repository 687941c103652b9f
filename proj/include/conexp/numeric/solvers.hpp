#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "conexp/numeric/grid.hpp"
#include "conexp/numeric/operators.hpp"

namespace conexp::numeric {

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NewtonDivergence : public std::runtime_error {
public:
    NewtonDivergence(const std::string& what, double last) : std::runtime_error(what), last_residual(last) {}
    double last_residual;
};

struct SolverOptions {
    ThetaScheme theta = ThetaScheme::Spectral;
    double linear_tol = 1e-10;   // relative to the max norm of the scaled right-hand side
    int refinement_steps = 3;
    double newton_tol = 1e-10;   // max norm of rho^2 (Laplacian(phi) - 4 exp(lambda phi + h))
    int newton_max_iter = 40;
    int max_halvings = 30;
    /// Extra undamped Newton steps after convergence. The tolerance is met far from the tip first;
    /// these steps drive the error near rho_min down to round-off.
    int polish_steps = 0;
};

/// Discrete operator on the unknown rings i = 0..n_rho-1 (ring n_rho carries Dirichlet data),
/// scaled by rho^2: (d_s^2 + beta^{-2} D_theta^2) u - rho^2 q u. The inner ring uses the ghost
/// value u_{-1} = u_1, i.e. d_rho u = 0 at rho_min.
class ConeSystem {
public:
    ConeSystem(const PolarGrid& g, ThetaScheme scheme)
        : g_(g), d2_(theta_second_derivative(g.n_theta(), scheme)), ib2_(1 / (g.beta().value() * g.beta().value())) {}

    const PolarGrid& grid() const noexcept { return g_; }
    int unknowns() const noexcept { return g_.n_rho() * g_.n_theta(); }

    /// Sparse matrix of the scaled operator with reaction coefficient q (may be empty for q = 0).
    Eigen::SparseMatrix<double> matrix(const PolarField* q) const {
        const int nr = g_.n_rho(), nt = g_.n_theta();
        const double ih2 = 1 / (g_.ds() * g_.ds());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(nr) * nt * (nt + 3));
        const auto id = [nt](int i, int j) { return i * nt + j; };
        for (int i = 0; i < nr; ++i) {
            const double rho2 = g_.rho(i) * g_.rho(i);
            for (int j = 0; j < nt; ++j) {
                const int row = id(i, j);
                for (int k = 0; k < nt; ++k) {
                    double v = ib2_ * d2_(j, k);
                    if (k == j) v += -2 * ih2 - (q ? rho2 * (*q)(i, j) : 0.0);
                    if (v != 0) trip.emplace_back(row, id(i, k), v);
                }
                if (i == 0) {
                    trip.emplace_back(row, id(1, j), 2 * ih2);
                } else {
                    trip.emplace_back(row, id(i - 1, j), ih2);
                    if (i + 1 < nr) trip.emplace_back(row, id(i + 1, j), ih2);
                }
            }
        }
        Eigen::SparseMatrix<double> a(unknowns(), unknowns());
        a.setFromTriplets(trip.begin(), trip.end());
        a.makeCompressed();
        return a;
    }

    /// Scaled operator applied to a full field (boundary ring included), in extended precision,
    /// minus rho^2 f. Returns the n_rho * n_theta unknown-ring residual.
    std::vector<long double> residual(const PolarField& u, const std::function<long double(int, int)>& rho2_rhs) const {
        const int nr = g_.n_rho(), nt = g_.n_theta();
        const long double ih2 = 1.0L / (static_cast<long double>(g_.ds()) * g_.ds());
        std::vector<long double> r(static_cast<std::size_t>(nr) * nt);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nt; ++j) {
                long double tt = 0;
                for (int k = 0; k < nt; ++k) tt += static_cast<long double>(d2_(j, k)) * u(i, k);
                const long double lo = i == 0 ? u(1, j) : u(i - 1, j);
                const long double ss = (lo - 2.0L * u(i, j) + static_cast<long double>(u(i + 1, j))) * ih2;
                r[static_cast<std::size_t>(i) * nt + j] = ss + static_cast<long double>(ib2_) * tt - rho2_rhs(i, j);
            }
        return r;
    }

private:
    PolarGrid g_;
    Eigen::MatrixXd d2_;
    double ib2_;
};

namespace detail {

inline double max_abs(const std::vector<long double>& v) {
    long double m = 0;
    for (auto x : v) m = std::max(m, x < 0 ? -x : x);
    return static_cast<double>(m);
}

inline void factor(Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu, const Eigen::SparseMatrix<double>& a) {
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverFailure("sparse LU factorization failed: " + lu.lastErrorMessage());
}

}  // namespace detail

struct LinearReport {
    double residual = 0;  // max norm of the scaled residual after refinement
    double rhs_norm = 0;
};

/// Solves Laplacian(u) = f with u = dirichlet on rho_max and d_rho u = 0 on rho_min.
inline PolarField solve_poisson(const PolarField& f, const std::vector<double>& dirichlet,
                                const SolverOptions& opt = {}, LinearReport* report = nullptr) {
    const PolarGrid& g = f.grid();
    if (static_cast<int>(dirichlet.size()) != g.n_theta())
        throw std::invalid_argument("solve_poisson: Dirichlet profile has the wrong length");
    const ConeSystem sys(g, opt.theta);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    detail::factor(lu, sys.matrix(nullptr));

    PolarField u(g);
    for (int j = 0; j < g.n_theta(); ++j) u(g.n_rho(), j) = dirichlet[j];
    const auto rhs = [&](int i, int j) {
        return static_cast<long double>(g.rho(i)) * g.rho(i) * static_cast<long double>(f(i, j));
    };
    long double bn = 0;
    for (int i = 0; i < g.n_rho(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) bn = std::max(bn, std::abs(rhs(i, j)));
    const double scale = std::max(static_cast<double>(bn), std::abs(*std::max_element(
        dirichlet.begin(), dirichlet.end(), [](double a, double b) { return std::abs(a) < std::abs(b); })) /
        (g.ds() * g.ds()));

    double res = 0;
    for (int it = 0; it <= opt.refinement_steps; ++it) {
        const auto r = sys.residual(u, rhs);
        res = detail::max_abs(r);
        if (it > 0 && res <= opt.linear_tol * scale) break;
        Eigen::VectorXd b(sys.unknowns());
        for (int n = 0; n < sys.unknowns(); ++n) b(n) = -static_cast<double>(r[n]);
        const Eigen::VectorXd d = lu.solve(b);
        for (int n = 0; n < sys.unknowns(); ++n) u.data()[n] += d(n);
    }
    res = detail::max_abs(sys.residual(u, rhs));
    if (report) *report = {res, scale};
    if (!(res <= opt.linear_tol * scale))
        throw SolverFailure("solve_poisson: residual " + std::to_string(res) + " above target " +
                            std::to_string(opt.linear_tol * scale));
    return u;
}

/// Discrete form of Laplacian(phi) = 4 exp(lambda phi + h).
struct NumericModel {
    double lambda = 0;
    PolarField h;                   // h at the grid nodes
    std::vector<double> dirichlet;  // phi on rho_max
};

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residuals;  // max norm of the scaled residual per iterate
    std::vector<double> steps;      // accepted damping factors
};

inline PolarField solve_model(const NumericModel& model, std::optional<PolarField> initial = std::nullopt,
                              const SolverOptions& opt = {}, NewtonReport* report = nullptr) {
    const PolarGrid& g = model.h.grid();
    const int nr = g.n_rho(), nt = g.n_theta();
    if (static_cast<int>(model.dirichlet.size()) != nt)
        throw std::invalid_argument("solve_model: Dirichlet profile has the wrong length");
    const ConeSystem sys(g, opt.theta);

    PolarField phi(g);
    if (initial) {
        if (!initial->grid().same_layout(g)) throw std::invalid_argument("solve_model: initial guess grid mismatch");
        phi = *initial;
    } else {
        double mean = 0;
        for (double v : model.dirichlet) mean += v;
        mean /= nt;
        for (auto& v : phi.data()) v = mean;
    }
    for (int j = 0; j < nt; ++j) phi(nr, j) = model.dirichlet[j];

    const auto residual_of = [&](const PolarField& u) {
        return sys.residual(u, [&](int i, int j) {
            const long double r2 = static_cast<long double>(g.rho(i)) * g.rho(i);
            return r2 * 4.0L * std::exp(static_cast<long double>(model.lambda) * u(i, j) + model.h(i, j));
        });
    };

    NewtonReport rep;
    auto r = residual_of(phi);
    double rn = detail::max_abs(r);
    rep.residuals.push_back(rn);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int it = 0; it < opt.newton_max_iter && rn > opt.newton_tol; ++it) {
        PolarField q(g);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nt; ++j) q(i, j) = 4 * model.lambda * std::exp(model.lambda * phi(i, j) + model.h(i, j));
        detail::factor(lu, sys.matrix(&q));
        Eigen::VectorXd b(sys.unknowns());
        for (int n = 0; n < sys.unknowns(); ++n) b(n) = -static_cast<double>(r[n]);
        const Eigen::VectorXd d = lu.solve(b);

        double t = 1;
        bool accepted = false;
        for (int k = 0; k <= opt.max_halvings; ++k, t /= 2) {
            PolarField trial = phi;
            for (int n = 0; n < sys.unknowns(); ++n) trial.data()[n] += t * d(n);
            auto rt = residual_of(trial);
            const double rtn = detail::max_abs(rt);
            if (std::isfinite(rtn) && rtn < rn) {
                phi = std::move(trial);
                r = std::move(rt);
                rn = rtn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (report) *report = rep;
            throw NewtonDivergence("solve_model: line search failed at residual " + std::to_string(rn), rn);
        }
        rep.iterations = it + 1;
        rep.residuals.push_back(rn);
        rep.steps.push_back(t);
    }
    if (!(rn <= opt.newton_tol)) {
        if (report) *report = rep;
        throw NewtonDivergence("solve_model: residual " + std::to_string(rn) + " above tolerance", rn);
    }
    for (int k = 0; k < opt.polish_steps; ++k) {
        PolarField q(g);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nt; ++j) q(i, j) = 4 * model.lambda * std::exp(model.lambda * phi(i, j) + model.h(i, j));
        detail::factor(lu, sys.matrix(&q));
        Eigen::VectorXd b(sys.unknowns());
        for (int n = 0; n < sys.unknowns(); ++n) b(n) = -static_cast<double>(r[n]);
        const Eigen::VectorXd d = lu.solve(b);
        for (int n = 0; n < sys.unknowns(); ++n) phi.data()[n] += d(n);
        r = residual_of(phi);
        rn = detail::max_abs(r);
        rep.residuals.push_back(rn);
    }
    if (report) *report = rep;
    if (!(rn <= opt.newton_tol))
        throw NewtonDivergence("solve_model: residual " + std::to_string(rn) + " above tolerance after polishing", rn);
    return phi;
}

}  // namespace conexp::numeric
