#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "conexp/numeric/grid.hpp"

namespace conexp::numeric {

/// Central2: periodic (1, -2, 1) stencil. Spectral: trigonometric interpolation, exact on
/// modes |l| < n_theta / 2.
enum class ThetaScheme { Central2, Spectral };

inline Eigen::MatrixXd theta_second_derivative(int n, ThetaScheme scheme) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const double h = 2 * std::numbers::pi / n;
    if (scheme == ThetaScheme::Central2) {
        for (int j = 0; j < n; ++j) {
            d(j, j) = -2 / (h * h);
            d(j, (j + 1) % n) += 1 / (h * h);
            d(j, (j + n - 1) % n) += 1 / (h * h);
        }
        return d;
    }
    if (n % 2) throw std::invalid_argument("spectral theta derivative needs even n_theta");
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k) {
                d(j, k) = -std::numbers::pi * std::numbers::pi / (3 * h * h) - 1.0 / 6;
            } else {
                const double s = std::sin((j - k) * h / 2);
                d(j, k) = -(((j - k) % 2) ? -1.0 : 1.0) / (2 * s * s);
            }
        }
    return d;
}

inline Eigen::MatrixXd theta_first_derivative(int n, ThetaScheme scheme) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const double h = 2 * std::numbers::pi / n;
    if (scheme == ThetaScheme::Central2) {
        for (int j = 0; j < n; ++j) {
            d(j, (j + 1) % n) += 1 / (2 * h);
            d(j, (j + n - 1) % n) -= 1 / (2 * h);
        }
        return d;
    }
    if (n % 2) throw std::invalid_argument("spectral theta derivative needs even n_theta");
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (j != k) d(j, k) = 0.5 * (((j - k) % 2) ? -1.0 : 1.0) / std::tan((j - k) * h / 2);
    return d;
}

/// d/ds with s = log rho (so rho d_rho): central inside, second-order one-sided at the ends.
inline PolarField rho_d_rho(const PolarField& u) {
    const auto& g = u.grid();
    const int n = g.n_rho();
    if (n < 3) throw std::invalid_argument("rho_d_rho: need at least 4 rho nodes");
    const double h = g.ds();
    PolarField r(g);
    for (int j = 0; j < g.n_theta(); ++j) {
        r(0, j) = (-3 * u(0, j) + 4 * u(1, j) - u(2, j)) / (2 * h);
        for (int i = 1; i < n; ++i) r(i, j) = (u(i + 1, j) - u(i - 1, j)) / (2 * h);
        r(n, j) = (3 * u(n, j) - 4 * u(n - 1, j) + u(n - 2, j)) / (2 * h);
    }
    return r;
}

inline PolarField d_theta(const PolarField& u, ThetaScheme scheme) {
    const auto& g = u.grid();
    const Eigen::MatrixXd d = theta_first_derivative(g.n_theta(), scheme);
    PolarField r(g);
    for (int i = 0; i < g.rho_nodes(); ++i) {
        const auto ring = u.ring(i);
        const Eigen::Map<const Eigen::VectorXd> x(ring.data(), ring.size());
        const Eigen::VectorXd y = d * x;
        for (int j = 0; j < g.n_theta(); ++j) r(i, j) = y(j);
    }
    return r;
}

/// rho^{-2} (d_s^2 + beta^{-2} d_theta^2) u, i.e. d_rho^2 + rho^{-1} d_rho + beta^{-2} rho^{-2} d_theta^2.
/// Central in s inside; the end rows use the one-sided stencil (2, -5, 4, -1) / ds^2.
inline PolarField apply_cone_laplacian(const PolarField& u, ThetaScheme scheme = ThetaScheme::Central2) {
    const auto& g = u.grid();
    const int n = g.n_rho();
    if (n < 3) throw std::invalid_argument("apply_cone_laplacian: need at least 4 rho nodes");
    const double h2 = g.ds() * g.ds();
    const double ib2 = 1 / (g.beta().value() * g.beta().value());
    const Eigen::MatrixXd d2 = theta_second_derivative(g.n_theta(), scheme);
    PolarField r(g);
    for (int i = 0; i <= n; ++i) {
        const auto ring = u.ring(i);
        const Eigen::Map<const Eigen::VectorXd> x(ring.data(), ring.size());
        const Eigen::VectorXd tt = d2 * x;
        const double rho2 = g.rho(i) * g.rho(i);
        for (int j = 0; j < g.n_theta(); ++j) {
            double ss;
            if (i == 0)
                ss = (2 * u(0, j) - 5 * u(1, j) + 4 * u(2, j) - u(3, j)) / h2;
            else if (i == n)
                ss = (2 * u(n, j) - 5 * u(n - 1, j) + 4 * u(n - 2, j) - u(n - 3, j)) / h2;
            else
                ss = (u(i + 1, j) - 2 * u(i, j) + u(i - 1, j)) / h2;
            r(i, j) = (ss + ib2 * tt(j)) / rho2;
        }
    }
    return r;
}

/// Per-rho Fourier coefficients: u(rho_i, theta) ~ sum_l a_l(rho_i) cos(l theta) + b_l(rho_i) sin(l theta).
struct FourierModes {
    int l_max = 0;
    std::vector<double> rho;
    std::vector<std::vector<double>> cos_part;  // [l][i]
    std::vector<std::vector<double>> sin_part;  // [l][i], empty profile at l = 0 is all zeros
};

inline FourierModes fourier_modes(const PolarField& u, int l_max) {
    const auto& g = u.grid();
    const int nt = g.n_theta();
    if (nt <= 2 * l_max) throw std::invalid_argument("fourier_modes: n_theta must exceed 2 l_max");
    FourierModes m;
    m.l_max = l_max;
    m.rho = g.rhos();
    m.cos_part.assign(l_max + 1, std::vector<double>(g.rho_nodes(), 0));
    m.sin_part.assign(l_max + 1, std::vector<double>(g.rho_nodes(), 0));
    for (int l = 0; l <= l_max; ++l) {
        std::vector<double> c(nt), s(nt);
        for (int j = 0; j < nt; ++j) {
            c[j] = std::cos(l * g.theta(j));
            s[j] = std::sin(l * g.theta(j));
        }
        const double w = (l == 0 || 2 * l == nt) ? 1.0 / nt : 2.0 / nt;
        for (int i = 0; i < g.rho_nodes(); ++i) {
            long double ac = 0, as = 0;
            for (int j = 0; j < nt; ++j) {
                ac += static_cast<long double>(u(i, j)) * c[j];
                as += static_cast<long double>(u(i, j)) * s[j];
            }
            m.cos_part[l][i] = static_cast<double>(w * ac);
            m.sin_part[l][i] = l == 0 ? 0.0 : static_cast<double>(w * as);
        }
    }
    return m;
}

/// max over rho nodes of | (1/n) sum_j u^2 - (a_0^2 + 1/2 sum_{l>=1} (a_l^2 + b_l^2)) |, relative to
/// the mean square. Zero up to round-off when l_max captures every mode present.
inline double parseval_defect(const PolarField& u, const FourierModes& m) {
    const auto& g = u.grid();
    double worst = 0;
    for (int i = 0; i < g.rho_nodes(); ++i) {
        long double ms = 0;
        for (int j = 0; j < g.n_theta(); ++j) ms += static_cast<long double>(u(i, j)) * u(i, j);
        ms /= g.n_theta();
        long double e = static_cast<long double>(m.cos_part[0][i]) * m.cos_part[0][i];
        for (int l = 1; l <= m.l_max; ++l) {
            const long double a = m.cos_part[l][i], b = m.sin_part[l][i];
            e += (2 * l == g.n_theta()) ? a * a : (a * a + b * b) / 2;
        }
        if (ms > 0) worst = std::max(worst, static_cast<double>(std::abs(ms - e) / ms));
    }
    return worst;
}

}  // namespace conexp::numeric
