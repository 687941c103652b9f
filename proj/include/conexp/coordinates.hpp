#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace conexp {

class OutOfChart : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline double wrap_angle(double t) {
    constexpr double two_pi = 2 * std::numbers::pi;
    double r = std::fmod(t, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0;
    return r;
}

/// (rho, theta, xi) with rho = |z1|^beta / beta; xi holds (x2, y2, x3, y3, ...).
struct PolarPoint {
    double rho = 0;
    double theta = 0;
    std::vector<double> xi;

    PolarPoint() = default;
    PolarPoint(double r, double t, std::vector<double> x = {}) : rho(r), theta(wrap_angle(t)), xi(std::move(x)) {
        if (!(r >= 0)) throw std::invalid_argument("PolarPoint: rho must be nonnegative");
    }
};

struct HoloPoint {
    std::complex<double> z1;
    std::vector<double> xi;
};

inline PolarPoint polar_from_holo(const HoloPoint& p, double beta) {
    const double r = std::abs(p.z1);
    if (r == 0) return PolarPoint(0, 0, p.xi);
    return PolarPoint(std::pow(r, beta) / beta, std::arg(p.z1), p.xi);
}

inline HoloPoint holo_from_polar(const PolarPoint& p, double beta) {
    const double r = std::pow(beta * p.rho, 1 / beta);
    return HoloPoint{std::polar(r, p.theta), p.xi};
}

inline double default_chart_constant(double beta) { return 0.25 * std::min(1.0, beta); }

/// Lifted chart around Z0 = (rho0, theta0, xi0). Points of Omega satisfy rho0/2 < rho < 2 rho0,
/// |theta - theta0| < 0.1 after unwrapping and |xi - xi0| < rho0.
class LiftedChart {
public:
    LiftedChart(PolarPoint base, double beta) : LiftedChart(std::move(base), beta, default_chart_constant(beta)) {}
    LiftedChart(PolarPoint base, double beta, double c_beta) : base_(std::move(base)), beta_(beta), c_beta_(c_beta) {
        if (!(base_.rho > 0)) throw std::invalid_argument("LiftedChart: base point needs rho0 > 0");
        if (!(beta > 0 && beta < 1)) throw std::invalid_argument("LiftedChart: beta must lie in (0, 1)");
        if (!(c_beta > 0 && c_beta < 1)) throw std::invalid_argument("LiftedChart: c_beta must lie in (0, 1)");
    }

    const PolarPoint& base() const noexcept { return base_; }
    double beta() const noexcept { return beta_; }
    double radius() const noexcept { return c_beta_ * base_.rho; }

    /// theta continued to the branch nearest theta0.
    double unwrap(double theta) const {
        constexpr double two_pi = 2 * std::numbers::pi;
        return theta - two_pi * std::round((theta - base_.theta) / two_pi);
    }

    bool contains(const PolarPoint& p) const {
        if (!(p.rho > base_.rho / 2 && p.rho < 2 * base_.rho)) return false;
        if (!(std::abs(unwrap(p.theta) - base_.theta) < 0.1)) return false;
        return xi_distance(p) < base_.rho;
    }

    void require(const PolarPoint& p) const {
        if (!contains(p)) throw OutOfChart("point outside the lifted chart domain");
    }

    std::complex<double> v0() const { return std::polar(base_.rho, beta_ * base_.theta); }

    /// v1 = rho e^{i beta theta} with the branch fixed by theta0.
    std::complex<double> lifted(const PolarPoint& p) const {
        require(p);
        return std::polar(p.rho, beta_ * unwrap(p.theta));
    }

    /// Full lifted vector (v1, z2, ..., zn).
    std::vector<std::complex<double>> lifted_vector(const PolarPoint& p) const {
        std::vector<std::complex<double>> v{lifted(p)};
        for (std::size_t i = 0; i + 1 < p.xi.size(); i += 2) v.emplace_back(p.xi[i], p.xi[i + 1]);
        return v;
    }

    /// (v - v0) / rho0.
    std::vector<std::complex<double>> scaled_lifted(const PolarPoint& p) const {
        auto v = lifted_vector(p);
        v[0] = (v[0] - v0()) / base_.rho;
        for (std::size_t l = 1; l < v.size(); ++l) {
            const std::complex<double> z0(base_.xi[2 * (l - 1)], base_.xi[2 * (l - 1) + 1]);
            v[l] = (v[l] - z0) / base_.rho;
        }
        return v;
    }

    /// Rows: d/dv~1, d/dconj(v~1), then d/dv~l, d/dconj(v~l) for l >= 2.
    /// Columns: rho d_rho, d_theta, then rho d_x_l, rho d_y_l.
    Eigen::MatrixXcd frame_forward(const PolarPoint& p) const {
        require(p);
        const std::size_t n = 2 + p.xi.size();
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        const std::complex<double> I(0, 1);
        const double s = base_.rho / (2 * p.rho);
        const double bt = beta_ * unwrap(p.theta);
        m(0, 0) = s * std::exp(-I * bt);
        m(0, 1) = s / beta_ * std::exp(I * (1.5 * std::numbers::pi - bt));
        m(1, 0) = s * std::exp(I * bt);
        m(1, 1) = s / beta_ * std::exp(I * (-1.5 * std::numbers::pi + bt));
        for (std::size_t j = 2; j + 1 < n; j += 2) {
            m(j, j) = s;
            m(j, j + 1) = -I * s;
            m(j + 1, j) = s;
            m(j + 1, j + 1) = I * s;
        }
        return m;
    }

    /// Inverse relations: rows rho d_rho, d_theta, rho d_x_l, rho d_y_l; columns as the rows
    /// of frame_forward. The rho d_y_l row carries the factor i required by the forward relation.
    Eigen::MatrixXcd frame_backward(const PolarPoint& p) const {
        require(p);
        const std::size_t n = 2 + p.xi.size();
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        const std::complex<double> I(0, 1);
        const double s = p.rho / base_.rho;
        const double bt = beta_ * unwrap(p.theta);
        m(0, 0) = s * std::exp(I * bt);
        m(0, 1) = s * std::exp(-I * bt);
        m(1, 0) = beta_ * I * s * std::exp(I * bt);
        m(1, 1) = -beta_ * I * s * std::exp(-I * bt);
        for (std::size_t j = 2; j + 1 < n; j += 2) {
            m(j, j) = s;
            m(j, j + 1) = s;
            m(j + 1, j) = I * s;
            m(j + 1, j + 1) = -I * s;
        }
        return m;
    }

private:
    double xi_distance(const PolarPoint& p) const {
        if (p.xi.size() != base_.xi.size()) throw std::invalid_argument("LiftedChart: xi dimension mismatch");
        double d2 = 0;
        for (std::size_t i = 0; i < p.xi.size(); ++i) d2 += (p.xi[i] - base_.xi[i]) * (p.xi[i] - base_.xi[i]);
        return std::sqrt(d2);
    }

    PolarPoint base_;
    double beta_;
    double c_beta_;
};

/// Distance of the flat cone metric d rho^2 + beta^2 rho^2 d theta^2 + d xi^2 in lifted form.
/// The second angle is taken on the branch nearest the first.
inline double cone_distance(const PolarPoint& p1, const PolarPoint& p2, double beta) {
    if (p1.xi.size() != p2.xi.size()) throw std::invalid_argument("cone_distance: xi dimension mismatch");
    constexpr double two_pi = 2 * std::numbers::pi;
    double d2 = 0;
    for (std::size_t i = 0; i < p1.xi.size(); ++i) d2 += (p1.xi[i] - p2.xi[i]) * (p1.xi[i] - p2.xi[i]);
    const double t2 = p2.theta - two_pi * std::round((p2.theta - p1.theta) / two_pi);
    const double e1 = beta * p1.theta, e2 = beta * t2;
    const double dc = p1.rho * std::cos(e1) - p2.rho * std::cos(e2);
    const double ds = p1.rho * std::sin(e1) - p2.rho * std::sin(e2);
    return std::sqrt(d2 + dc * dc + ds * ds);
}

}  // namespace conexp
