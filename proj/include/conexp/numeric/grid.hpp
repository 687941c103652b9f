#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "conexp/beta.hpp"
#include "conexp/expansion.hpp"

namespace conexp::numeric {

/// rho_i = rho_min (rho_max / rho_min)^{i / n_rho}, i = 0..n_rho; theta_j = 2 pi j / n_theta.
/// The rho nodes are uniform in s = log rho with spacing ds.
class PolarGrid {
public:
    PolarGrid(const Beta& beta, int n_rho, int n_theta, double rho_min, double rho_max)
        : beta_(beta), n_rho_(n_rho), n_theta_(n_theta), rho_min_(rho_min), rho_max_(rho_max) {
        if (n_rho < 8 || n_theta < 8) throw std::invalid_argument("PolarGrid: n_rho and n_theta must be >= 8");
        if (!(rho_min > 0) || !(rho_max > rho_min)) throw std::invalid_argument("PolarGrid: need 0 < rho_min < rho_max");
        if (rho_max > 0.5) throw std::invalid_argument("PolarGrid: rho_max must be <= 1/2");
        ds_ = std::log(rho_max / rho_min) / n_rho;
        rho_.resize(n_rho + 1);
        for (int i = 0; i <= n_rho; ++i) rho_[i] = rho_min * std::exp(ds_ * i);
        rho_[n_rho] = rho_max;
        theta_.resize(n_theta);
        for (int j = 0; j < n_theta; ++j) theta_[j] = 2 * std::numbers::pi * j / n_theta;
    }

    const Beta& beta() const noexcept { return beta_; }
    int n_rho() const noexcept { return n_rho_; }
    int n_theta() const noexcept { return n_theta_; }
    int rho_nodes() const noexcept { return n_rho_ + 1; }
    double rho_min() const noexcept { return rho_min_; }
    double rho_max() const noexcept { return rho_max_; }
    double ds() const noexcept { return ds_; }
    double dtheta() const noexcept { return 2 * std::numbers::pi / n_theta_; }
    double rho(int i) const { return rho_[i]; }
    double theta(int j) const { return theta_[j]; }
    const std::vector<double>& rhos() const noexcept { return rho_; }

    /// Same annulus and theta nodes with n_rho multiplied by `factor`.
    PolarGrid refined(int factor) const { return PolarGrid(beta_, n_rho_ * factor, n_theta_, rho_min_, rho_max_); }

    bool same_layout(const PolarGrid& o) const {
        return beta_ == o.beta_ && n_rho_ == o.n_rho_ && n_theta_ == o.n_theta_ && rho_min_ == o.rho_min_ &&
               rho_max_ == o.rho_max_;
    }

private:
    Beta beta_;
    int n_rho_, n_theta_;
    double rho_min_, rho_max_, ds_;
    std::vector<double> rho_, theta_;
};

/// Node values u(rho_i, theta_j), stored row-major by rho.
class PolarField {
public:
    explicit PolarField(PolarGrid grid, double fill = 0)
        : grid_(std::move(grid)), v_(static_cast<std::size_t>(grid_.rho_nodes()) * grid_.n_theta(), fill) {}

    const PolarGrid& grid() const noexcept { return grid_; }
    double& operator()(int i, int j) { return v_[index(i, j)]; }
    double operator()(int i, int j) const { return v_[index(i, j)]; }
    std::vector<double>& data() noexcept { return v_; }
    const std::vector<double>& data() const noexcept { return v_; }

    std::vector<double> ring(int i) const {
        return std::vector<double>(v_.begin() + index(i, 0), v_.begin() + index(i, 0) + grid_.n_theta());
    }

    bool finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * grid_.n_theta() + static_cast<std::size_t>(j);
    }

private:
    PolarGrid grid_;
    std::vector<double> v_;
};

inline PolarField sample(const PolarGrid& g, const std::function<double(double, double)>& f) {
    PolarField u(g);
    for (int i = 0; i < g.rho_nodes(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) u(i, j) = f(g.rho(i), g.theta(j));
    return u;
}

template <Scalar F>
PolarField sample(const PolarGrid& g, const Expansion<F>& e) {
    if (!(e.beta() == g.beta())) throw ModeMismatch("sample: expansion and grid have different beta");
    const auto fe = to_float(e);
    return sample(g, [&](double r, double t) { return fe.evaluate_real(r, t); });
}

inline PolarField operator-(const PolarField& a, const PolarField& b) {
    if (!a.grid().same_layout(b.grid())) throw std::invalid_argument("PolarField: grid mismatch");
    PolarField r(a.grid());
    for (std::size_t n = 0; n < r.data().size(); ++n) r.data()[n] = a.data()[n] - b.data()[n];
    return r;
}

/// Max |u| over nodes with rho in [lo, hi].
inline double max_abs_on(const PolarField& u, double lo, double hi) {
    double m = 0;
    const auto& g = u.grid();
    for (int i = 0; i < g.rho_nodes(); ++i) {
        if (g.rho(i) < lo || g.rho(i) > hi) continue;
        for (int j = 0; j < g.n_theta(); ++j) m = std::max(m, std::abs(u(i, j)));
    }
    return m;
}

/// Values of a refined(2^k) field at the nodes of the coarse grid.
inline PolarField restrict_to(const PolarField& fine, const PolarGrid& coarse) {
    const auto& g = fine.grid();
    if (g.n_theta() != coarse.n_theta() || g.n_rho() % coarse.n_rho() != 0 || g.rho_min() != coarse.rho_min() ||
        g.rho_max() != coarse.rho_max())
        throw std::invalid_argument("restrict_to: grids are not nested");
    const int f = g.n_rho() / coarse.n_rho();
    PolarField r(coarse);
    for (int i = 0; i < coarse.rho_nodes(); ++i)
        for (int j = 0; j < coarse.n_theta(); ++j) r(i, j) = fine(i * f, j);
    return r;
}

/// Richardson extrapolation for errors with even powers of the mesh width, on nested grids
/// with refinement ratio 2. Two levels remove h^2, three levels remove h^2 and h^4.
inline PolarField richardson(const std::vector<PolarField>& levels) {
    if (levels.empty()) throw std::invalid_argument("richardson: no levels");
    const PolarGrid& coarse = levels.front().grid();
    std::vector<PolarField> onc;
    for (const auto& l : levels) onc.push_back(restrict_to(l, coarse));
    // Neville-style elimination: T_{k,j} = (4^j T_{k,j-1} - T_{k-1,j-1}) / (4^j - 1).
    std::vector<PolarField> t = onc;
    for (std::size_t j = 1; j < t.size(); ++j) {
        const double w = std::pow(4.0, static_cast<double>(j));
        for (std::size_t k = t.size() - 1; k >= j; --k) {
            for (std::size_t n = 0; n < t[k].data().size(); ++n)
                t[k].data()[n] = (w * t[k].data()[n] - t[k - 1].data()[n]) / (w - 1);
        }
    }
    return t.back();
}

inline void write_csv(std::ostream& os, const PolarField& u) {
    os.precision(17);
    os << "rho,theta,value\n";
    const auto& g = u.grid();
    for (int i = 0; i < g.rho_nodes(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) os << g.rho(i) << ',' << g.theta(j) << ',' << u(i, j) << '\n';
}

}  // namespace conexp::numeric
