#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conexp/expansion.hpp"
#include "conexp/numeric/grid.hpp"
#include "conexp/numeric/operators.hpp"

namespace conexp::numeric {

class IllConditioned : public std::runtime_error {
public:
    IllConditioned(const std::string& what, double c) : std::runtime_error(what), condition(c) {}
    double condition;
};

/// Column rho^{a + k/beta} (log rho)^m of a radial design matrix.
struct FitColumn {
    int a = 0, k = 0, m = 0;
    bool nuisance = false;               // fitted but not compared (harmonic data, tail terms)
    std::optional<double> predicted;     // coefficient from the formal expansion
    double fitted = 0;
    double std_error = 0;

    static FitColumn of(int a, int k, int m, bool nuisance = false) {
        FitColumn c;
        c.a = a, c.k = k, c.m = m, c.nuisance = nuisance;
        return c;
    }
    double exponent(const Beta& b) const { return a + k / b.value(); }
};

struct ModeFit {
    int l = 0;
    Parity parity = Parity::Cos;
    std::vector<FitColumn> columns;
    double window_lo = 0, window_hi = 0;
    double condition = 0;
    double residual_rms = 0;
    double residual_slope = 0;           // log-log slope of the binned sup of the residual
    std::vector<std::pair<double, double>> residual_bins;  // (bin centre rho, sup |r|)
    int samples = 0;
};

struct FitOptions {
    double window_lo = 0, window_hi = 0.3;
    double condition_limit = 1e8;
    int residual_bins = 12;
    /// Bins whose residual sup is below noise_factor * (rms of the full-model residual) are at the
    /// round-off floor and left out of the slope.
    double noise_factor = 10;
    /// Columns with exponent below this order enter the residual; the rest are treated as part
    /// of the remainder. Unset means every column.
    std::optional<double> residual_order;
};

namespace detail {

inline double column_value(const FitColumn& c, const Beta& b, double rho) {
    return std::pow(rho, c.exponent(b)) * std::pow(std::log(rho), c.m);
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nan("");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

}  // namespace detail

/// Radial least squares of `profile` (values at `rho`) on the given columns over the window.
/// A known `offset` (same length) is subtracted before fitting but not from the residual.
/// Columns are normalized before an SVD; standard errors use sigma^2 (A^T A)^{-1}.
inline ModeFit fit_profile(const Beta& b, const std::vector<double>& rho, const std::vector<double>& profile,
                           std::vector<FitColumn> columns, const FitOptions& opt,
                           const std::vector<double>* offset = nullptr) {
    if (rho.size() != profile.size() || (offset && offset->size() != rho.size()))
        throw std::invalid_argument("fit_profile: size mismatch");
    if (columns.empty()) throw std::invalid_argument("fit_profile: empty basis");
    if (!(opt.window_lo < opt.window_hi)) throw std::invalid_argument("fit_profile: empty window");
    std::vector<int> rows;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho[i] >= opt.window_lo && rho[i] <= opt.window_hi) rows.push_back(static_cast<int>(i));
    if (rho.empty() || opt.window_lo < rho.front() * (1 - 1e-12) || opt.window_hi > rho.back() * (1 + 1e-12))
        throw std::invalid_argument("fit_profile: window outside the grid");
    const int n = static_cast<int>(rows.size()), p = static_cast<int>(columns.size());
    if (n <= p)
        throw IllConditioned("fit_profile: " + std::to_string(n) + " window nodes for " + std::to_string(p) + " columns", INFINITY);

    Eigen::MatrixXd A(n, p);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        y(r) = profile[rows[r]] - (offset ? (*offset)[rows[r]] : 0.0);
        for (int c = 0; c < p; ++c) A(r, c) = detail::column_value(columns[c], b, rho[rows[r]]);
    }
    Eigen::VectorXd scale(p);
    for (int c = 0; c < p; ++c) {
        scale(c) = A.col(c).norm();
        if (!(scale(c) > 0)) throw IllConditioned("fit_profile: zero column", INFINITY);
        A.col(c) /= scale(c);
    }
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(p - 1);
    if (!(cond <= opt.condition_limit))
        throw IllConditioned("fit_profile: condition number " + std::to_string(cond) + " above limit", cond);
    const Eigen::VectorXd xs = svd.solve(y);
    const Eigen::VectorXd res = y - A * xs;
    const double s2 = res.squaredNorm() / (n - p);
    const Eigen::MatrixXd vs = svd.matrixV() * sv.cwiseInverse().asDiagonal();
    const Eigen::VectorXd var = (vs * vs.transpose()).diagonal() * s2;

    ModeFit out;
    out.columns = std::move(columns);
    for (int c = 0; c < p; ++c) {
        out.columns[c].fitted = xs(c) / scale(c);
        out.columns[c].std_error = std::sqrt(var(c)) / scale(c);
    }
    out.window_lo = opt.window_lo;
    out.window_hi = opt.window_hi;
    out.condition = cond;
    out.residual_rms = std::sqrt(res.squaredNorm() / n);
    out.samples = n;

    // Residual against the part of the fit below the residual order, binned in log rho.
    std::vector<double> rr(n);
    for (int r = 0; r < n; ++r) {
        double v = profile[rows[r]];
        for (const auto& c : out.columns)
            if (!opt.residual_order || c.exponent(b) < *opt.residual_order - 1e-12)
                v -= c.fitted * detail::column_value(c, b, rho[rows[r]]);
        rr[r] = v;
    }
    const double l0 = std::log(opt.window_lo), l1 = std::log(opt.window_hi);
    const int bins = std::max(2, opt.residual_bins);
    std::vector<double> bx, by;
    for (int k = 0; k < bins; ++k) {
        const double lo = l0 + (l1 - l0) * k / bins, hi = l0 + (l1 - l0) * (k + 1) / bins;
        double sup = 0;
        int count = 0;
        for (int r = 0; r < n; ++r) {
            const double lr = std::log(rho[rows[r]]);
            if (lr >= lo && (lr < hi || (k == bins - 1 && lr <= hi))) sup = std::max(sup, std::abs(rr[r])), ++count;
        }
        if (count == 0) continue;
        out.residual_bins.emplace_back(std::exp((lo + hi) / 2), sup);
        if (sup > opt.noise_factor * out.residual_rms) {
            bx.push_back((lo + hi) / 2);
            by.push_back(std::log(sup));
        }
    }
    out.residual_slope = detail::slope(bx, by);
    return out;
}

/// Column set for mode (l, parity): every term of `basis` in that channel plus the harmonic
/// rho^{l/beta} T(l theta). Terms with the same numeric exponent and log power are one function
/// and share a column; its prediction sums the `compared` coefficients. Harmonic columns and
/// columns with no compared term are nuisance.
template <Scalar F>
std::vector<FitColumn> predicted_columns(const Expansion<F>& basis, const Expansion<F>& compared, int l, Parity parity) {
    const Beta& b = basis.beta();
    std::vector<FitColumn> cols;
    const auto fb = to_float(basis);
    const auto fc = to_float(compared);
    const auto add = [&](int a, int k, int m) {
        const FitColumn probe = FitColumn::of(a, k, m);
        for (const auto& c : cols)
            if (c.m == m && std::abs(c.exponent(b) - probe.exponent(b)) < 1e-12) return;
        FitColumn col = FitColumn::of(a, k, m, true);
        if (!(a == 0 && k == l && m == 0)) {
            for (const auto& [key, c] : fc.terms()) {
                const auto& t = key.term;
                if (t.l != l || t.parity != parity || t.m != m) continue;
                if (std::abs(FitColumn::of(t.a, t.k, t.m).exponent(b) - probe.exponent(b)) >= 1e-12) continue;
                col.predicted = col.predicted.value_or(0) + c;
                col.nuisance = false;
            }
        }
        cols.push_back(col);
    };
    if (!(l == 0 && parity == Parity::Sin)) add(0, l, 0);
    for (const auto& [key, c] : fb.terms())
        if (key.term.l == l && key.term.parity == parity) add(key.term.a, key.term.k, key.term.m);
    return cols;
}

struct ProbeReport {
    int k1 = 0, k2 = 0;
    std::vector<std::pair<double, double>> annuli;  // (geometric centre rho, sup)
    double slope = 0;                               // d log sup / d log rho
};

/// Discrete (rho d_rho)^{k1} d_theta^{k2} u, sup over dyadic annuli [2^{-m-1}, 2^{-m}] rho_hi
/// inside [rho_lo, rho_hi], and the log-log slope of those sups against rho.
inline ProbeReport weighted_derivative_probe(const PolarField& u, int k1, int k2, double rho_lo, double rho_hi,
                                             ThetaScheme scheme = ThetaScheme::Spectral) {
    if (k1 < 0 || k2 < 0 || k1 + k2 > 3) throw std::invalid_argument("weighted_derivative_probe: need k1 + k2 <= 3");
    PolarField d = u;
    for (int i = 0; i < k1; ++i) d = rho_d_rho(d);
    for (int i = 0; i < k2; ++i) d = d_theta(d, scheme);
    ProbeReport rep{k1, k2, {}, 0};
    const auto& g = u.grid();
    std::vector<double> x, y;
    for (double hi = rho_hi; hi / 2 >= rho_lo * (1 - 1e-12); hi /= 2) {
        const double lo = hi / 2;
        double sup = 0;
        for (int i = 0; i < g.rho_nodes(); ++i) {
            if (g.rho(i) < lo || g.rho(i) > hi) continue;
            for (int j = 0; j < g.n_theta(); ++j) sup = std::max(sup, std::abs(d(i, j)));
        }
        const double centre = std::sqrt(lo * hi);
        rep.annuli.emplace_back(centre, sup);
        if (sup > 0) {
            x.push_back(std::log(centre));
            y.push_back(std::log(sup));
        }
    }
    rep.slope = detail::slope(x, y);
    return rep;
}

}  // namespace conexp::numeric
