#include "mcrkit/scf.hpp"

#include "mcrkit/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mcr {

double scf_value(const Vector& c, const Vector& s, double d_fro2) {
    if (!(d_fro2 > 0) || !std::isfinite(d_fro2)) throw InputError("scf_value: ||D||_F^2 must be positive");
    return c.squaredNorm() * s.squaredNorm() / d_fro2;
}

NormIdentity norm_identity_check(const Matrix& u, const Vector& y) {
    if (u.cols() != y.size()) throw InputError("norm_identity_check: U has " + std::to_string(u.cols()) +
                                               " columns, y has " + std::to_string(y.size()) + " entries");
    NormIdentity r;
    const Matrix g = u.transpose() * u;
    r.basis_deviation = (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (r.basis_deviation > kOrthonormalTol) {
        std::ostringstream os;
        os << "norm_identity_check: U is not orthonormal (max |U^T U - I| = " << r.basis_deviation << ")";
        throw InputError(os.str());
    }
    r.image_norm2 = (u * y).squaredNorm();
    r.coord_norm2 = y.squaredNorm();
    return r;
}

namespace {

std::string index_list(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size() && i < 10; ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    if (v.size() > 10) s += ", ...";
    return s;
}

}  // namespace

TwoComponentRegion feasible_region_2comp(const Matrix& d, std::optional<double> rank_tol) {
    require_finite(d, "feasible_region_2comp");
    if (d.minCoeff() < 0) throw InputError("feasible_region_2comp: D has negative entries");
    std::vector<int> zr, zc;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        if (d.row(i).cwiseAbs().maxCoeff() == 0.0) zr.push_back(static_cast<int>(i));
    for (Eigen::Index j = 0; j < d.cols(); ++j)
        if (d.col(j).cwiseAbs().maxCoeff() == 0.0) zc.push_back(static_cast<int>(j));
    if (!zr.empty() || !zc.empty()) {
        std::string msg = "D contains";
        if (!zr.empty()) msg += " zero rows [" + index_list(zr) + "]";
        if (!zc.empty()) msg += std::string(zr.empty() ? "" : " and") + " zero columns [" + index_list(zc) + "]";
        throw InputError(msg + "; delete them before the analysis");
    }

    const SvdResult full = svd(d);
    const RankReport rr = estimate_rank(full.s, rank_tol.value_or(machine_rel_tolerance(d.rows(), d.cols())));
    if (rr.estimated_rank != 2)
        throw InputError("feasible_region_2comp: numerical rank of D is " + std::to_string(rr.estimated_rank) +
                         ", expected 2");

    TwoComponentRegion reg;
    AbstractSpace& sp = reg.space;
    sp.u = full.u.leftCols(2);
    sp.v = full.vt.topRows(2).transpose();
    sp.sigma = full.s.head(2);
    // Perron vectors of a nonnegative matrix: make the first pair nonnegative
    if (sp.v.col(0).sum() < 0) {
        sp.u.col(0) *= -1.0;
        sp.v.col(0) *= -1.0;
    }
    sp.scores = sp.u * sp.sigma.asDiagonal();
    sp.d_fro2 = d.squaredNorm();

    double r_min = kInf, r_max = -kInf;
    for (Eigen::Index i = 0; i < sp.scores.rows(); ++i) {
        const double x1 = sp.scores(i, 0);
        if (!(x1 > 0)) throw InputError("feasible_region_2comp: row " + std::to_string(i) + " has a non-positive first score");
        const double r = sp.scores(i, 1) / x1;
        if (r < r_min) { r_min = r; reg.alpha_row = static_cast<int>(i); }
        if (r > r_max) { r_max = r; reg.beta_row = static_cast<int>(i); }
    }
    double t_lo = -kInf, t_hi = kInf;
    for (Eigen::Index k = 0; k < sp.v.rows(); ++k) {
        const double a = sp.v(k, 0), b = sp.v(k, 1);
        if (b > 0) {
            const double t = -a / b;
            if (t > t_lo) { t_lo = t; reg.alpha_channel = static_cast<int>(k); }
        } else if (b < 0) {
            const double t = -a / b;
            if (t < t_hi) { t_hi = t; reg.beta_channel = static_cast<int>(k); }
        } else if (a < 0) {
            reg.empty = true;
        }
    }
    // pure variables on both sides collapse an interval to a point; absorb the rounding
    auto snap = [](double& lo, double& hi) {
        if (lo > hi && lo - hi <= kRegionSnapTol * std::max(1.0, std::abs(lo))) lo = hi;
    };
    snap(t_lo, r_min);
    snap(r_max, t_hi);
    reg.alpha_min = t_lo;
    reg.alpha_max = r_min;
    reg.beta_min = r_max;
    reg.beta_max = t_hi;
    if (!(t_lo <= r_min) || !(r_max <= t_hi) || !std::isfinite(t_lo) || !std::isfinite(t_hi)) reg.empty = true;
    return reg;
}

std::pair<Matrix, Matrix> two_component_factors(const AbstractSpace& sp, double alpha, double beta) {
    if (alpha == beta) throw DomainError("transformation is singular for alpha == beta");
    Eigen::Matrix2d t;
    t << 1.0, alpha, 1.0, beta;
    const Matrix c = sp.scores * t.inverse();
    const Matrix s = sp.v * t.transpose();
    return {c, s};
}

double spectrum_coordinate(const AbstractSpace& sp, const Vector& s) {
    const Vector y = sp.v.transpose() * s;
    if (y(0) == 0.0) throw DomainError("spectrum has no component along the first right singular vector");
    return y(1) / y(0);
}

bool on_boundary_ring(std::pair<int, int> cell, int grid_n) {
    return cell.first == 0 || cell.second == 0 || cell.first == grid_n - 1 || cell.second == grid_n - 1;
}

ScfGrid scf_boundary_study(const Matrix& d, const TwoComponentRegion& reg, int grid_n) {
    if (reg.empty) throw InputError("feasible region is empty (noise too large for a two-component model)");
    if (grid_n < 16) throw InputError("grid_n must be at least 16");
    if (d.rows() != reg.space.u.rows() || d.cols() != reg.space.v.rows())
        throw InputError("region was computed for a different data matrix");

    ScfGrid g;
    g.alphas = Vector::LinSpaced(grid_n, reg.alpha_min, reg.alpha_max);
    g.betas = Vector::LinSpaced(grid_n, reg.beta_min, reg.beta_max);
    g.values = Matrix::Constant(grid_n, grid_n, std::numeric_limits<double>::quiet_NaN());
    const double dn = d.squaredNorm();
    g.max = -kInf;
    g.min = kInf;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            if (g.alphas(i) == g.betas(j)) {
                g.skipped.emplace_back(i, j);
                continue;
            }
            const auto [c, s] = two_component_factors(reg.space, g.alphas(i), g.betas(j));
            const double v = scf_value(c.col(0), s.col(0), dn);
            g.values(i, j) = v;
            if (v > g.max) { g.max = v; g.argmax = {i, j}; }
            if (v < g.min) { g.min = v; g.argmin = {i, j}; }
        }
    }
    if (!std::isfinite(g.max)) throw NumericalError("every grid cell was singular");
    g.extrema_on_boundary = on_boundary_ring(g.argmax, grid_n) && on_boundary_ring(g.argmin, grid_n);
    return g;
}

namespace {

Vector gaussian(const Vector& x, double amp, double center, double width, double base) {
    return (amp * (-(x.array() - center).square() / width).exp() + base).matrix();
}

}  // namespace

std::vector<TwoComponentPreset> two_component_presets() {
    std::vector<TwoComponentPreset> out;
    const Vector ch = Vector::LinSpaced(100, 1.0, 100.0);

    // A <-> B, kf = 0.5 1/s, kr = 0.1 1/s, A0 = 1, B0 = 0.1 over 10 s
    TwoComponentPreset a;
    a.name = "reversible";
    a.description = "A <-> B with kf = 0.5 1/s, kr = 0.1 1/s, bands at channels 30 and 70";
    a.times = Vector::LinSpaced(51, 0.0, 10.0);
    a.channels = ch;
    a.c.resize(a.times.size(), 2);
    const double total = 1.1, a_eq = total * 0.1 / 0.6;
    a.c.col(0) = (a_eq + (1.0 - a_eq) * (-0.6 * a.times.array()).exp()).matrix();
    a.c.col(1) = (total - a.c.col(0).array()).matrix();
    a.s.resize(ch.size(), 2);
    a.s.col(0) = gaussian(ch, 1.0, 30.0, 400.0, 0.0);
    a.s.col(1) = gaussian(ch, 0.8, 70.0, 400.0, 0.0);
    out.push_back(a);

    // two overlapping elution peaks with overlapping bands on a small baseline
    TwoComponentPreset b;
    b.name = "overlapping";
    b.description = "elution peaks at 4 and 6 min, bands at channels 40 and 55 on a 0.02 baseline";
    b.times = Vector::LinSpaced(61, 0.0, 10.0);
    b.channels = ch;
    b.c.resize(b.times.size(), 2);
    b.c.col(0) = gaussian(b.times, 1.0, 4.0, 2.0, 0.0);
    b.c.col(1) = gaussian(b.times, 0.7, 6.0, 3.0, 0.0);
    b.s.resize(ch.size(), 2);
    b.s.col(0) = gaussian(ch, 1.0, 40.0, 300.0, 0.02);
    b.s.col(1) = gaussian(ch, 1.2, 55.0, 250.0, 0.02);
    out.push_back(b);
    return out;
}

TwoComponentPreset two_component_preset(const std::string& name) {
    for (auto& p : two_component_presets())
        if (p.name == name) return p;
    throw InputError("unknown two-component preset '" + name + "'");
}

}  // namespace mcr
