#include "mcrkit/bilinear.hpp"

#include "mcrkit/error.hpp"
#include "mcrkit/random.hpp"

#include <algorithm>
#include <cmath>

namespace mcr {

void validate(const SpectrumSet& set) {
    if (set.grid.size() == 0) throw InputError("spectrum grid is empty");
    if (set.components.empty()) throw InputError("spectrum set has no components");
    if (!set.names.empty() && set.names.size() != set.components.size())
        throw InputError("spectrum names do not match the component count");
    for (size_t j = 0; j < set.components.size(); ++j) {
        const auto& p = set.components[j];
        const std::string tag = "component " + std::to_string(j);
        if (!std::isfinite(p.amplitude) || p.amplitude < 0) throw InputError(tag + ": amplitude must be >= 0");
        if (!std::isfinite(p.center)) throw InputError(tag + ": center must be finite");
        if (!(p.width > 0) || !std::isfinite(p.width)) throw InputError(tag + ": width must be positive");
        if (!std::isfinite(p.baseline) || p.baseline < 0) throw InputError(tag + ": baseline must be >= 0");
    }
    require_finite(set.grid, "spectrum grid");
}

Matrix gaussian_spectra(const SpectrumSet& set) {
    validate(set);
    Matrix a(set.grid.size(), static_cast<Eigen::Index>(set.components.size()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const auto& p = set.components[static_cast<size_t>(j)];
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double dx = set.grid(i) - p.center;
            a(i, j) = p.amplitude * std::exp(-dx * dx / p.width) + p.baseline;
        }
    }
    return a;
}

std::vector<std::string> spectrum_preset_names() { return {"three-component", "four-component"}; }

SpectrumSet spectrum_preset(const std::string& name) {
    SpectrumSet s;
    s.grid = Vector::LinSpaced(100, 1.0, 100.0);
    const GaussianPeak p1{2.5, 20, 200, 0.075}, p2{12.5, 40, 200, 0.075}, p3{10, 60, 200, 0.065};
    if (name == "three-component") {
        s.names = {"X", "Y", "Z"};
        s.components = {p1, p2, p3};
    } else if (name == "four-component") {
        s.names = {"S", "K", "SK", "P"};
        s.components = {p1, p2, p3, {1.0, 80, 100, 0.065}};
    } else {
        throw InputError("unknown spectrum preset '" + name + "'");
    }
    return s;
}

Matrix bilinear_data(const Matrix& c, const Matrix& a) {
    if (c.cols() != a.cols())
        throw InputError("C has " + std::to_string(c.cols()) + " components, A has " + std::to_string(a.cols()));
    return c * a.transpose();
}

Matrix add_noise(const Matrix& d, const NoiseSpec& spec) {
    if (!(spec.sd >= 0) || !std::isfinite(spec.sd)) throw InputError("noise sd must be finite and >= 0");
    if (spec.sd == 0.0) return d;
    Xoshiro256 rng(spec.seed);
    Matrix out = d;
    for (Eigen::Index j = 0; j < d.cols(); ++j)
        for (Eigen::Index i = 0; i < d.rows(); ++i) out(i, j) += spec.sd * rng.normal();
    return out;
}

SpectraEstimate estimate_spectra(const Matrix& d, const Matrix& c) {
    if (d.rows() != c.rows())
        throw InputError("D has " + std::to_string(d.rows()) + " rows, C has " + std::to_string(c.rows()));
    const LstsqResult ls = least_squares(c, d);
    return {ls.x.transpose(), ls.rank, ls.rank_deficient};
}

KnownSpectraEstimate estimate_with_known(const Matrix& d, const Matrix& c, const std::vector<int>& known,
                                         const Matrix& a_known) {
    if (d.rows() != c.rows()) throw InputError("D and C row counts differ");
    const int nc = static_cast<int>(c.cols());
    std::vector<bool> is_known(static_cast<size_t>(nc), false);
    for (int k : known) {
        if (k < 0 || k >= nc) throw InputError("known component index " + std::to_string(k) + " out of range");
        if (is_known[static_cast<size_t>(k)]) throw InputError("known component " + std::to_string(k) + " repeated");
        is_known[static_cast<size_t>(k)] = true;
    }
    if (a_known.cols() != static_cast<Eigen::Index>(known.size()))
        throw InputError("A_known has " + std::to_string(a_known.cols()) + " columns for " +
                         std::to_string(known.size()) + " known components");
    if (!known.empty() && a_known.rows() != d.cols())
        throw InputError("A_known channel count does not match D");

    KnownSpectraEstimate r;
    for (int j = 0; j < nc; ++j)
        if (!is_known[static_cast<size_t>(j)]) r.unknown.push_back(j);

    Matrix resid = d;
    for (size_t q = 0; q < known.size(); ++q)
        resid -= c.col(known[q]) * a_known.col(static_cast<Eigen::Index>(q)).transpose();

    if (r.unknown.empty()) {
        r.a_unknown = Matrix(d.cols(), 0);
        r.residual_fro = resid.norm();
        return r;
    }
    Matrix cu(c.rows(), static_cast<Eigen::Index>(r.unknown.size()));
    for (size_t q = 0; q < r.unknown.size(); ++q) cu.col(static_cast<Eigen::Index>(q)) = c.col(r.unknown[q]);
    const LstsqResult ls = least_squares(cu, resid);
    r.a_unknown = ls.x.transpose();
    r.rank = ls.rank;
    r.rank_deficient = ls.rank_deficient;
    r.residual_fro = (resid - cu * ls.x).norm();
    return r;
}

AugmentedEstimate augmented_estimate(const std::vector<std::pair<Matrix, Matrix>>& pairs) {
    if (pairs.empty()) throw InputError("augmented_estimate needs at least one (D, C) pair");
    const Eigen::Index nch = pairs.front().first.cols(), ncomp = pairs.front().second.cols();
    Eigen::Index rows = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& [d, c] = pairs[i];
        if (d.cols() != nch || c.cols() != ncomp || d.rows() != c.rows())
            throw InputError("pair " + std::to_string(i) + " has inconsistent dimensions");
        rows += d.rows();
    }
    Matrix ds(rows, nch), cs(rows, ncomp);
    Eigen::Index at = 0;
    for (const auto& [d, c] : pairs) {
        ds.middleRows(at, d.rows()) = d;
        cs.middleRows(at, c.rows()) = c;
        at += d.rows();
    }
    const SpectraEstimate e = estimate_spectra(ds, cs);
    AugmentedEstimate r;
    r.a = e.a;
    r.rank_deficient = e.rank_deficient;
    r.stacked_rank = rank_report(cs);
    return r;
}

std::pair<Vector, Vector> premix_recovery(const Vector& a_sm, const Vector& d0, double s0, double k0) {
    if (a_sm.size() != d0.size()) throw InputError("premix vectors differ in length");
    if (!(s0 > 0) || !std::isfinite(s0)) throw DomainError("S0 must be positive");
    if (!(k0 > 0) || !std::isfinite(k0)) throw DomainError("K0 must be positive; the premix system is degenerate");
    return {a_sm / s0, (d0 - a_sm) / k0};
}

double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw InputError("cosine_similarity: length mismatch");
    const double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0) return 0.0;
    return a.dot(b) / (na * nb);
}

double peak_relative_rms_error(const Matrix& a_est, const Matrix& a) {
    if (a_est.rows() != a.rows() || a_est.cols() != a.cols() || a.size() == 0)
        throw InputError("peak_relative_rms_error: shapes differ");
    const double peak = a.cwiseAbs().maxCoeff();
    if (!(peak > 0)) throw InputError("peak_relative_rms_error: reference is zero");
    return std::sqrt((a_est - a).squaredNorm() / static_cast<double>(a.size())) / peak;
}

}  // namespace mcr
