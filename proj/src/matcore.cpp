#include "mcrkit/matcore.hpp"

#include "mcrkit/error.hpp"

#include <algorithm>
#include <cmath>

namespace mcr {

void require_finite(const Matrix& m, const std::string& what) {
    if (m.size() == 0) throw InputError(what + ": empty matrix");
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j)))
                throw InputError(what + ": non-finite entry at (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
}

void require_finite(const Vector& v, const std::string& what) {
    if (v.size() == 0) throw InputError(what + ": empty vector");
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i)))
            throw InputError(what + ": non-finite entry at " + std::to_string(i));
}

Matrix SvdResult::reconstruct() const { return u * s.asDiagonal() * vt; }

SvdResult svd(const Matrix& m, std::optional<int> k) {
    require_finite(m, "svd");
    const int full = static_cast<int>(std::min(m.rows(), m.cols()));
    const int keep = k.value_or(full);
    if (keep < 1 || keep > full)
        throw InputError("svd: k = " + std::to_string(keep) + " outside [1, " + std::to_string(full) + "]");

    Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult r;
    r.k = keep;
    r.u = dec.matrixU().leftCols(keep);
    r.s = dec.singularValues().head(keep);
    Matrix v = dec.matrixV().leftCols(keep);

    for (int j = 0; j < keep; ++j) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < r.u.rows(); ++i) {
            if (std::abs(r.u(i, j)) > best) {
                best = std::abs(r.u(i, j));
                imax = i;
            }
        }
        if (r.u(imax, j) < 0) {
            r.u.col(j) *= -1.0;
            v.col(j) *= -1.0;
        }
    }
    r.vt = v.transpose();
    return r;
}

double holder_norm(const Vector& v, double p) {
    if (v.size() == 0) throw InputError("holder_norm: empty vector");
    if (std::isnan(p) || p < 1.0) throw DomainError("holder_norm: p must be >= 1");
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    // scale by the max entry so large p does not overflow
    const double mx = v.cwiseAbs().maxCoeff();
    if (mx == 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v(i)) / mx, p);
    return mx * std::pow(acc, 1.0 / p);
}

RankReport estimate_rank(const Vector& s, double rel_tolerance) {
    if (s.size() == 0) throw InputError("estimate_rank: empty singular value list");
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s(i)) || s(i) < 0) throw InputError("estimate_rank: singular values must be finite and >= 0");
        if (i > 0 && s(i) > s(i - 1)) throw InputError("estimate_rank: singular values must be non-increasing");
    }
    RankReport r;
    r.singular_values.assign(s.data(), s.data() + s.size());
    r.rel_tolerance = rel_tolerance;

    const double cut = rel_tolerance * s(0);
    int rank = 0;
    while (rank < s.size() && s(rank) > cut) ++rank;
    r.estimated_rank = rank;
    r.condition_number = rank > 0 ? s(0) / s(rank - 1) : kInf;

    r.elbow_index = static_cast<int>(s.size());
    double best_gap = -1.0;
    for (Eigen::Index i = 0; i + 1 < s.size(); ++i) {
        const double gap = std::log10(s(i) + kElbowFloor) - std::log10(s(i + 1) + kElbowFloor);
        if (gap > best_gap) {
            best_gap = gap;
            r.elbow_index = static_cast<int>(i + 1);
        }
    }
    return r;
}

RankReport rank_report(const Matrix& m, std::optional<double> rel_tolerance) {
    const SvdResult d = svd(m);
    return estimate_rank(d.s, rel_tolerance.value_or(machine_rel_tolerance(m.rows(), m.cols())));
}

LstsqResult least_squares(const Matrix& a, const Matrix& b, std::optional<double> rel_tolerance) {
    if (a.rows() != b.rows())
        throw InputError("least_squares: a has " + std::to_string(a.rows()) + " rows, b has " +
                         std::to_string(b.rows()));
    require_finite(a, "least_squares a");
    require_finite(b, "least_squares b");

    const SvdResult d = svd(a);
    const double tol = rel_tolerance.value_or(machine_rel_tolerance(a.rows(), a.cols()));
    int rank = 0;
    while (rank < d.k && d.s(rank) > tol * d.s(0)) ++rank;

    LstsqResult r;
    r.rank = rank;
    r.rank_deficient = rank < a.cols();
    if (rank == 0) {
        r.x = Matrix::Zero(a.cols(), b.cols());
        return r;
    }
    const Matrix ut_b = d.u.leftCols(rank).transpose() * b;
    const Vector inv = d.s.head(rank).cwiseInverse();
    r.x = d.vt.topRows(rank).transpose() * (inv.asDiagonal() * ut_b);
    return r;
}

namespace {

// Signed squared projection sum of one factor vector onto the columns of x.
double signed_projection_sum(const Vector& vec, const Matrix& x) {
    const double nn = vec.squaredNorm();
    if (nn == 0.0) return 0.0;
    const Vector p = x.transpose() * (vec / nn);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double sg = p(i) > 0 ? 1.0 : (p(i) < 0 ? -1.0 : 0.0);
        acc += sg * p(i) * p(i);
    }
    return acc;
}

}  // namespace

SignFlipResult sign_flip(const Matrix& scores, const Matrix& loadings, const Matrix& data) {
    if (scores.cols() != loadings.cols())
        throw InputError("sign_flip: scores and loadings have different factor counts");
    if (scores.rows() != data.rows() || loadings.rows() != data.cols())
        throw InputError("sign_flip: factor shapes do not match data");

    const Eigen::Index nf = scores.cols();
    SignFlipResult r;
    r.scores = scores;
    r.loadings = loadings;
    r.signs = Matrix::Ones(2, nf);
    r.s_values = Matrix::Zero(2, nf);

    for (Eigen::Index f = 0; f < nf; ++f) {
        Matrix resid = data;
        for (Eigen::Index g = 0; g < nf; ++g)
            if (g != f) resid -= scores.col(g) * loadings.col(g).transpose();

        const double s1 = signed_projection_sum(scores.col(f), resid);
        const double s2 = signed_projection_sum(loadings.col(f), resid.transpose());
        r.s_values(0, f) = s1;
        r.s_values(1, f) = s2;

        double g1 = s1 < 0 ? -1.0 : 1.0;
        double g2 = s2 < 0 ? -1.0 : 1.0;
        if ((g1 < 0) != (g2 < 0)) {
            // odd number of negative modes: flip the least confident one
            if (std::abs(s1) <= std::abs(s2)) g1 = -g1;
            else g2 = -g2;
        }
        r.signs(0, f) = g1;
        r.signs(1, f) = g2;
    }
    for (Eigen::Index f = 0; f < nf; ++f) {
        r.scores.col(f) *= r.signs(0, f);
        r.loadings.col(f) *= r.signs(1, f);
    }
    return r;
}

}  // namespace mcr
