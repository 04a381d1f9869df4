#include "mcrkit/normalization.hpp"

#include "mcrkit/error.hpp"

#include <cmath>
#include <sstream>

namespace mcr {

namespace {

Matrix divide_rows(const Matrix& m, const Vector& div, const char* what) {
    Matrix out = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!(std::abs(div(i)) > kDivisorFloor)) {
            std::ostringstream os;
            os << what << " of row " << i << " is " << div(i) << "; cannot normalize";
            throw InputError(os.str());
        }
        out.row(i) /= div(i);
    }
    return out;
}

}  // namespace

Matrix normalize_rows_sum(const Matrix& m, RowSumMode mode) {
    require_finite(m, "normalize_rows_sum");
    const Vector div = mode == RowSumMode::Plain ? Vector(m.rowwise().sum()) : Vector(m.cwiseAbs().rowwise().sum());
    return divide_rows(m, div, mode == RowSumMode::Plain ? "sum" : "absolute sum");
}

Matrix internal_normalize_sum(const Matrix& scores) {
    require_finite(scores, "internal_normalize_sum");
    return divide_rows(scores, scores.rowwise().sum(), "score sum");
}

Matrix fsvt1n_internal(const Matrix& scores) {
    require_finite(scores, "fsvt1n_internal");
    Matrix out = divide_rows(scores, scores.col(0), "first score");
    out.col(0).setOnes();
    return out;
}

Fsvt1nResult fsvt1n_external(const Matrix& r_in, int rank, const Fsvt1nOptions& opt) {
    require_finite(r_in, "fsvt1n_external");
    if (rank < 1 || rank > std::min(r_in.rows(), r_in.cols()))
        throw InputError("fsvt1n_external: rank " + std::to_string(rank) + " exceeds the matrix dimensions");
    if (r_in.cwiseAbs().maxCoeff() == 0.0) throw InputError("fsvt1n_external: matrix is zero");
    if (opt.max_iter < 1) throw InputError("fsvt1n_external: max_iter must be >= 1");

    Fsvt1nResult res;
    Matrix r = r_in;
    Matrix prev1, prev2;  // X one and two iterations back
    while (true) {
        SvdResult d = svd(r, rank);
        if (d.u.col(0).maxCoeff() <= 0) {
            d.u.col(0) *= -1.0;
            d.vt.row(0) *= -1.0;
        }
        const Vector v1 = d.vt.row(0).transpose();
        const Vector rv = r * v1;
        for (Eigen::Index i = 0; i < rv.size(); ++i) {
            if (!(std::abs(rv(i)) > kDivisorFloor)) {
                std::ostringstream os;
                os << "fsvt1n_external: (R v1)[" << i << "] = " << rv(i) << " at iteration " << res.iterations + 1;
                throw NumericalError(os.str());
            }
        }
        r = r.array().colwise() / rv.array();
        prev2 = std::move(prev1);
        prev1 = std::move(res.scores);
        res.scores = d.u * d.s.asDiagonal();
        res.loadings = d.vt.transpose();
        ++res.iterations;
        if (opt.keep_history) res.history.push_back(res.scores);
        res.residual = (res.scores.col(0).array() - 1.0).abs().maxCoeff();
        if (!(res.residual > opt.eps)) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opt.max_iter) break;
    }
    res.normalized = r;

    if (!res.converged && prev2.size() == res.scores.size()) {
        const double back2 = (res.scores - prev2).cwiseAbs().maxCoeff();
        const double back1 = (res.scores - prev1).cwiseAbs().maxCoeff();
        if (back2 <= opt.cycle_tol && back1 > opt.cycle_tol) {
            res.cycle_detected = true;
            res.cycle_period = 2;
            res.accumulation = {prev1, res.scores};
        }
    }
    return res;
}

ClosureStats closure_stats(const Matrix& c) {
    require_finite(c, "closure_stats");
    const Vector s = c.rowwise().sum();
    ClosureStats st;
    st.min = s.minCoeff();
    st.max = s.maxCoeff();
    st.mean = s.mean();
    if (s.size() < 2) {
        st.single_row = true;
        st.std = 0.0;
    } else {
        st.std = std::sqrt((s.array() - st.mean).square().sum() / static_cast<double>(s.size() - 1));
    }
    return st;
}

}  // namespace mcr
