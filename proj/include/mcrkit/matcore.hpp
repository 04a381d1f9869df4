#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mcr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Throws InputError naming `what` if m is empty or holds NaN/Inf.
void require_finite(const Matrix& m, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

struct SvdResult {
    Matrix u;   // m x k
    Vector s;   // k, non-increasing
    Matrix vt;  // k x n
    int k = 0;

    Matrix v() const { return vt.transpose(); }
    Matrix reconstruct() const;
};

// Thin SVD, optionally truncated to k triplets. The largest-magnitude entry
// of every left singular vector is made positive (first index wins ties).
SvdResult svd(const Matrix& m, std::optional<int> k = std::nullopt);

inline double machine_rel_tolerance(Eigen::Index rows, Eigen::Index cols) {
    return static_cast<double>(std::max(rows, cols)) * 2.2e-16;
}

double holder_norm(const Vector& v, double p);

struct RankReport {
    std::vector<double> singular_values;
    int elbow_index = 0;  // count of values above the largest log10 gap
    int estimated_rank = 0;
    double condition_number = kInf;
    double rel_tolerance = 0.0;
};

inline constexpr double kElbowFloor = 1e-300;

RankReport estimate_rank(const Vector& s, double rel_tolerance);
// SVD of m followed by estimate_rank; default tolerance from the matrix shape.
RankReport rank_report(const Matrix& m, std::optional<double> rel_tolerance = std::nullopt);

struct LstsqResult {
    Matrix x;
    int rank = 0;
    bool rank_deficient = false;
};

// Minimum-norm solution of min ||a x - b||_F through the truncated pseudo-inverse.
LstsqResult least_squares(const Matrix& a, const Matrix& b,
                          std::optional<double> rel_tolerance = std::nullopt);

struct SignFlipResult {
    Matrix scores;
    Matrix loadings;
    Matrix signs;  // 2 x F: row 0 scores mode, row 1 loadings mode
    Matrix s_values;  // 2 x F signed squared projection sums before flipping
};

// Two-way sign correction of a bilinear model (Bro, Acar, Kolda 2008).
SignFlipResult sign_flip(const Matrix& scores, const Matrix& loadings, const Matrix& data);

}  // namespace mcr
