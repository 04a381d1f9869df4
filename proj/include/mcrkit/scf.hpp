#pragma once

#include "mcrkit/matcore.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcr {

double scf_value(const Vector& c, const Vector& s, double d_fro2);

struct NormIdentity {
    double image_norm2 = 0.0;  // ||U y||^2
    double coord_norm2 = 0.0;  // ||y||^2
    double basis_deviation = 0.0;  // max |U^T U - I|
};

inline constexpr double kOrthonormalTol = 1e-12;

// Throws InputError carrying the deviation when U is not orthonormal.
NormIdentity norm_identity_check(const Matrix& u, const Vector& y);

struct AbstractSpace {
    Matrix u;       // m x 2
    Matrix v;       // n x 2
    Vector sigma;   // 2
    Matrix scores;  // U Sigma
    double d_fro2 = 0.0;
};

struct TwoComponentRegion {
    double alpha_min = 0, alpha_max = 0;
    double beta_min = 0, beta_max = 0;
    bool empty = false;
    // spectrum-side limits come from these channels, profile-side from these rows
    int alpha_channel = -1, beta_channel = -1;
    int alpha_row = -1, beta_row = -1;
    AbstractSpace space;
};

// Interval ends crossing by less than this (relative) are merged into a point.
inline constexpr double kRegionSnapTol = 1e-12;

// Rows of T = [[1, alpha], [1, beta]] with C = X T^-1 and S = V T^T
// both nonnegative exactly on [alpha_min, alpha_max] x [beta_min, beta_max].
TwoComponentRegion feasible_region_2comp(const Matrix& d, std::optional<double> rank_tol = std::nullopt);

// Factors (C, S) induced by (alpha, beta); throws DomainError when alpha == beta.
std::pair<Matrix, Matrix> two_component_factors(const AbstractSpace& sp, double alpha, double beta);
// Abstract coordinate t of a spectrum s, i.e. s is proportional to v1 + t v2.
double spectrum_coordinate(const AbstractSpace& sp, const Vector& s);

struct ScfGrid {
    Vector alphas, betas;
    Matrix values;  // alphas x betas, NaN where T is singular
    std::vector<std::pair<int, int>> skipped;
    std::pair<int, int> argmax{0, 0}, argmin{0, 0};
    double max = 0, min = 0;
    bool extrema_on_boundary = false;
};

inline constexpr int kDefaultScfGrid = 201;

ScfGrid scf_boundary_study(const Matrix& d, const TwoComponentRegion& region, int grid_n = kDefaultScfGrid);

bool on_boundary_ring(std::pair<int, int> cell, int grid_n);

// Noiseless two-component data sets D = C S^T for the boundary study.
struct TwoComponentPreset {
    std::string name;
    std::string description;
    Vector times;
    Vector channels;
    Matrix c;  // times x 2
    Matrix s;  // channels x 2
    Matrix d() const { return c * s.transpose(); }
};

std::vector<TwoComponentPreset> two_component_presets();
TwoComponentPreset two_component_preset(const std::string& name);

}  // namespace mcr
