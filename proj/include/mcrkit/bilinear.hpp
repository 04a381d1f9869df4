#pragma once

#include "mcrkit/matcore.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mcr {

struct GaussianPeak {
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;  // denominator of the exponent
    double baseline = 0.0;
};

struct SpectrumSet {
    std::vector<std::string> names;
    Vector grid;  // channel positions
    std::vector<GaussianPeak> components;
};

void validate(const SpectrumSet& set);

// channels x components
Matrix gaussian_spectra(const SpectrumSet& set);

// "three-component" (X, Y, Z) and "four-component" (S, K, SK, P) on channels 1..100
SpectrumSet spectrum_preset(const std::string& name);
std::vector<std::string> spectrum_preset_names();

Matrix bilinear_data(const Matrix& c, const Matrix& a);

struct NoiseSpec {
    double sd = 0.0;
    std::uint64_t seed = 0;
};

// Column-major draw order, one normal per entry.
Matrix add_noise(const Matrix& d, const NoiseSpec& spec);

struct SpectraEstimate {
    Matrix a;  // channels x components
    int rank = 0;
    bool rank_deficient = false;
};

SpectraEstimate estimate_spectra(const Matrix& d, const Matrix& c);

struct KnownSpectraEstimate {
    std::vector<int> unknown;
    Matrix a_unknown;  // channels x |unknown|
    int rank = 0;
    bool rank_deficient = false;
    double residual_fro = 0.0;  // ||D - C A_full^T||_F
};

KnownSpectraEstimate estimate_with_known(const Matrix& d, const Matrix& c, const std::vector<int>& known,
                                         const Matrix& a_known);

struct AugmentedEstimate {
    Matrix a;
    RankReport stacked_rank;
    bool rank_deficient = false;
};

AugmentedEstimate augmented_estimate(const std::vector<std::pair<Matrix, Matrix>>& pairs);

// Channelwise solution of [a_Sm, d0] = [a_S, a_K] [[S0, S0], [0, K0]].
std::pair<Vector, Vector> premix_recovery(const Vector& a_substrate_measured, const Vector& d_initial_row,
                                          double s0, double k0);

double cosine_similarity(const Vector& a, const Vector& b);

// RMS over all channels and components of (a_est - a), divided by max |a|.
double peak_relative_rms_error(const Matrix& a_est, const Matrix& a);

}  // namespace mcr
