#pragma once

#include "mcrkit/matcore.hpp"

#include <string>
#include <vector>

namespace mcr {

struct EquilibriumModel {
    Matrix model;     // components x species, integer exponents
    Vector log_beta;  // log10 cumulative formation constants per species
    std::vector<std::string> component_names;
    std::vector<std::string> species_names;

    Eigen::Index ncomp() const { return model.rows(); }
    Eigen::Index nspec() const { return model.cols(); }
};

void validate(const EquilibriumModel& m);

// beta_s * prod_j c_j^Model(j, s)
Vector species_concentrations(const EquilibriumModel& m, const Vector& c_free);
// J[j, k] = sum_s Model(j, s) Model(k, s) c_spec(s)
Matrix speciation_jacobian(const EquilibriumModel& m, const Vector& c_spec);

struct SpeciationResult {
    Vector c_spec;
    int iterations = 0;  // Newton updates applied
    bool converged = false;
    double mass_balance_residual = 0.0;
};

inline constexpr int kSpeciationMaxIter = 100;
inline constexpr double kSpeciationTol = 1e-15;
inline constexpr double kZeroTotal = 1e-15;

SpeciationResult newton_raphson_speciation(const EquilibriumModel& m, const Vector& c_tot, const Vector& guess);

Vector dilution_totals(double v0, const Vector& c0, double v_added, const Vector& c_added);

struct TitrationSegment {
    int first = 0;  // inclusive, 0-based
    int last = 0;   // inclusive
    Vector c_added;
};

struct TitrationProtocol {
    double v0 = 0.0;
    Vector c0;
    Vector v_added;
    std::vector<TitrationSegment> segments;
};

void validate(const TitrationProtocol& p, Eigen::Index ncomp);

struct TitrationResult {
    Matrix c;      // points x species
    Matrix c_tot;  // points x components
    std::vector<int> iterations;
    std::vector<bool> converged;
    std::vector<int> nonconverged;
    double max_residual = 0.0;
    bool all_converged() const { return nonconverged.empty(); }
};

// Guess for the first point is c0; each later point starts from the previous
// solution unless warm_start is false.
TitrationResult titrate(const EquilibriumModel& m, const TitrationProtocol& p, bool warm_start = true);

// Three monoprotic dyes P-, M, B2- acidified with HCl and titrated with NaOH.
EquilibriumModel dye_model();

enum class DyeComposition {
    AsExecuted,  // per-segment dye additions as the titration program executes them
    AsWritten,   // P in 17-30, M in 31-38, all three in 39-60
};

TitrationProtocol dye_protocol(double indicators_in_titrant, DyeComposition comp = DyeComposition::AsExecuted);

// Columns of the dye species (P-, M, B2-, HP, HM+, HB-) in dye_model().
inline const std::vector<int> kDyeSpeciesColumns = {0, 1, 2, 4, 5, 6};

}  // namespace mcr
