#pragma once

#include "mcrkit/matcore.hpp"
#include "mcrkit/odeint.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mcr {

struct Reaction {
    std::vector<int> reactants;  // stoichiometric coefficient per species
    std::vector<int> products;
    double k = 0.0;              // 1/s or L/(mol s) depending on molecularity
};

struct ReactionSystem {
    std::vector<std::string> species;
    std::vector<Reaction> reactions;
    Vector y0;  // mol/L

    int index_of(const std::string& name) const;  // throws ModelError
    void add_reaction(const std::map<std::string, int>& reactants,
                      const std::map<std::string, int>& products, double k);
};

void validate(const ReactionSystem& sys);

// species x reactions, products minus reactants
Matrix stoichiometric_matrix(const ReactionSystem& sys);

Rhs mass_action_rhs(const ReactionSystem& sys);

enum class LawKind { Linear, Affine };

struct ConservationLaw {
    Vector weights;
    double constant = 0.0;  // mol/L
    LawKind kind = LawKind::Linear;
};

// Orthonormal basis of the left null space of the stoichiometric matrix;
// constants taken from y0.
std::vector<ConservationLaw> conservation_laws(const ReactionSystem& sys);
ConservationLaw make_law(const Vector& weights, const Vector& y0);

std::vector<double> conservation_residuals(const Matrix& c, const std::vector<ConservationLaw>& laws);

enum class DoseMode { Continuous, Discrete };

// Volume is 1 L, so an amount in mol is a concentration step in mol/L.
struct DoseSchedule {
    int target = 0;
    DoseMode mode = DoseMode::Discrete;
    double amount = 0.0;  // mol
    double rate = 0.0;    // mol/s, continuous only
    double start = 0.0;   // s, continuous only
    double time = 0.0;    // s, discrete only

    double window_end() const { return start + amount / rate; }
};

void validate(const DoseSchedule& d, const ReactionSystem& sys, double t0, double t1);

struct SimulationStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evaluations = 0;
    int segments = 0;
};

// Concentrations at the grid points. A grid point equal to a discrete dose
// time reports the state just after the jump.
Matrix simulate(const ReactionSystem& sys, const std::vector<double>& grid, const IntegratorConfig& cfg,
                const std::vector<DoseSchedule>& doses = {}, SimulationStats* stats = nullptr);

std::array<double, 3> bimolecular_closed_form(double k, double x0, double y0, double z0, double t);
inline constexpr double kEqualInitialsSwitch = 1e-8;

double lambert_w0(double x);
// W0(exp(u)) without forming exp(u).
double lambert_w0_exp(double u);

struct MmClosedFormParams {
    double k1 = 20.0, k1r = 0.1, k2 = 3.0;
    double S0 = 1.0, K0 = 0.1;

    double K_M() const { return (k1r + k2) / k1; }
    double vmax() const { return k2 * K0; }
};

void validate(const MmClosedFormParams& p);

// (S, K, SK, P) under the quasi-steady-state approximation.
std::array<double, 4> mm_qssa_closed_form(const MmClosedFormParams& p, double t);
Matrix mm_qssa_matrix(const MmClosedFormParams& p, const std::vector<double>& grid);

enum class MmReduction { SP, SK };

struct ReducedSystem {
    Rhs rhs;
    Vector y0;
    // maps a (points x 2) reduced trajectory to (points x 4) S, K, SK, P
    std::function<Matrix(const Matrix&)> reconstruct;
};

ReducedSystem mm_reduced_system(const MmClosedFormParams& p, MmReduction variant);

// Built-in systems.
ReactionSystem bimolecular_system(double k = 12.0, double x0 = 1.0, double y0 = 0.7, double z0 = 0.2);
ReactionSystem michaelis_menten_system(const MmClosedFormParams& p = {});

struct KineticsPreset {
    std::string name;
    std::string description;
    ReactionSystem system;
    std::vector<DoseSchedule> doses;
    std::string grid;  // grid spec, see parse_grid
};

std::vector<KineticsPreset> kinetics_presets();
KineticsPreset kinetics_preset(const std::string& name);

// "linspace:t0:t1:n", "power:t1:n:p" (t_i = t1 (i/(n-1))^p) or "list:a;b;c".
std::vector<double> parse_grid(const std::string& spec);

}  // namespace mcr
