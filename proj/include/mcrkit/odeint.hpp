#pragma once

#include "mcrkit/error.hpp"
#include "mcrkit/matcore.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcr {

enum class OdeMethod {
    RK45,  // Dormand-Prince 5(4)
    RK89,  // Dormand-Prince 8(5,3), DOP853
};

std::string to_string(OdeMethod m);
OdeMethod parse_ode_method(const std::string& name);

struct IntegratorConfig {
    OdeMethod method = OdeMethod::RK45;
    double abs_tol = 1e-6;
    double rel_tol = 1e-3;
    std::optional<double> max_step;
    std::optional<double> initial_step;
    long max_steps = 10'000'000;
    // Test mode: constant step, no error control.
    std::optional<double> fixed_step;
};

void validate(const IntegratorConfig& cfg);

struct OdeSolution {
    std::vector<double> times;
    Matrix states;  // grid points x state dim
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evaluations = 0;
};

// Raised when the step budget runs out; carries every grid point reached so far.
struct IntegrationError : NumericalError {
    IntegrationError(const std::string& msg, OdeSolution partial_)
        : NumericalError(msg), partial(std::move(partial_)) {}
    OdeSolution partial;
};

using Rhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

// Steps are clipped so that every output grid point is hit exactly.
OdeSolution integrate(const Rhs& rhs, const Vector& y0, const std::vector<double>& grid,
                      const IntegratorConfig& cfg);

int nominal_order(OdeMethod m);

}  // namespace mcr
