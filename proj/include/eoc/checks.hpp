#pragma once

// Invariant suite behind `eoc check`: Jacobians and cost gradients against
// finite differences, Lie-bracket identities, adjoint-gradient agreement,
// RK4 convergence order, and sampler diagnostics.

#include <string>
#include <vector>

#include "eoc/optimize.hpp"

namespace eoc {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runs every check whose name contains `filter` (all checks when empty).
std::vector<CheckResult> run_invariant_checks(const std::string& filter = "");

// Central finite differences of the discretized ensemble cost with respect to
// each control value; the oracle for the adjoint gradient.
std::vector<double> fd_cost_gradient(const ControlAffineSystem& sys, const InitialConditionSpec& ic,
                                     const SampleSet& samples, const ControlGrid& control,
                                     double h = 1e-5);

// Measured convergence order of the forward integrator on the logistic
// equation against its closed form, over a sequence of halved steps.
double rk4_measured_order(std::vector<double>* errors = nullptr);

}  // namespace eoc
