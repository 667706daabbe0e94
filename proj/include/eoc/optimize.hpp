#pragma once

// Projected gradient descent with Armijo backtracking over the box-constrained
// control grid, and the k-sweep convergence study.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eoc/integrate.hpp"
#include "eoc/problems.hpp"

namespace eoc {

struct SolveOptions {
    int max_iters = 2000;
    double armijo_c = 1e-4;          // sufficient-decrease constant, in (0,1)
    double backtrack_factor = 0.5;   // in (0,1)
    double initial_step = 1.0;
    double tol_pg = 1e-6;            // on ||u - Proj(u - grad)||_2 / sqrt(N m)
    int grid_steps = 200;            // N
    std::uint64_t seed = 42;
    bool nested_samples = true;      // sweep: prefix-nested Omega_k vs independent redraws
    bool snap_bounds = false;        // final pass: round controls within snap_tol onto bounds
    double snap_tol = 1e-3;

    void validate() const;
};

struct SolveDiagnostics {
    std::vector<double> cost_history;  // accepted iterates, including the start
    int forward_integrations = 0;
    std::string status;                // "converged", "max_iters", "line_search_failure"
};

struct SolveResult {
    ControlGrid control;
    double cost = 0.0;  // internal (minimized) ensemble cost of `trajectory`
    int iterations = 0;
    double projected_gradient_norm = 0.0;
    bool converged = false;
    TrajectoryBundle trajectory;
    CostateBundle costate;
    SampleSet samples;
    SolveDiagnostics diag;
};

SolveResult solve(const ControlAffineSystem& sys, const ParameterDistribution& dist,
                  const InitialConditionSpec& ic, int k, const SolveOptions& options,
                  const ControlGrid* warm_start = nullptr);

inline SolveResult solve(const ProblemSpec& p, int k, const SolveOptions& options,
                         const ControlGrid* warm_start = nullptr) {
    return solve(p.sys, p.dist, p.ic, k, options, warm_start);
}

struct SweepRecord {
    int k = 0;
    double cost = 0.0;                // internal sign
    double rel_cost = 0.0;            // |J^{k-1} - J^k| / |J^{k-1}|, defined from k >= 2
    std::vector<double> rel_control;  // per component: ||u_i^{k-1}-u_i^k|| / ||u_i^{k-1}||
    bool converged = false;
    ControlGrid control;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    bool completed = false;
    std::string error;          // message of the failure that aborted the sweep, if any
    SolveResult final_solve;    // solve of the largest completed k
};

// Solves (P_k) for k = 1..k_max, warm-starting each k from the previous
// solution. Nested mode reuses one seed (prefix property); independent mode
// redraws Omega_k with a per-k derived seed. A failure at some k aborts the
// sweep with earlier records preserved.
SweepResult sweep(const ControlAffineSystem& sys, const ParameterDistribution& dist,
                  const InitialConditionSpec& ic, int k_max, const SolveOptions& options);

inline SweepResult sweep(const ProblemSpec& p, int k_max, const SolveOptions& options) {
    return sweep(p.sys, p.dist, p.ic, k_max, options);
}

}  // namespace eoc
