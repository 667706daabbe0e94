#pragma once

// Post-solve extremal analysis: switching functions, bang/singular
// classification, singular-arc value synthesis from nested Lie brackets, and
// a maximum-principle consistency certificate.

#include <cstdint>
#include <string>
#include <vector>

#include "eoc/integrate.hpp"

namespace eoc {

struct SwitchingData {
    TimeGrid grid;
    int m = 0;
    std::vector<double> psi;  // (N+1) x m, Psi_i(t_j) = (1/k) sum_w p.f_i
    double tol_psi = 0.02;    // classification threshold, relative to max_j |Psi_i|

    double at(int j, int i) const { return psi[static_cast<size_t>(j) * m + i]; }
    double& at(int j, int i) { return psi[static_cast<size_t>(j) * m + i]; }
};

SwitchingData switching_function(const TrajectoryBundle& traj, const CostateBundle& costate,
                                 const ControlAffineSystem& sys, double tol_psi = 0.02);

enum class NodeClass : std::uint8_t { BangMin, BangMax, Singular, Switch };
const char* node_class_name(NodeClass c);

struct ArcInterval {
    int first = 0, last = 0;            // node range, inclusive
    std::vector<int> singular;          // S (1-based component indices)
    std::vector<int> bang_min;          // B_min
    std::vector<int> bang_max;          // B_max
};

struct ArcReport {
    TimeGrid grid;
    int m = 0;
    double tol_psi = 0.02;
    int min_arc_nodes = 3;
    std::vector<NodeClass> cls;             // (N+1) x m
    std::vector<ArcInterval> intervals;     // maximal runs of constant (S, B_min, B_max)

    NodeClass at(int j, int i) const { return cls[static_cast<size_t>(j) * m + i]; }
};

// Per-node classification: component i is singular at t_j when
// |Psi_i(t_j)| <= tol_psi * max_j |Psi_i|, bang by sign otherwise. Contiguous
// singular runs shorter than min_arc_nodes are retagged "switch" (an isolated
// zero crossing, not an arc). In the node partition {S, B_min, B_max},
// switch-tagged nodes count as bang on the side given by the sign of Psi.
ArcReport classify_arcs(const SwitchingData& sw, const ControlGrid& control, int min_arc_nodes = 3);

// --- node-level bracket machinery (also used directly by identity tests) ---

// (1/k) sum_s  p_s . [f_a,[f_0,f_b]](x_s, w_s)
double ensemble_bracket_pairing(const ControlAffineSystem& sys, int a, int b,
                                const std::vector<Vec>& xs, const std::vector<Vec>& ps,
                                const std::vector<Vec>& omegas);

// Scalar singular value  u = -<p,[f0,[f0,f1]]> / <p,[f1,[f0,f1]]>  from node
// data; throws when the denominator is degenerate.
double scalar_singular_value(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                             const std::vector<Vec>& ps, const std::vector<Vec>& omegas);

struct VectorSingularValue {
    std::vector<double> values;        // one per S component; NaN when indeterminate
    std::vector<bool> indeterminate;   // vacuous rows (coefficients below noise scale)
    double cond = 0.0;                 // 1-norm condition estimate of the solved system
};

// Solves W_S u_S = -b_S at one node, with b_i = W_0i + sum_{Bmin} W_ij u_min_j
// + sum_{Bmax} W_ij u_max_j. Rows whose coefficients all fall below 1e-6 of
// their triangle-inequality scale are reported indeterminate and removed;
// remaining coupling to removed columns must vanish. Condition > 1e12 throws.
VectorSingularValue vector_singular_value(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                                          const std::vector<Vec>& ps, const std::vector<Vec>& omegas,
                                          const std::vector<int>& S, const std::vector<int>& bang_min,
                                          const std::vector<int>& bang_max);

// --- interval-level operations ---

// m = 1 only; per-node values over the interval.
std::vector<double> singular_control_scalar(const TrajectoryBundle& traj, const CostateBundle& costate,
                                            const ControlAffineSystem& sys, const ArcInterval& interval);

struct SingularSynthesis {
    ArcInterval interval;
    std::vector<std::vector<double>> values;  // node -> one value per S component (NaN = indeterminate)
    std::vector<double> cond;                 // node -> condition estimate (vector case)
    double commutativity_residual = 0.0;      // max ||[f_i,f_j]|| over interval nodes/samples
    std::string note;                         // set when synthesis degenerated
};

// Vector case; verifies [f_i,f_j] = 0 numerically on the interval's
// trajectory points before solving (tolerance comm_tol on the max norm).
SingularSynthesis singular_control_vector(const TrajectoryBundle& traj, const CostateBundle& costate,
                                          const ControlAffineSystem& sys, const ArcInterval& interval,
                                          const ArcReport& report, double comm_tol = 1e-8);

// Driver for all singular intervals of a report; degeneracies become NaN
// values with a note instead of aborting the run.
std::vector<SingularSynthesis> synthesize_singular_controls(const TrajectoryBundle& traj,
                                                            const CostateBundle& costate,
                                                            const ControlAffineSystem& sys,
                                                            const ArcReport& report);

struct CertificateReport {
    double hamiltonian_gap_max = 0.0;
    double hamiltonian_gap_mean = 0.0;
    double gap_scale = 0.0;  // max_i (max_j |Psi_i| * (u_max_i - u_min_i))
    double adjoint_residual_max = 0.0;
    double adjoint_residual_mean = 0.0;
    double terminal_residual_max = 0.0;
    double bang_mismatch_fraction = 0.0;
    int bang_nodes_checked = 0;
    int singular_nodes = 0;
};

// Hamiltonian gap (closed-form box maximum via the sign of Psi), first-order
// adjoint residual statistics, exact terminal-condition residual, and the
// fraction of non-singular nodes whose control contradicts its bang side.
CertificateReport pmp_certificate(const TrajectoryBundle& traj, const CostateBundle& costate,
                                  const ControlGrid& control, const ControlAffineSystem& sys,
                                  double tol_psi = 0.02, int min_arc_nodes = 3);

}  // namespace eoc
