#pragma once

// Ensemble forward integration (classical RK4, control held constant per
// interval), the exact discrete adjoint of that scheme, the averaged terminal
// cost, and its gradient with respect to the control grid.

#include <string>

#include "eoc/dynamics.hpp"
#include "eoc/grid.hpp"
#include "eoc/params.hpp"

namespace eoc {

// (N+1) x k x n node storage plus the sample set it was computed for.
struct TrajectoryBundle {
    TimeGrid grid;
    int k = 0;
    int n = 0;
    std::vector<double> data;
    SampleSet samples;

    TrajectoryBundle() = default;
    TrajectoryBundle(const TimeGrid& g, int k_, int n_, SampleSet s)
        : grid(g), k(k_), n(n_), data(static_cast<size_t>(g.nodes()) * k_ * n_, 0.0),
          samples(std::move(s)) {}

    size_t offset(int j, int s) const { return (static_cast<size_t>(j) * k + s) * n; }
    double* state(int j, int s) { return data.data() + offset(j, s); }
    const double* state(int j, int s) const { return data.data() + offset(j, s); }
    Vec state_vec(int j, int s) const {
        const double* p = state(j, s);
        return Vec(p, p + n);
    }
    const Vec& omega(int s) const { return samples.samples[static_cast<size_t>(s)]; }
};

using CostateBundle = TrajectoryBundle;  // same layout, values p(t_j, omega_s)

// Thrown when a state leaves the admissible domain or turns non-finite.
struct IntegrationError : std::runtime_error {
    int sample = -1;
    double time = 0.0;
    IntegrationError(const std::string& msg, int sample_, double time_)
        : std::runtime_error(msg), sample(sample_), time(time_) {}
};

TrajectoryBundle integrate_forward(const ControlAffineSystem& sys, const InitialConditionSpec& ic,
                                   const SampleSet& samples, const ControlGrid& control,
                                   const TimeGrid& grid);

// Backward sweep of the transposed RK4 step from p(T,w) = -grad_x g(x(T,w),w).
// The stage states are replayed bitwise from the stored nodes, so the costate
// is the exact discrete adjoint of integrate_forward.
CostateBundle integrate_adjoint(const ControlAffineSystem& sys, const TrajectoryBundle& traj,
                                const ControlGrid& control);

// (1/k) sum_s g(x(T,w_s),w_s), accumulated in fixed sample order.
double ensemble_cost(const ControlAffineSystem& sys, const TrajectoryBundle& traj);

// Gradient of the discretized ensemble cost with respect to every control
// interval value (steps x m, row-major); exact for the RK4 transcription.
std::vector<double> cost_gradient(const ControlAffineSystem& sys, const TrajectoryBundle& traj,
                                  const CostateBundle& costate, const ControlGrid& control);

}  // namespace eoc
