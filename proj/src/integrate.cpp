#include "eoc/integrate.hpp"

#include <cmath>
#include <cstdio>

namespace eoc {

namespace {

bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

void guard_state(const ControlAffineSystem& sys, const Vec& x, int sample, double t) {
    if (!all_finite(x)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "integration blow-up: non-finite state at sample %d, t=%.6g",
                      sample, t);
        throw IntegrationError(buf, sample, t);
    }
    if (sys.state_ok && !sys.state_ok(x)) {
        char buf[192];
        std::snprintf(buf, sizeof(buf),
                      "integration aborted: state left the admissible domain (%s) at sample %d, t=%.6g",
                      sys.domain_note.c_str(), sample, t);
        throw IntegrationError(buf, sample, t);
    }
}

struct Rk4Stages {
    Vec X[4];
    Vec K[4];
};

// Replays the four stages of one RK4 step; shared by the forward pass, the
// adjoint and the gradient so stage values agree bitwise.
void rk4_stages(const ControlAffineSystem& sys, const Vec& xj, const Vec& u, const Vec& omega,
                double dt, Rk4Stages& st, int sample, double tj) {
    st.X[0] = xj;
    st.K[0] = dynamics_eval(sys, st.X[0], u, omega);

    st.X[1] = xj;
    axpy(0.5 * dt, st.K[0], st.X[1]);
    guard_state(sys, st.X[1], sample, tj);
    st.K[1] = dynamics_eval(sys, st.X[1], u, omega);

    st.X[2] = xj;
    axpy(0.5 * dt, st.K[1], st.X[2]);
    guard_state(sys, st.X[2], sample, tj);
    st.K[2] = dynamics_eval(sys, st.X[2], u, omega);

    st.X[3] = xj;
    axpy(dt, st.K[2], st.X[3]);
    guard_state(sys, st.X[3], sample, tj);
    st.K[3] = dynamics_eval(sys, st.X[3], u, omega);
}

Vec rk4_advance(const Vec& xj, const Rk4Stages& st, double dt) {
    Vec x = xj;
    axpy(dt / 6.0, st.K[0], x);
    axpy(dt / 3.0, st.K[1], x);
    axpy(dt / 3.0, st.K[2], x);
    axpy(dt / 6.0, st.K[3], x);
    return x;
}

// Stage adjoints of the transposed RK4 step, seeded with p(t_{j+1}).
struct AdjointStages {
    Vec kb[4];
    Mat A[4];
};

void adjoint_stages(const ControlAffineSystem& sys, const Rk4Stages& st, const Vec& u,
                    const Vec& omega, double dt, const Vec& p_next, AdjointStages& as) {
    for (int q = 0; q < 4; ++q) as.A[q] = dynamics_jacobian(sys, st.X[q], u, omega);

    as.kb[3] = scale(dt / 6.0, p_next);

    as.kb[2] = scale(dt / 3.0, p_next);
    axpy(dt, matTvec(as.A[3], as.kb[3]), as.kb[2]);

    as.kb[1] = scale(dt / 3.0, p_next);
    axpy(0.5 * dt, matTvec(as.A[2], as.kb[2]), as.kb[1]);

    as.kb[0] = scale(dt / 6.0, p_next);
    axpy(0.5 * dt, matTvec(as.A[1], as.kb[1]), as.kb[0]);
}

}  // namespace

TrajectoryBundle integrate_forward(const ControlAffineSystem& sys, const InitialConditionSpec& ic,
                                   const SampleSet& samples, const ControlGrid& control,
                                   const TimeGrid& grid) {
    if (!(control.grid == grid)) throw std::invalid_argument("integrate_forward: control grid mismatch");
    if (control.m != sys.m) throw std::invalid_argument("integrate_forward: control dimension mismatch");

    TrajectoryBundle traj(grid, samples.k, sys.n, samples);
    const double dt = grid.dt();
    Rk4Stages st;

    for (int s = 0; s < samples.k; ++s) {
        const Vec& omega = traj.omega(s);
        Vec x = initial_condition_map(ic, omega, sys.n);
        guard_state(sys, x, s, grid.t0);
        std::copy(x.begin(), x.end(), traj.state(0, s));
        for (int j = 0; j < grid.steps; ++j) {
            const Vec u = control.row(j);
            rk4_stages(sys, x, u, omega, dt, st, s, grid.node(j));
            x = rk4_advance(x, st, dt);
            guard_state(sys, x, s, grid.node(j + 1));
            std::copy(x.begin(), x.end(), traj.state(j + 1, s));
        }
    }
    return traj;
}

CostateBundle integrate_adjoint(const ControlAffineSystem& sys, const TrajectoryBundle& traj,
                                const ControlGrid& control) {
    if (!(control.grid == traj.grid)) throw std::invalid_argument("integrate_adjoint: grid mismatch");

    CostateBundle costate(traj.grid, traj.k, traj.n, traj.samples);
    const double dt = traj.grid.dt();
    const int N = traj.grid.steps;
    Rk4Stages st;
    AdjointStages as;

    for (int s = 0; s < traj.k; ++s) {
        const Vec& omega = traj.omega(s);
        // terminal condition -p(T,w) = grad g(x(T,w),w), imposed exactly
        Vec p = scale(-1.0, sys.terminal_cost_grad(traj.state_vec(N, s), omega));
        std::copy(p.begin(), p.end(), costate.state(N, s));
        for (int j = N - 1; j >= 0; --j) {
            const Vec u = control.row(j);
            const Vec xj = traj.state_vec(j, s);
            rk4_stages(sys, xj, u, omega, dt, st, s, traj.grid.node(j));
            adjoint_stages(sys, st, u, omega, dt, p, as);

            Vec p_prev = p;
            for (int q = 0; q < 4; ++q) axpy(1.0, matTvec(as.A[q], as.kb[q]), p_prev);

            p = std::move(p_prev);
            if (!all_finite(p))
                throw IntegrationError("adjoint blow-up: non-finite costate", s, traj.grid.node(j));
            std::copy(p.begin(), p.end(), costate.state(j, s));
        }
    }
    return costate;
}

double ensemble_cost(const ControlAffineSystem& sys, const TrajectoryBundle& traj) {
    const int N = traj.grid.steps;
    double sum = 0.0;
    for (int s = 0; s < traj.k; ++s) sum += sys.terminal_cost(traj.state_vec(N, s), traj.omega(s));
    const double cost = sum / traj.k;
    if (!std::isfinite(cost)) throw std::runtime_error("ensemble_cost: non-finite cost");
    return cost;
}

std::vector<double> cost_gradient(const ControlAffineSystem& sys, const TrajectoryBundle& traj,
                                  const CostateBundle& costate, const ControlGrid& control) {
    if (!(control.grid == traj.grid)) throw std::invalid_argument("cost_gradient: grid mismatch");
    if (costate.k != traj.k || costate.grid.nodes() != traj.grid.nodes())
        throw std::invalid_argument("cost_gradient: bundle mismatch");
    const int N = traj.grid.steps;
    const double dt = traj.grid.dt();
    std::vector<double> grad(static_cast<size_t>(N) * sys.m, 0.0);
    Rk4Stages st;
    AdjointStages as;

    // dJ/du[j][i] = -(1/k) sum_s sum_stages kb_stage . f_i(X_stage); the kb's
    // are rebuilt locally from p(t_{j+1}), identical to the adjoint sweep.
    for (int s = 0; s < traj.k; ++s) {
        const Vec& omega = traj.omega(s);
        for (int j = 0; j < N; ++j) {
            const Vec u = control.row(j);
            const Vec xj = traj.state_vec(j, s);
            rk4_stages(sys, xj, u, omega, dt, st, s, traj.grid.node(j));
            adjoint_stages(sys, st, u, omega, dt, costate.state_vec(j + 1, s), as);
            for (int i = 1; i <= sys.m; ++i) {
                double acc = 0.0;
                for (int q = 0; q < 4; ++q)
                    acc += dot(as.kb[q], sys.f[static_cast<size_t>(i)](st.X[q], omega));
                grad[static_cast<size_t>(j) * sys.m + (i - 1)] -= acc;
            }
        }
    }
    const double inv_k = 1.0 / traj.k;
    for (double& g : grad) g *= inv_k;
    return grad;
}

}  // namespace eoc
