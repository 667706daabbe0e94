#include "eoc/optimize.hpp"

#include "eoc/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eoc {

namespace {

constexpr double kStepUnderflow = 1e-14;
constexpr double kBbStepMin = 1e-12;
constexpr double kBbStepMax = 1e8;

std::vector<double> project(const std::vector<double>& v, int steps, int m, const Vec& lo, const Vec& hi) {
    std::vector<double> r = v;
    for (int j = 0; j < steps; ++j)
        for (int i = 0; i < m; ++i) {
            double& u = r[static_cast<size_t>(j) * m + i];
            u = std::min(std::max(u, lo[static_cast<size_t>(i)]), hi[static_cast<size_t>(i)]);
        }
    return r;
}

}  // namespace

void SolveOptions::validate() const {
    if (max_iters < 1) throw std::invalid_argument("options: max_iters must be >= 1");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw std::invalid_argument("options: armijo_c must lie in (0,1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
        throw std::invalid_argument("options: backtrack_factor must lie in (0,1)");
    if (!(initial_step > 0.0)) throw std::invalid_argument("options: initial_step must be positive");
    if (!(tol_pg > 0.0)) throw std::invalid_argument("options: tol_pg must be positive");
    if (grid_steps < 1) throw std::invalid_argument("options: grid steps must be >= 1");
    if (!(snap_tol > 0.0)) throw std::invalid_argument("options: snap_tol must be positive");
}

SolveResult solve(const ControlAffineSystem& sys, const ParameterDistribution& dist,
                  const InitialConditionSpec& ic, int k, const SolveOptions& options,
                  const ControlGrid* warm_start) {
    options.validate();
    if (k < 1) throw std::invalid_argument("solve: k must be >= 1");

    const TimeGrid grid(sys.t0, sys.tf, options.grid_steps);
    const int N = grid.steps;
    const int m = sys.m;
    const double scale = std::sqrt(static_cast<double>(N) * m);

    SolveResult res;
    res.samples = sample_parameters(dist, k, options.seed);

    ControlGrid u(grid, m);
    if (warm_start) {
        if (!(warm_start->grid == grid) || warm_start->m != m)
            throw std::invalid_argument("solve: warm-start control grid mismatch");
        u = *warm_start;
    } else {
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < m; ++i)
                u.at(j, i) = 0.5 * (sys.u_min[static_cast<size_t>(i)] + sys.u_max[static_cast<size_t>(i)]);
    }
    u.clamp(sys.u_min, sys.u_max);

    TrajectoryBundle traj = integrate_forward(sys, ic, res.samples, u, grid);
    double J = ensemble_cost(sys, traj);
    res.diag.forward_integrations = 1;
    res.diag.cost_history.push_back(J);

    std::vector<double> grad_prev, u_prev;
    double last_step = options.initial_step;
    int iter = 0;
    res.diag.status = "max_iters";

    for (iter = 0; iter < options.max_iters; ++iter) {
        CostateBundle costate = integrate_adjoint(sys, traj, u);
        std::vector<double> grad = cost_gradient(sys, traj, costate, u);

        // stationarity residual: ||u - Proj(u - grad)|| / sqrt(N m)
        std::vector<double> shifted(u.v.size());
        for (size_t q = 0; q < u.v.size(); ++q) shifted[q] = u.v[q] - grad[q];
        std::vector<double> proj = project(shifted, N, m, sys.u_min, sys.u_max);
        double pg2 = 0.0;
        for (size_t q = 0; q < u.v.size(); ++q) {
            const double d = u.v[q] - proj[q];
            pg2 += d * d;
        }
        res.projected_gradient_norm = std::sqrt(pg2) / scale;
        if (res.projected_gradient_norm <= options.tol_pg) {
            res.converged = true;
            res.diag.status = "converged";
            res.costate = std::move(costate);
            break;
        }

        // Trial step: Barzilai-Borwein estimate from the last accepted pair,
        // safeguarded, falling back to growth of the last accepted step.
        double alpha = 2.0 * last_step;
        if (!grad_prev.empty()) {
            double sty = 0.0, sts = 0.0;
            for (size_t q = 0; q < u.v.size(); ++q) {
                const double sq = u.v[q] - u_prev[q];
                sts += sq * sq;
                sty += sq * (grad[q] - grad_prev[q]);
            }
            if (sty > 0.0 && sts > 0.0) alpha = std::min(std::max(sts / sty, kBbStepMin), kBbStepMax);
        }

        // Armijo backtracking along the projection arc.
        bool accepted = false;
        ControlGrid u_trial = u;
        TrajectoryBundle traj_trial;
        double J_trial = 0.0;
        while (alpha >= kStepUnderflow) {
            for (size_t q = 0; q < u.v.size(); ++q) shifted[q] = u.v[q] - alpha * grad[q];
            u_trial.v = project(shifted, N, m, sys.u_min, sys.u_max);

            double dirder = 0.0;  // <grad, u_trial - u>  (<= 0 on the arc)
            for (size_t q = 0; q < u.v.size(); ++q) dirder += grad[q] * (u_trial.v[q] - u.v[q]);

            bool ok = true;
            try {
                traj_trial = integrate_forward(sys, ic, res.samples, u_trial, grid);
                J_trial = ensemble_cost(sys, traj_trial);
            } catch (const IntegrationError&) {
                ok = false;  // blow-up: reject the trial and shorten the step
            }
            ++res.diag.forward_integrations;

            if (ok && J_trial <= J + options.armijo_c * dirder) {
                accepted = true;
                break;
            }
            alpha *= options.backtrack_factor;
        }
        if (!accepted) {
            res.diag.status = "line_search_failure";
            res.costate = std::move(costate);
            break;
        }

        grad_prev = std::move(grad);
        u_prev = u.v;
        u = std::move(u_trial);
        traj = std::move(traj_trial);
        J = J_trial;
        last_step = alpha;
        res.diag.cost_history.push_back(J);
    }
    res.iterations = iter;

    if (options.snap_bounds) {
        bool changed = false;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < m; ++i) {
                double& uv = u.at(j, i);
                const double lo = sys.u_min[static_cast<size_t>(i)], hi = sys.u_max[static_cast<size_t>(i)];
                if (uv - lo <= options.snap_tol && uv != lo) { uv = lo; changed = true; }
                else if (hi - uv <= options.snap_tol && uv != hi) { uv = hi; changed = true; }
            }
        if (changed) {
            traj = integrate_forward(sys, ic, res.samples, u, grid);
            J = ensemble_cost(sys, traj);
            ++res.diag.forward_integrations;
        }
    }

    // Costate consistent with the final control (converged loop leaves it set;
    // recompute after max_iters/snap so the stored bundles always match).
    if (res.costate.data.empty() || options.snap_bounds)
        res.costate = integrate_adjoint(sys, traj, u);

    res.control = std::move(u);
    res.trajectory = std::move(traj);
    res.cost = J;

    if (res.diag.status == "line_search_failure")
        throw std::runtime_error("solve: line search step underflow below 1e-14 after " +
                                 std::to_string(res.iterations) + " iterations (projected gradient " +
                                 std::to_string(res.projected_gradient_norm) + ")");
    return res;
}

SweepResult sweep(const ControlAffineSystem& sys, const ParameterDistribution& dist,
                  const InitialConditionSpec& ic, int k_max, const SolveOptions& options) {
    if (k_max < 2) throw std::invalid_argument("sweep: k_max must be >= 2");

    SweepResult out;
    const ControlGrid* warm = nullptr;
    ControlGrid prev_control;
    double prev_cost = 0.0;

    for (int k = 1; k <= k_max; ++k) {
        SolveOptions opt_k = options;
        if (!options.nested_samples) opt_k.seed = derive_seed(options.seed, static_cast<std::uint64_t>(k));
        SolveResult r;
        try {
            r = solve(sys, dist, ic, k, opt_k, warm);
        } catch (const std::exception& e) {
            out.error = "k=" + std::to_string(k) + ": " + e.what();
            return out;
        }

        SweepRecord rec;
        rec.k = k;
        rec.cost = r.cost;
        rec.converged = r.converged;
        rec.control = r.control;
        if (k >= 2) {
            const double den = std::abs(prev_cost);
            const double num = std::abs(prev_cost - r.cost);
            rec.rel_cost = den > 0.0 ? num / den : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            rec.rel_control.resize(static_cast<size_t>(sys.m));
            for (int i = 0; i < sys.m; ++i) {
                double dn = 0.0, nn = 0.0;
                for (int j = 0; j < r.control.grid.steps; ++j) {
                    const double d = prev_control.at(j, i) - r.control.at(j, i);
                    nn += d * d;
                    dn += prev_control.at(j, i) * prev_control.at(j, i);
                }
                rec.rel_control[static_cast<size_t>(i)] =
                    dn > 0.0 ? std::sqrt(nn / dn) : (nn > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            }
        }
        prev_cost = r.cost;
        prev_control = r.control;
        warm = &prev_control;
        out.records.push_back(std::move(rec));
        if (k == k_max) out.final_solve = std::move(r);
    }
    out.completed = true;
    return out;
}

}  // namespace eoc
