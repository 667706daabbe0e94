#include "eoc/checks.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "eoc/analysis.hpp"
#include "eoc/rng.hpp"

namespace eoc {

std::vector<double> fd_cost_gradient(const ControlAffineSystem& sys, const InitialConditionSpec& ic,
                                     const SampleSet& samples, const ControlGrid& control, double h) {
    std::vector<double> g(control.v.size(), 0.0);
    ControlGrid pert = control;
    for (size_t q = 0; q < control.v.size(); ++q) {
        pert.v[q] = control.v[q] + h;
        const double jp = ensemble_cost(sys, integrate_forward(sys, ic, samples, pert, control.grid));
        pert.v[q] = control.v[q] - h;
        const double jm = ensemble_cost(sys, integrate_forward(sys, ic, samples, pert, control.grid));
        pert.v[q] = control.v[q];
        g[q] = (jp - jm) / (2.0 * h);
    }
    return g;
}

double rk4_measured_order(std::vector<double>* errors_out) {
    // logistic xdot = r x (1 - x/K), closed form K x0 e^{rt} / (K + x0(e^{rt}-1))
    const double r = 0.71, K = 80.5, x0 = 70.0, T = 1.0;
    ControlAffineSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.t0 = 0.0;
    sys.tf = T;
    sys.u_min = {-1.0};
    sys.u_max = {1.0};
    sys.f = {[r, K](const Vec& x, const Vec&) -> Vec { return {r * x[0] * (1.0 - x[0] / K)}; },
             [](const Vec&, const Vec&) -> Vec { return {0.0}; }};
    sys.jac = {[r, K](const Vec& x, const Vec&) -> Mat {
                   Mat J(1, 1);
                   J(0, 0) = r * (1.0 - 2.0 * x[0] / K);
                   return J;
               },
               [](const Vec&, const Vec&) -> Mat { return Mat(1, 1); }};
    sys.hess = {FieldHess{}, FieldHess{}};
    sys.terminal_cost = [](const Vec& x, const Vec&) { return x[0]; };
    sys.terminal_cost_grad = [](const Vec&, const Vec&) -> Vec { return {1.0}; };

    const auto dist = ParameterDistribution::finite_set({{0.0}}, {1.0});
    const SampleSet samples = sample_parameters(dist, 1, 0);
    const InitialConditionSpec ic = InitialConditionSpec::constant({x0});
    const double exact = K * x0 * std::exp(r * T) / (K + x0 * (std::exp(r * T) - 1.0));

    std::vector<double> errors;
    for (int N : {25, 50, 100, 200}) {
        const TimeGrid grid(0.0, T, N);
        const ControlGrid u(grid, 1, 0.0);
        const TrajectoryBundle traj = integrate_forward(sys, ic, samples, u, grid);
        errors.push_back(std::abs(traj.state_vec(N, 0)[0] - exact));
    }
    if (errors_out) *errors_out = errors;

    // least-squares slope of log2(error) against log2(N)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(errors.size());
    for (int i = 0; i < n; ++i) {
        const double lx = std::log2(25.0 * (1 << i));
        const double ly = std::log2(errors[static_cast<size_t>(i)]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

using CheckFn = std::function<CheckResult()>;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// Deterministic test points inside a box, plus distribution draws for omega.
std::vector<Vec> box_points(const Vec& lo, const Vec& hi, int count, std::uint64_t seed) {
    std::vector<Vec> pts;
    for (int i = 0; i < count; ++i) {
        Vec x(lo.size());
        for (size_t d = 0; d < lo.size(); ++d)
            x[d] = lo[d] + counter_u01(seed, static_cast<std::uint64_t>(i), d) * (hi[d] - lo[d]);
        pts.push_back(std::move(x));
    }
    return pts;
}

struct ProblemPoints {
    std::vector<Vec> xs;
    std::vector<Vec> omegas;
};

ProblemPoints points_for(const ProblemSpec& spec, int count, std::uint64_t seed) {
    ProblemPoints p;
    Vec lo, hi;
    if (spec.name == "fishing") {
        lo = {5.0, -40.0};
        hi = {120.0, 40.0};
    } else {
        lo = Vec(static_cast<size_t>(spec.sys.n), -2.0);
        hi = Vec(static_cast<size_t>(spec.sys.n), 2.0);
    }
    p.xs = box_points(lo, hi, count, seed);
    p.omegas = sample_parameters(spec.dist, count, seed ^ 0x5bd1e995u).samples;
    return p;
}

CheckResult check_jacobians(const ProblemSpec& spec) {
    const ProblemPoints pts = points_for(spec, 20, 11);
    const JacobianCheck jc = validate_jacobians(spec.sys, pts.xs, pts.omegas, 1e-5);
    return {"jacobians:" + spec.name, jc.pass,
            jc.pass ? "max rel err " + fmt(jc.worst_rel_err)
                    : "field f" + std::to_string(jc.worst_field) + " rel err " + fmt(jc.worst_rel_err) +
                          " exceeds 1e-5"};
}

CheckResult check_cost_gradient(const ProblemSpec& spec) {
    const ProblemPoints pts = points_for(spec, 20, 12);
    const JacobianCheck jc = validate_cost_gradient(spec.sys, pts.xs, pts.omegas, 1e-5);
    return {"gradients:" + spec.name, jc.pass, "max rel err " + fmt(jc.worst_rel_err)};
}

CheckResult check_growth(const ProblemSpec& spec) {
    // |f_i(x,w)| <= c_i (1+|x|) on a box enclosing the reachable set; the
    // frozen ceilings are generous versions of the analytic suprema there.
    const ProblemPoints pts = points_for(spec, 200, 13);
    Vec ceiling = spec.name == "fishing" ? Vec{2.0, 70.0} : Vec{3.0, 1.0, 1.0};
    double worst = 0.0;
    int worst_field = -1;
    for (int i = 0; i <= spec.sys.m; ++i) {
        for (size_t q = 0; q < pts.xs.size(); ++q) {
            const double ratio = norm_inf(spec.sys.f[static_cast<size_t>(i)](pts.xs[q], pts.omegas[q])) /
                                 (1.0 + norm2(pts.xs[q]));
            const double margin = ratio / ceiling[static_cast<size_t>(i)];
            if (margin > worst) {
                worst = margin;
                worst_field = i;
            }
        }
    }
    const bool pass = worst <= 1.0;
    return {"growth:" + spec.name, pass,
            "max |f_" + std::to_string(worst_field) + "|/(c_i(1+|x|)) = " + fmt(worst)};
}

CheckResult check_bracket_identities() {
    bool pass = true;
    std::string detail = "antisymmetry/bilinearity/[f,f]=0 at 100 points";
    for (const std::string& name : problem_names()) {
        const ProblemSpec spec = make_problem(name);
        const ProblemPoints pts = points_for(spec, 100, 17);
        for (size_t q = 0; q < pts.xs.size() && pass; ++q) {
            const Vec& x = pts.xs[q];
            const Vec& w = pts.omegas[q];
            for (int a = 0; a <= spec.sys.m && pass; ++a)
                for (int b = 0; b <= spec.sys.m && pass; ++b) {
                    const Vec ab = lie_bracket(spec.sys, a, b, x, w);
                    const Vec ba = lie_bracket(spec.sys, b, a, x, w);
                    for (size_t d = 0; d < ab.size(); ++d)
                        if (ab[d] != -ba[d]) { pass = false; detail = "antisymmetry failed on " + name; }
                    if (a == b)
                        for (double v : ab)
                            if (v != 0.0) { pass = false; detail = "[f,f] != 0 on " + name; }
                }
            // bilinearity in the first slot: [2 f_0 + 3 f_1, f_1]
            const auto& sys = spec.sys;
            Field comb = [&sys](const Vec& xx, const Vec& ww) {
                Vec r = scale(2.0, sys.f[0](xx, ww));
                axpy(3.0, sys.f[1](xx, ww), r);
                return r;
            };
            FieldJac comb_jac = [&sys](const Vec& xx, const Vec& ww) {
                Mat J = sys.jac[0](xx, ww);
                const Mat J1 = sys.jac[1](xx, ww);
                for (size_t d = 0; d < J.a.size(); ++d) J.a[d] = 2.0 * J.a[d] + 3.0 * J1.a[d];
                return J;
            };
            const Vec lhs = lie_bracket(comb, comb_jac, sys.f[1], sys.jac[1], x, w);
            Vec rhs = scale(2.0, lie_bracket(spec.sys, 0, 1, x, w));
            axpy(3.0, lie_bracket(spec.sys, 1, 1, x, w), rhs);
            double err = 0.0, mag = 0.0;
            for (size_t d = 0; d < lhs.size(); ++d) {
                err = std::max(err, std::abs(lhs[d] - rhs[d]));
                mag = std::max(mag, std::abs(rhs[d]));
            }
            if (err > 1e-12 * std::max(1.0, mag)) {
                pass = false;
                detail = "bilinearity failed on " + name + " (err " + fmt(err) + ")";
            }
        }
    }
    return {"brackets:identities", pass, detail};
}

CheckResult check_commuting_fields() {
    const ProblemSpec spec = bryson_ho_problem();
    const ProblemPoints pts = points_for(spec, 100, 19);
    double worst = 0.0;
    for (size_t q = 0; q < pts.xs.size(); ++q) {
        worst = std::max(worst, norm_inf(lie_bracket(spec.sys, 1, 2, pts.xs[q], pts.omegas[q])));
        worst = std::max(worst, norm_inf(nested_bracket(spec.sys, 2, 1, pts.xs[q], pts.omegas[q])));
        worst = std::max(worst, norm_inf(nested_bracket(spec.sys, 1, 2, pts.xs[q], pts.omegas[q])));
    }
    return {"brackets:commuting", worst == 0.0,
            "max ||[f1,f2]||, ||[f2,[f0,f1]]||, ||[f1,[f0,f2]]|| = " + fmt(worst)};
}

CheckResult check_nested_fd() {
    double worst = 0.0;
    for (const std::string& name : problem_names()) {
        ProblemSpec spec = make_problem(name);
        const ProblemPoints pts = points_for(spec, 25, 23);
        ControlAffineSystem no_hess = spec.sys;
        for (auto& h : no_hess.hess) h = FieldHess{};
        for (size_t q = 0; q < pts.xs.size(); ++q)
            for (int i = 0; i <= spec.sys.m; ++i)
                for (int j = 0; j <= spec.sys.m; ++j) {
                    const Vec a = nested_bracket(spec.sys, i, j, pts.xs[q], pts.omegas[q], false);
                    const Vec b = nested_bracket(no_hess, i, j, pts.xs[q], pts.omegas[q], true);
                    double err = 0.0, mag = 0.0;
                    for (size_t d = 0; d < a.size(); ++d) {
                        err = std::max(err, std::abs(a[d] - b[d]));
                        mag = std::max(mag, std::abs(a[d]));
                    }
                    worst = std::max(worst, err / std::max(1.0, mag));
                }
    }
    return {"brackets:nested_fd", worst <= 1e-4, "max rel err analytic vs FD " + fmt(worst)};
}

CheckResult check_adjoint_gradient(const ProblemSpec& spec) {
    SolveOptions opt;
    opt.grid_steps = 20;
    opt.seed = 7;
    const TimeGrid grid(spec.sys.t0, spec.sys.tf, opt.grid_steps);
    ControlGrid u(grid, spec.sys.m);
    for (int j = 0; j < grid.steps; ++j)
        for (int i = 0; i < spec.sys.m; ++i) {
            const double lo = spec.sys.u_min[static_cast<size_t>(i)], hi = spec.sys.u_max[static_cast<size_t>(i)];
            u.at(j, i) = lo + (0.35 + 0.3 * counter_u01(5, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i))) * (hi - lo);
        }
    const SampleSet samples = sample_parameters(spec.dist, 3, opt.seed);
    const TrajectoryBundle traj = integrate_forward(spec.sys, spec.ic, samples, u, grid);
    const CostateBundle costate = integrate_adjoint(spec.sys, traj, u);
    const std::vector<double> g = cost_gradient(spec.sys, traj, costate, u);
    const std::vector<double> fd = fd_cost_gradient(spec.sys, spec.ic, samples, u);
    double err = 0.0, mag = 0.0;
    for (size_t q = 0; q < g.size(); ++q) {
        err = std::max(err, std::abs(g[q] - fd[q]));
        mag = std::max(mag, std::abs(fd[q]));
    }
    const double rel = err / std::max(mag, 1e-8);
    return {"gradient_fd:" + spec.name, rel <= 1e-4, "max rel err vs central differences " + fmt(rel)};
}

CheckResult check_rk4_order() {
    std::vector<double> errors;
    const double order = rk4_measured_order(&errors);
    bool ratios_ok = true;
    for (size_t i = 0; i + 1 < errors.size(); ++i)
        if (errors[i] / errors[i + 1] < 13.0) ratios_ok = false;
    const bool pass = order >= 3.8 && ratios_ok;
    return {"rk4:order", pass, "measured order " + fmt(order)};
}

CheckResult check_sampling() {
    bool pass = true;
    std::string detail;
    const auto tn = ParameterDistribution::truncated_normal(70, 5, 40, 90);
    const SampleSet s = sample_parameters(tn, 10000, 99);
    double ks = 0.0;
    std::vector<double> vals;
    for (const auto& v : s.samples) {
        if (v[0] < 40.0 || v[0] > 90.0) { pass = false; detail = "support violation"; }
        vals.push_back(v[0]);
    }
    std::sort(vals.begin(), vals.end());
    for (size_t i = 0; i < vals.size(); ++i) {
        const double f = truncated_normal_cdf(tn, vals[i]);
        ks = std::max(ks, std::max(std::abs(f - static_cast<double>(i) / vals.size()),
                                   std::abs(f - static_cast<double>(i + 1) / vals.size())));
    }
    if (ks > 0.02) { pass = false; detail = "KS distance " + fmt(ks); }
    if (pass) detail = "KS distance " + fmt(ks) + " at 1e4 draws";
    return {"sampling:truncated_normal", pass, detail};
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(const std::string& filter) {
    std::vector<std::pair<std::string, CheckFn>> checks;
    for (const std::string& name : problem_names()) {
        checks.emplace_back("jacobians:" + name, [name] { return check_jacobians(make_problem(name)); });
        checks.emplace_back("gradients:" + name, [name] { return check_cost_gradient(make_problem(name)); });
        checks.emplace_back("growth:" + name, [name] { return check_growth(make_problem(name)); });
        checks.emplace_back("gradient_fd:" + name, [name] { return check_adjoint_gradient(make_problem(name)); });
    }
    checks.emplace_back("brackets:identities", check_bracket_identities);
    checks.emplace_back("brackets:commuting", check_commuting_fields);
    checks.emplace_back("brackets:nested_fd", check_nested_fd);
    checks.emplace_back("rk4:order", check_rk4_order);
    checks.emplace_back("sampling:truncated_normal", check_sampling);

    std::vector<CheckResult> results;
    for (auto& [name, fn] : checks) {
        if (!filter.empty() && name.find(filter) == std::string::npos) continue;
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            results.push_back({name, false, std::string("exception: ") + e.what()});
        }
    }
    return results;
}

}  // namespace eoc
