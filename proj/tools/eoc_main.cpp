// eoc — solve, sweep, analyze and validate average optimal control problems
// over sampled parameter ensembles.
//
// Exit codes: 0 success, 1 invariant/convergence failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "eoc/checks.hpp"
#include "eoc/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliFlags {
    std::string config_path;
    std::string problem;
    int k = -1;
    long long seed = -1;
    int steps = -1;
    std::string out_dir;
    int k_max = -1;
    bool nested = false;
    bool independent = false;
    double tol_pg = -1.0;
    int max_iters = -1;
    double tol_psi = -1.0;
    int min_arc_nodes = -1;
    bool snap = false;
};

eoc::RunConfig resolve_config(const CliFlags& f) {
    eoc::RunConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::invalid_argument("cannot open config file: " + f.config_path);
        json doc = json::parse(in);
        if (doc.contains("problem")) cfg.problem = doc.at("problem").get<std::string>();
        if (doc.contains("problem_overrides")) cfg.problem_overrides = doc.at("problem_overrides");
        if (doc.contains("k")) cfg.k = doc.at("k").get<int>();
        if (doc.contains("k_max")) cfg.k_max = doc.at("k_max").get<int>();
        if (doc.contains("seed")) cfg.options.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("steps")) cfg.options.grid_steps = doc.at("steps").get<int>();
        if (doc.contains("tol_pg")) cfg.options.tol_pg = doc.at("tol_pg").get<double>();
        if (doc.contains("max_iters")) cfg.options.max_iters = doc.at("max_iters").get<int>();
        if (doc.contains("nested")) cfg.options.nested_samples = doc.at("nested").get<bool>();
        if (doc.contains("snap_bounds")) cfg.options.snap_bounds = doc.at("snap_bounds").get<bool>();
        if (doc.contains("tol_psi")) cfg.tol_psi = doc.at("tol_psi").get<double>();
        if (doc.contains("min_arc_nodes")) cfg.min_arc_nodes = doc.at("min_arc_nodes").get<int>();
        if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();
    }
    if (!f.problem.empty()) cfg.problem = f.problem;
    if (f.k >= 0) cfg.k = f.k;
    if (f.seed >= 0) cfg.options.seed = static_cast<std::uint64_t>(f.seed);
    if (f.steps >= 0) cfg.options.grid_steps = f.steps;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.k_max >= 0) cfg.k_max = f.k_max;
    if (f.nested) cfg.options.nested_samples = true;
    if (f.independent) cfg.options.nested_samples = false;
    if (f.tol_pg >= 0.0) cfg.options.tol_pg = f.tol_pg;
    if (f.max_iters >= 0) cfg.options.max_iters = f.max_iters;
    if (f.tol_psi >= 0.0) cfg.tol_psi = f.tol_psi;
    if (f.min_arc_nodes >= 0) cfg.min_arc_nodes = f.min_arc_nodes;
    if (f.snap) cfg.options.snap_bounds = true;

    if (cfg.k < 1) throw std::invalid_argument("k must be >= 1");
    if (cfg.options.grid_steps < 1) throw std::invalid_argument("steps must be >= 1");
    return cfg;
}

void write_analysis_outputs(const eoc::RunConfig& cfg, const eoc::ProblemSpec& spec,
                            const eoc::TrajectoryBundle& traj, const eoc::CostateBundle& costate,
                            const eoc::ControlGrid& control, const fs::path& out) {
    const eoc::SwitchingData sw = eoc::switching_function(traj, costate, spec.sys, cfg.tol_psi);
    const eoc::ArcReport report = eoc::classify_arcs(sw, control, cfg.min_arc_nodes);
    const auto synthesis = eoc::synthesize_singular_controls(traj, costate, spec.sys, report);
    const eoc::CertificateReport cert =
        eoc::pmp_certificate(traj, costate, control, spec.sys, cfg.tol_psi, cfg.min_arc_nodes);

    eoc::write_switching_csv((out / "switching.csv").string(), sw, report);
    eoc::write_singular_csv((out / "singular.csv").string(), report, synthesis, spec.sys.m);
    eoc::write_json((out / "certificate.json").string(), eoc::certificate_to_json(cert));

    for (const auto& syn : synthesis)
        if (!syn.note.empty())
            std::cout << "note: singular synthesis on nodes [" << syn.interval.first << ","
                      << syn.interval.last << "]: " << syn.note << "\n";
    std::printf("certificate: mean Hamiltonian gap %.3g (scale %.3g), bang mismatches %.2f%%, "
                "terminal residual %.3g\n",
                cert.hamiltonian_gap_mean, cert.gap_scale, 100.0 * cert.bang_mismatch_fraction,
                cert.terminal_residual_max);
}

int cmd_solve(const CliFlags& flags) {
    const eoc::RunConfig cfg = resolve_config(flags);
    const eoc::ProblemSpec spec = eoc::make_problem(cfg.problem, cfg.problem_overrides);
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    const eoc::SolveResult res = eoc::solve(spec, cfg.k, cfg.options);

    eoc::write_json((out / "solve.json").string(), eoc::solve_to_json(cfg, spec, res));
    eoc::write_trajectories_csv((out / "trajectories.csv").string(), res.trajectory);
    eoc::write_costates_csv((out / "costates.csv").string(), res.costate);
    eoc::write_control_csv((out / "control.csv").string(), res.control);
    write_analysis_outputs(cfg, spec, res.trajectory, res.costate, res.control, out);

    std::printf("%s: k=%d steps=%d cost=%.6f (%s) iterations=%d pg=%.3g converged=%s\n",
                cfg.problem.c_str(), cfg.k, cfg.options.grid_steps, spec.user_cost(res.cost),
                spec.sense == eoc::Sense::Maximize ? "maximized" : "minimized", res.iterations,
                res.projected_gradient_norm, res.converged ? "true" : "false");
    return res.converged ? 0 : 1;
}

int cmd_sweep(const CliFlags& flags) {
    eoc::RunConfig cfg = resolve_config(flags);
    if (cfg.k_max < 2) throw std::invalid_argument("k-max must be >= 2");
    const eoc::ProblemSpec spec = eoc::make_problem(cfg.problem, cfg.problem_overrides);
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    const eoc::SweepResult sw = eoc::sweep(spec, cfg.k_max, cfg.options);
    eoc::write_sweep_csv((out / "sweep.csv").string(), sw, spec);
    for (const auto& rec : sw.records) {
        char name[64];
        std::snprintf(name, sizeof(name), "control_k%03d.csv", rec.k);
        eoc::write_control_csv((out / name).string(), rec.control);
    }

    if (!sw.completed) {
        std::cerr << "sweep aborted: " << sw.error << " (partial results written)\n";
        return 1;
    }
    const auto& last = sw.records.back();
    double rc_max = 0.0;
    for (double rc : last.rel_control) rc_max = std::max(rc_max, rc);
    std::printf("sweep %s: k=1..%d final cost=%.6f rel_cost=%.3g rel_control=%.3g\n",
                cfg.problem.c_str(), cfg.k_max, spec.user_cost(last.cost), last.rel_cost, rc_max);

    // The solve of the largest k doubles as the standard solve output set.
    eoc::RunConfig final_cfg = cfg;
    final_cfg.k = cfg.k_max;
    eoc::write_json((out / "solve.json").string(),
                    eoc::solve_to_json(final_cfg, spec, sw.final_solve));
    write_analysis_outputs(cfg, spec, sw.final_solve.trajectory, sw.final_solve.costate,
                           sw.final_solve.control, out);
    return 0;
}

int cmd_analyze(const std::string& solve_json_path, const std::string& out_override) {
    const eoc::SolveDocument doc = eoc::read_solve_json(solve_json_path);
    eoc::RunConfig cfg = doc.cfg;
    const eoc::ProblemSpec spec = eoc::make_problem(cfg.problem, cfg.problem_overrides);

    const eoc::TimeGrid grid(spec.sys.t0, spec.sys.tf, cfg.options.grid_steps);
    eoc::ControlGrid control(grid, spec.sys.m);
    if (doc.control.size() != control.v.size())
        throw std::invalid_argument("analyze: stored control has wrong size for the grid");
    control.v = doc.control;

    const eoc::SampleSet samples = eoc::sample_parameters(spec.dist, cfg.k, cfg.options.seed);
    const eoc::TrajectoryBundle traj = eoc::integrate_forward(spec.sys, spec.ic, samples, control, grid);
    const eoc::CostateBundle costate = eoc::integrate_adjoint(spec.sys, traj, control);

    const fs::path out = out_override.empty() ? fs::path(solve_json_path).parent_path()
                                              : fs::path(out_override);
    fs::create_directories(out.empty() ? fs::path(".") : out);
    write_analysis_outputs(cfg, spec, traj, costate, control, out.empty() ? fs::path(".") : out);
    return 0;
}

int cmd_check(const std::string& only) {
    const auto results = eoc::run_invariant_checks(only);
    if (results.empty()) {
        std::cerr << "no checks match filter '" << only << "'\n";
        return 2;
    }
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %-28s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

int cmd_problems() {
    for (const std::string& name : eoc::problem_names()) {
        const eoc::ProblemSpec spec = eoc::make_problem(name);
        std::printf("%s\n  %s\n  sense: %s, n=%d, m=%d, horizon [%g, %g]\n  defaults:", name.c_str(),
                    spec.description.c_str(), spec.sense == eoc::Sense::Maximize ? "maximize" : "minimize",
                    spec.sys.n, spec.sys.m, spec.sys.t0, spec.sys.tf);
        for (const auto& [key, val] : spec.parameters) std::printf(" %s=%g", key.c_str(), val);
        std::printf("\n  omega distribution: %s\n", eoc::distribution_to_json(spec.dist).dump().c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ensemble optimal control solver"};
    app.require_subcommand(1);

    CliFlags flags;
    std::string analyze_input, analyze_out, check_only;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "JSON config file; flags override its keys");
        sub->add_option("--problem", flags.problem, "problem name from the registry");
        sub->add_option("--k", flags.k, "ensemble size");
        sub->add_option("--seed", flags.seed, "sampling seed");
        sub->add_option("--steps", flags.steps, "time-grid intervals N");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--tol-pg", flags.tol_pg, "projected-gradient stopping tolerance");
        sub->add_option("--max-iters", flags.max_iters, "iteration cap");
        sub->add_option("--tol-psi", flags.tol_psi, "singular classification threshold");
        sub->add_option("--min-arc-nodes", flags.min_arc_nodes, "shortest run classified as singular");
        sub->add_flag("--snap", flags.snap, "round near-bound controls onto the bounds");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve (P_k) and write solution + analysis files");
    add_common(solve);
    CLI::App* sweepc = app.add_subcommand("sweep", "solve (P_k) for k=1..k_max and record convergence");
    add_common(sweepc);
    sweepc->add_option("--k-max", flags.k_max, "largest ensemble size");
    auto* nested_flag = sweepc->add_flag("--nested", flags.nested, "prefix-nested sample sets (default)");
    sweepc->add_flag("--independent", flags.independent, "independent redraw per k")->excludes(nested_flag);

    CLI::App* analyze = app.add_subcommand("analyze", "recompute analysis outputs from a solve.json");
    analyze->add_option("solve_json", analyze_input, "path to solve.json")->required();
    analyze->add_option("--out", analyze_out, "output directory (default: alongside the input)");

    CLI::App* check = app.add_subcommand("check", "run the numeric invariant suite");
    check->add_option("--only", check_only, "run only checks whose name contains this substring");

    app.add_subcommand("problems", "list the built-in problem registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(flags);
        if (sweepc->parsed()) return cmd_sweep(flags);
        if (analyze->parsed()) return cmd_analyze(analyze_input, analyze_out);
        if (check->parsed()) return cmd_check(check_only);
        return cmd_problems();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
