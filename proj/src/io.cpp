#include "eoc/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace eoc {

namespace {

using nlohmann::json;

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    return f;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json options_to_json(const SolveOptions& o) {
    return json{{"armijo_c", o.armijo_c},
                {"backtrack_factor", o.backtrack_factor},
                {"initial_step", o.initial_step},
                {"max_iters", o.max_iters},
                {"nested", o.nested_samples},
                {"seed", o.seed},
                {"snap_bounds", o.snap_bounds},
                {"snap_tol", o.snap_tol},
                {"steps", o.grid_steps},
                {"tol_pg", o.tol_pg}};
}

void options_from_json(const json& j, SolveOptions& o) {
    o.armijo_c = j.at("armijo_c").get<double>();
    o.backtrack_factor = j.at("backtrack_factor").get<double>();
    o.initial_step = j.at("initial_step").get<double>();
    o.max_iters = j.at("max_iters").get<int>();
    o.nested_samples = j.at("nested").get<bool>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.snap_bounds = j.at("snap_bounds").get<bool>();
    o.snap_tol = j.at("snap_tol").get<double>();
    o.grid_steps = j.at("steps").get<int>();
    o.tol_pg = j.at("tol_pg").get<double>();
}

}  // namespace

json solve_to_json(const RunConfig& cfg, const ProblemSpec& spec, const SolveResult& res,
                   bool with_timestamp) {
    json control = json::array();
    for (int j = 0; j < res.control.grid.steps; ++j) {
        json row = json::array();
        for (int i = 0; i < res.control.m; ++i) row.push_back(res.control.at(j, i));
        control.push_back(row);
    }
    json doc{
        {"analysis", {{"min_arc_nodes", cfg.min_arc_nodes}, {"tol_psi", cfg.tol_psi}}},
        {"control", control},
        {"converged", res.converged},
        {"cost", spec.user_cost(res.cost)},
        {"cost_internal", res.cost},
        {"diagnostics",
         {{"forward_integrations", res.diag.forward_integrations},
          {"iterations", res.iterations},
          {"projected_gradient_norm", res.projected_gradient_norm},
          {"status", res.diag.status}}},
        {"k", cfg.k},
        {"options", options_to_json(cfg.options)},
        {"problem", cfg.problem},
        {"problem_overrides", cfg.problem_overrides},
        {"sense", spec.sense == Sense::Maximize ? "maximize" : "minimize"},
    };
    if (with_timestamp) doc["timestamp"] = utc_timestamp();
    return doc;
}

void write_json(const std::string& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

SolveDocument read_solve_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    json doc = json::parse(f);

    SolveDocument out;
    out.cfg.problem = doc.at("problem").get<std::string>();
    out.cfg.problem_overrides = doc.at("problem_overrides");
    out.cfg.k = doc.at("k").get<int>();
    options_from_json(doc.at("options"), out.cfg.options);
    out.cfg.tol_psi = doc.at("analysis").at("tol_psi").get<double>();
    out.cfg.min_arc_nodes = doc.at("analysis").at("min_arc_nodes").get<int>();
    for (const auto& row : doc.at("control"))
        for (const auto& v : row) out.control.push_back(v.get<double>());
    return out;
}

void write_trajectories_csv(const std::string& path, const TrajectoryBundle& traj) {
    auto f = open_out(path);
    f << "t,sample_index";
    for (int d = 0; d < traj.n; ++d) f << ",x_" << d;
    f << "\n";
    for (int j = 0; j < traj.grid.nodes(); ++j)
        for (int s = 0; s < traj.k; ++s) {
            f << g17(traj.grid.node(j)) << "," << s;
            for (int d = 0; d < traj.n; ++d) f << "," << g17(traj.state(j, s)[d]);
            f << "\n";
        }
}

void write_costates_csv(const std::string& path, const CostateBundle& costate) {
    auto f = open_out(path);
    f << "t,sample_index";
    for (int d = 0; d < costate.n; ++d) f << ",p_" << d;
    f << "\n";
    for (int j = 0; j < costate.grid.nodes(); ++j)
        for (int s = 0; s < costate.k; ++s) {
            f << g17(costate.grid.node(j)) << "," << s;
            for (int d = 0; d < costate.n; ++d) f << "," << g17(costate.state(j, s)[d]);
            f << "\n";
        }
}

void write_control_csv(const std::string& path, const ControlGrid& control) {
    auto f = open_out(path);
    f << "t";
    for (int i = 1; i <= control.m; ++i) f << ",u_" << i;
    f << "\n";
    for (int j = 0; j < control.grid.steps; ++j) {
        f << g17(control.grid.node(j));
        for (int i = 0; i < control.m; ++i) f << "," << g17(control.at(j, i));
        f << "\n";
    }
}

void write_switching_csv(const std::string& path, const SwitchingData& sw, const ArcReport& report) {
    auto f = open_out(path);
    f << "t";
    for (int i = 1; i <= sw.m; ++i) f << ",Psi_" << i;
    for (int i = 1; i <= sw.m; ++i) f << ",class_" << i;
    f << "\n";
    for (int j = 0; j < sw.grid.nodes(); ++j) {
        f << g17(sw.grid.node(j));
        for (int i = 0; i < sw.m; ++i) f << "," << g17(sw.at(j, i));
        for (int i = 0; i < sw.m; ++i) f << "," << node_class_name(report.at(j, i));
        f << "\n";
    }
}

void write_singular_csv(const std::string& path, const ArcReport& report,
                        const std::vector<SingularSynthesis>& synthesis, int m) {
    auto f = open_out(path);
    f << "t";
    for (int i = 1; i <= m; ++i) f << ",u_singular_" << i;
    f << "\n";
    for (const SingularSynthesis& syn : synthesis) {
        for (int j = syn.interval.first; j <= syn.interval.last; ++j) {
            f << g17(report.grid.node(j));
            Vec row(static_cast<size_t>(m), std::numeric_limits<double>::quiet_NaN());
            const auto& vals = syn.values[static_cast<size_t>(j - syn.interval.first)];
            for (size_t c = 0; c < syn.interval.singular.size(); ++c)
                row[static_cast<size_t>(syn.interval.singular[c] - 1)] = vals[c];
            for (int i = 0; i < m; ++i) f << "," << g17(row[static_cast<size_t>(i)]);
            f << "\n";
        }
    }
}

json certificate_to_json(const CertificateReport& cert) {
    return json{{"adjoint_residual_max", cert.adjoint_residual_max},
                {"adjoint_residual_mean", cert.adjoint_residual_mean},
                {"bang_mismatch_fraction", cert.bang_mismatch_fraction},
                {"bang_nodes_checked", cert.bang_nodes_checked},
                {"gap_scale", cert.gap_scale},
                {"hamiltonian_gap_max", cert.hamiltonian_gap_max},
                {"hamiltonian_gap_mean", cert.hamiltonian_gap_mean},
                {"singular_nodes", cert.singular_nodes},
                {"terminal_residual_max", cert.terminal_residual_max}};
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep, const ProblemSpec& spec) {
    auto f = open_out(path);
    const int m = sweep.records.empty() ? 0 : sweep.records.front().control.m;
    f << "k,cost,rel_cost,rel_control";
    for (int i = 1; i <= m; ++i) f << ",rel_control_" << i;
    f << "\n";
    for (const SweepRecord& r : sweep.records) {
        f << r.k << "," << g17(spec.user_cost(r.cost));
        if (r.k == 1) {
            f << ",nan,nan";
            for (int i = 0; i < m; ++i) f << ",nan";
        } else {
            double rc_max = 0.0;
            for (double rc : r.rel_control) rc_max = std::max(rc_max, rc);
            f << "," << g17(r.rel_cost) << "," << g17(rc_max);
            for (int i = 0; i < m; ++i) f << "," << g17(r.rel_control[static_cast<size_t>(i)]);
        }
        f << "\n";
    }
}

}  // namespace eoc
