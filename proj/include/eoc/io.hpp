#pragma once

// Result persistence: solve.json, certificate.json and the CSV exports
// consumed by external plotting. Schemas are fixed; columns and keys are
// documented in the README.

#include <string>

#include "eoc/analysis.hpp"
#include "eoc/optimize.hpp"

#include "json.hpp"

namespace eoc {

// One run's full configuration (CLI flags/config file resolve into this).
struct RunConfig {
    std::string problem = "fishing";
    nlohmann::json problem_overrides = nlohmann::json::object();
    int k = 20;
    int k_max = 20;
    SolveOptions options;
    double tol_psi = 0.02;
    int min_arc_nodes = 3;
    std::string out_dir = "out";
};

nlohmann::json solve_to_json(const RunConfig& cfg, const ProblemSpec& spec, const SolveResult& res,
                             bool with_timestamp = true);
void write_json(const std::string& path, const nlohmann::json& j);

struct SolveDocument {
    RunConfig cfg;
    std::vector<double> control;  // steps x m
};
SolveDocument read_solve_json(const std::string& path);

void write_trajectories_csv(const std::string& path, const TrajectoryBundle& traj);
void write_costates_csv(const std::string& path, const CostateBundle& costate);
void write_control_csv(const std::string& path, const ControlGrid& control);
void write_switching_csv(const std::string& path, const SwitchingData& sw, const ArcReport& report);
void write_singular_csv(const std::string& path, const ArcReport& report,
                        const std::vector<SingularSynthesis>& synthesis, int m);
nlohmann::json certificate_to_json(const CertificateReport& cert);
void write_sweep_csv(const std::string& path, const SweepResult& sweep, const ProblemSpec& spec);

}  // namespace eoc
