#pragma once

// Built-in benchmark registry: the ensemble fishing problem (scalar control,
// logistic stock dynamics, Mayer transform via an accumulated-revenue state)
// and a vector-control variant of a classic minimum-integral-square-state
// problem with commuting control fields.

#include <map>
#include <string>

#include "eoc/dynamics.hpp"
#include "eoc/params.hpp"

#include "json.hpp"

namespace eoc {

enum class Sense { Minimize, Maximize };

struct ProblemSpec {
    std::string name;
    ControlAffineSystem sys;
    ParameterDistribution dist;
    InitialConditionSpec ic;
    Sense sense = Sense::Minimize;
    std::string description;
    std::map<std::string, double> parameters;  // resolved numeric parameters

    // The solver minimizes sys.terminal_cost; reports flip the sign for
    // maximization problems.
    double user_cost(double internal_cost) const {
        return sense == Sense::Maximize ? -internal_cost : internal_cost;
    }
};

// Overrides: fishing accepts E, c, U_max, T (and "distribution"); the
// bounded-control variant accepts T (and "distribution"). Unknown keys or
// out-of-range values throw std::invalid_argument.
ProblemSpec fishing_problem(const nlohmann::json& overrides = nlohmann::json::object());
ProblemSpec bryson_ho_problem(const nlohmann::json& overrides = nlohmann::json::object());

std::vector<std::string> problem_names();
ProblemSpec make_problem(const std::string& name,
                         const nlohmann::json& overrides = nlohmann::json::object());

ParameterDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json distribution_to_json(const ParameterDistribution& d);

}  // namespace eoc
