#include "eoc/problems.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace eoc {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& overrides, const std::set<std::string>& allowed,
                         const std::string& problem) {
    if (!overrides.is_object()) throw std::invalid_argument(problem + ": overrides must be a JSON object");
    for (auto it = overrides.begin(); it != overrides.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument(problem + ": unknown override '" + it.key() + "'");
}

double positive_override(const json& overrides, const std::string& key, double fallback,
                         const std::string& problem) {
    if (!overrides.contains(key)) return fallback;
    const double v = overrides.at(key).get<double>();
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(problem + ": override '" + key + "' must be positive and finite");
    return v;
}

std::vector<Mat> zero_hessian(int n) {
    return std::vector<Mat>(static_cast<size_t>(n), Mat(n, n));
}

}  // namespace

ParameterDistribution distribution_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw std::invalid_argument("distribution: expected an object with a 'type' key");
    const std::string type = j.at("type").get<std::string>();
    if (type == "truncated_normal") {
        return ParameterDistribution::truncated_normal(j.at("mean").get<double>(), j.at("std").get<double>(),
                                                       j.at("lower").get<double>(), j.at("upper").get<double>());
    }
    if (type == "uniform") {
        return ParameterDistribution::uniform(j.at("lower").get<double>(), j.at("upper").get<double>());
    }
    if (type == "finite_set") {
        std::vector<Vec> points;
        for (const auto& p : j.at("points")) points.push_back(p.get<Vec>());
        return ParameterDistribution::finite_set(std::move(points), j.at("weights").get<Vec>());
    }
    if (type == "product") {
        std::vector<ParameterDistribution> comps;
        for (const auto& c : j.at("components")) comps.push_back(distribution_from_json(c));
        return ParameterDistribution::product(std::move(comps));
    }
    throw std::invalid_argument("distribution: unknown type '" + type + "'");
}

json distribution_to_json(const ParameterDistribution& d) {
    json j;
    switch (d.kind) {
        case ParameterDistribution::Kind::TruncatedNormal:
            j["type"] = "truncated_normal";
            j["mean"] = d.mean;
            j["std"] = d.stddev;
            j["lower"] = d.lower;
            j["upper"] = d.upper;
            break;
        case ParameterDistribution::Kind::Uniform:
            j["type"] = "uniform";
            j["lower"] = d.lower;
            j["upper"] = d.upper;
            break;
        case ParameterDistribution::Kind::FiniteSet:
            j["type"] = "finite_set";
            j["points"] = d.points;
            j["weights"] = d.weights;
            break;
        case ParameterDistribution::Kind::Product: {
            j["type"] = "product";
            json comps = json::array();
            for (const auto& c : d.components) comps.push_back(distribution_to_json(c));
            j["components"] = comps;
            break;
        }
    }
    return j;
}

// Fishing strategy benchmark. State (x, z): x is the stock, z accumulates
// revenue at rate (E - c/x) u U_max. omega = (phi0, r, K) with phi0 the
// initial stock, r the reproduction rate, K the carrying capacity.
// Revenue is maximized, so the internal terminal cost is g = -z(T).
ProblemSpec fishing_problem(const json& overrides) {
    reject_unknown_keys(overrides, {"E", "c", "U_max", "T", "distribution"}, "fishing");
    const double E = positive_override(overrides, "E", 1.0, "fishing");
    const double c = positive_override(overrides, "c", 17.5, "fishing");
    const double Umax = positive_override(overrides, "U_max", 20.0, "fishing");
    const double T = positive_override(overrides, "T", 10.0, "fishing");

    ProblemSpec spec;
    spec.name = "fishing";
    spec.sense = Sense::Maximize;
    spec.description =
        "Average-revenue fishing strategy: logistic stock dynamics with uncertain initial stock, "
        "reproduction rate and carrying capacity; scalar fishing effort u in [0,1].";
    spec.parameters = {{"E", E}, {"c", c}, {"U_max", Umax}, {"T", T}};

    ControlAffineSystem sys;
    sys.n = 2;
    sys.m = 1;
    sys.t0 = 0.0;
    sys.tf = T;
    sys.u_min = {0.0};
    sys.u_max = {1.0};
    sys.domain_note = "stock level must stay above 1";
    sys.state_ok = [](const Vec& x) { return x[0] > 1.0; };

    sys.f = {
        [](const Vec& x, const Vec& w) -> Vec {
            const double r = w[1], K = w[2];
            return {r * x[0] * (1.0 - x[0] / K), 0.0};
        },
        [E, c, Umax](const Vec& x, const Vec&) -> Vec {
            return {-Umax, (E - c / x[0]) * Umax};
        },
    };
    sys.jac = {
        [](const Vec& x, const Vec& w) -> Mat {
            const double r = w[1], K = w[2];
            Mat J(2, 2);
            J(0, 0) = r * (1.0 - 2.0 * x[0] / K);
            return J;
        },
        [c, Umax](const Vec& x, const Vec&) -> Mat {
            Mat J(2, 2);
            J(1, 0) = c * Umax / (x[0] * x[0]);
            return J;
        },
    };
    sys.hess = {
        [](const Vec&, const Vec& w) -> std::vector<Mat> {
            const double r = w[1], K = w[2];
            auto H = zero_hessian(2);
            H[0](0, 0) = -2.0 * r / K;
            return H;
        },
        [c, Umax](const Vec& x, const Vec&) -> std::vector<Mat> {
            auto H = zero_hessian(2);
            H[1](0, 0) = -2.0 * c * Umax / (x[0] * x[0] * x[0]);
            return H;
        },
    };
    sys.terminal_cost = [](const Vec& x, const Vec&) { return -x[1]; };
    sys.terminal_cost_grad = [](const Vec&, const Vec&) -> Vec { return {0.0, -1.0}; };
    sys.validate_shape();
    spec.sys = sys;

    if (overrides.contains("distribution")) {
        spec.dist = distribution_from_json(overrides.at("distribution"));
    } else {
        spec.dist = ParameterDistribution::product({
            ParameterDistribution::truncated_normal(70.0, 5.0, 40.0, 90.0),   // phi0
            ParameterDistribution::truncated_normal(0.71, 0.05, 0.1, 1.0),    // r
            ParameterDistribution::truncated_normal(80.5, 10.0, 65.0, 95.0),  // K
        });
    }
    if (spec.dist.dimension() < 3)
        throw std::invalid_argument("fishing: distribution must produce omega = (phi0, r, K)");

    spec.ic = InitialConditionSpec::named("fishing", [](const Vec& w) -> Vec { return {w[0], 0.0}; });
    return spec;
}

// Vector-control variant with commuting control fields. State (x, y, z):
// xdot = y^2 + u1, ydot = -u2, zdot = x^2/2, minimize z(T); the initial
// condition x(0) = y(0) is a single uncertain scalar.
ProblemSpec bryson_ho_problem(const json& overrides) {
    reject_unknown_keys(overrides, {"T", "distribution"}, "bryson_ho");
    const double T = positive_override(overrides, "T", 2.0, "bryson_ho");

    ProblemSpec spec;
    spec.name = "bryson_ho";
    spec.sense = Sense::Minimize;
    spec.description =
        "Minimum average integral-square-state with two bounded controls acting on commuting "
        "directions; uncertain common initial value for x and y.";
    spec.parameters = {{"T", T}};

    ControlAffineSystem sys;
    sys.n = 3;
    sys.m = 2;
    sys.t0 = 0.0;
    sys.tf = T;
    sys.u_min = {-1.0, -1.0};
    sys.u_max = {1.0, 1.0};

    sys.f = {
        [](const Vec& x, const Vec&) -> Vec { return {x[1] * x[1], 0.0, 0.5 * x[0] * x[0]}; },
        [](const Vec&, const Vec&) -> Vec { return {1.0, 0.0, 0.0}; },
        [](const Vec&, const Vec&) -> Vec { return {0.0, -1.0, 0.0}; },
    };
    sys.jac = {
        [](const Vec& x, const Vec&) -> Mat {
            Mat J(3, 3);
            J(0, 1) = 2.0 * x[1];
            J(2, 0) = x[0];
            return J;
        },
        [](const Vec&, const Vec&) -> Mat { return Mat(3, 3); },
        [](const Vec&, const Vec&) -> Mat { return Mat(3, 3); },
    };
    sys.hess = {
        [](const Vec&, const Vec&) -> std::vector<Mat> {
            auto H = zero_hessian(3);
            H[0](1, 1) = 2.0;
            H[2](0, 0) = 1.0;
            return H;
        },
        [](const Vec&, const Vec&) -> std::vector<Mat> { return zero_hessian(3); },
        [](const Vec&, const Vec&) -> std::vector<Mat> { return zero_hessian(3); },
    };
    sys.terminal_cost = [](const Vec& x, const Vec&) { return x[2]; };
    sys.terminal_cost_grad = [](const Vec&, const Vec&) -> Vec { return {0.0, 0.0, 1.0}; };
    sys.validate_shape();
    spec.sys = sys;

    spec.dist = overrides.contains("distribution") ? distribution_from_json(overrides.at("distribution"))
                                                   : ParameterDistribution::uniform(0.95, 1.05);

    spec.ic = InitialConditionSpec::named("bryson_ho", [](const Vec& w) -> Vec { return {w[0], w[0], 0.0}; });
    return spec;
}

std::vector<std::string> problem_names() { return {"fishing", "bryson_ho"}; }

ProblemSpec make_problem(const std::string& name, const json& overrides) {
    if (name == "fishing") return fishing_problem(overrides);
    if (name == "bryson_ho") return bryson_ho_problem(overrides);
    throw std::invalid_argument("unknown problem '" + name + "'");
}

}  // namespace eoc
