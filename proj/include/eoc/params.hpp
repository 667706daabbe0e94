#pragma once

// Parameter space, probability measure and reproducible i.i.d. sampling for
// the sample-average scheme. Samples are drawn through the counter generator
// of rng.hpp, so SampleSet(seed, k) is always a bitwise prefix of
// SampleSet(seed, k') for k' > k.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eoc/linalg.hpp"

namespace eoc {

struct ParameterDistribution {
    enum class Kind { TruncatedNormal, Uniform, FiniteSet, Product };

    Kind kind = Kind::Uniform;

    // TruncatedNormal / Uniform
    double mean = 0.0;
    double stddev = 1.0;
    double lower = 0.0;
    double upper = 1.0;

    // FiniteSet: atoms with weights summing to 1 (within 1e-12)
    std::vector<Vec> points;
    Vec weights;

    // Product of independent components
    std::vector<ParameterDistribution> components;

    static ParameterDistribution truncated_normal(double mean, double stddev, double lower, double upper);
    static ParameterDistribution uniform(double lower, double upper);
    static ParameterDistribution finite_set(std::vector<Vec> points, Vec weights);
    static ParameterDistribution product(std::vector<ParameterDistribution> components);

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    // Dimension of one sample vector.
    int dimension() const;

    // Number of uniform draws one sample consumes (counter slots).
    int slots() const;
};

struct SampleSet {
    std::vector<Vec> samples;  // k vectors of size dist.dimension()
    std::uint64_t seed = 0;
    int k = 0;
};

// k i.i.d. draws; pure function of (dist, seed, k); prefix property across k.
SampleSet sample_parameters(const ParameterDistribution& dist, int k, std::uint64_t seed);

// Analytic moments of the truncated normal, used by diagnostics and tests.
double truncated_normal_mean(const ParameterDistribution& tn);
double truncated_normal_cdf(const ParameterDistribution& tn, double x);

struct InitialConditionSpec {
    enum class Kind { Constant, Map };
    Kind kind = Kind::Constant;
    Vec x0;                                 // Constant
    std::string name;                       // Map: registry name, e.g. "fishing"
    std::function<Vec(const Vec&)> map;     // Map: omega -> initial state

    static InitialConditionSpec constant(Vec x0);
    static InitialConditionSpec named(std::string name, std::function<Vec(const Vec&)> map);
};

// phi(omega); validates the result against the system's state dimension.
Vec initial_condition_map(const InitialConditionSpec& spec, const Vec& omega, int state_dim);

}  // namespace eoc
