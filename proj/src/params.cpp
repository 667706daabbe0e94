#include "eoc/params.hpp"

#include <cmath>
#include <stdexcept>

#include "eoc/rng.hpp"

namespace eoc {

ParameterDistribution ParameterDistribution::truncated_normal(double mean, double stddev,
                                                              double lower, double upper) {
    ParameterDistribution d;
    d.kind = Kind::TruncatedNormal;
    d.mean = mean;
    d.stddev = stddev;
    d.lower = lower;
    d.upper = upper;
    d.validate();
    return d;
}

ParameterDistribution ParameterDistribution::uniform(double lower, double upper) {
    ParameterDistribution d;
    d.kind = Kind::Uniform;
    d.lower = lower;
    d.upper = upper;
    d.validate();
    return d;
}

ParameterDistribution ParameterDistribution::finite_set(std::vector<Vec> points, Vec weights) {
    ParameterDistribution d;
    d.kind = Kind::FiniteSet;
    d.points = std::move(points);
    d.weights = std::move(weights);
    d.validate();
    return d;
}

ParameterDistribution ParameterDistribution::product(std::vector<ParameterDistribution> components) {
    ParameterDistribution d;
    d.kind = Kind::Product;
    d.components = std::move(components);
    d.validate();
    return d;
}

void ParameterDistribution::validate() const {
    switch (kind) {
        case Kind::TruncatedNormal:
            if (!(stddev > 0.0)) throw std::invalid_argument("truncated_normal: stddev must be > 0");
            if (!(lower < upper)) throw std::invalid_argument("truncated_normal: lower must be < upper");
            if (!std::isfinite(mean)) throw std::invalid_argument("truncated_normal: mean must be finite");
            break;
        case Kind::Uniform:
            if (!(lower < upper)) throw std::invalid_argument("uniform: lower must be < upper");
            break;
        case Kind::FiniteSet: {
            if (points.empty()) throw std::invalid_argument("finite_set: points must be nonempty");
            if (weights.size() != points.size())
                throw std::invalid_argument("finite_set: weights size must match points size");
            const size_t dim = points.front().size();
            if (dim == 0) throw std::invalid_argument("finite_set: points must be nonempty vectors");
            double sum = 0.0;
            for (double w : weights) {
                if (w < 0.0) throw std::invalid_argument("finite_set: weights must be nonnegative");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("finite_set: weights must sum to 1 (within 1e-12)");
            for (const Vec& p : points)
                if (p.size() != dim) throw std::invalid_argument("finite_set: points must share one dimension");
            break;
        }
        case Kind::Product:
            if (components.empty()) throw std::invalid_argument("product: components must be nonempty");
            for (const auto& c : components) c.validate();
            break;
    }
}

int ParameterDistribution::dimension() const {
    switch (kind) {
        case Kind::TruncatedNormal:
        case Kind::Uniform:
            return 1;
        case Kind::FiniteSet:
            return static_cast<int>(points.front().size());
        case Kind::Product: {
            int d = 0;
            for (const auto& c : components) d += c.dimension();
            return d;
        }
    }
    return 0;
}

int ParameterDistribution::slots() const {
    switch (kind) {
        case Kind::TruncatedNormal:
        case Kind::Uniform:
        case Kind::FiniteSet:
            return 1;
        case Kind::Product: {
            int s = 0;
            for (const auto& c : components) s += c.slots();
            return s;
        }
    }
    return 0;
}

namespace {

// Appends one draw of `dist` to `out`, consuming counter slots from `slot`.
void draw_into(const ParameterDistribution& dist, std::uint64_t seed, std::uint64_t index,
               std::uint64_t& slot, Vec& out) {
    switch (dist.kind) {
        case ParameterDistribution::Kind::TruncatedNormal: {
            const double u = counter_u01(seed, index, slot++);
            const double alpha = (dist.lower - dist.mean) / dist.stddev;
            const double beta = (dist.upper - dist.mean) / dist.stddev;
            const double flo = normal_cdf(alpha);
            const double fhi = normal_cdf(beta);
            double x = dist.mean + dist.stddev * normal_quantile(flo + u * (fhi - flo));
            // Inverse-CDF keeps draws inside the interval up to rounding.
            x = std::min(std::max(x, dist.lower), dist.upper);
            out.push_back(x);
            break;
        }
        case ParameterDistribution::Kind::Uniform: {
            const double u = counter_u01(seed, index, slot++);
            out.push_back(dist.lower + u * (dist.upper - dist.lower));
            break;
        }
        case ParameterDistribution::Kind::FiniteSet: {
            const double u = counter_u01(seed, index, slot++);
            double cum = 0.0;
            size_t pick = dist.points.size() - 1;
            for (size_t i = 0; i < dist.weights.size(); ++i) {
                cum += dist.weights[i];
                if (u <= cum) { pick = i; break; }
            }
            const Vec& atom = dist.points[pick];
            out.insert(out.end(), atom.begin(), atom.end());
            break;
        }
        case ParameterDistribution::Kind::Product:
            for (const auto& c : dist.components) draw_into(c, seed, index, slot, out);
            break;
    }
}

}  // namespace

SampleSet sample_parameters(const ParameterDistribution& dist, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("sample_parameters: k must be >= 1");
    dist.validate();
    SampleSet set;
    set.seed = seed;
    set.k = k;
    set.samples.reserve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        Vec omega;
        omega.reserve(static_cast<size_t>(dist.dimension()));
        std::uint64_t slot = 0;
        draw_into(dist, seed, static_cast<std::uint64_t>(i), slot, omega);
        set.samples.push_back(std::move(omega));
    }
    return set;
}

double truncated_normal_mean(const ParameterDistribution& tn) {
    if (tn.kind != ParameterDistribution::Kind::TruncatedNormal)
        throw std::invalid_argument("truncated_normal_mean: wrong distribution kind");
    const double alpha = (tn.lower - tn.mean) / tn.stddev;
    const double beta = (tn.upper - tn.mean) / tn.stddev;
    const double z = normal_cdf(beta) - normal_cdf(alpha);
    return tn.mean + tn.stddev * (normal_pdf(alpha) - normal_pdf(beta)) / z;
}

double truncated_normal_cdf(const ParameterDistribution& tn, double x) {
    if (tn.kind != ParameterDistribution::Kind::TruncatedNormal)
        throw std::invalid_argument("truncated_normal_cdf: wrong distribution kind");
    if (x <= tn.lower) return 0.0;
    if (x >= tn.upper) return 1.0;
    const double alpha = (tn.lower - tn.mean) / tn.stddev;
    const double beta = (tn.upper - tn.mean) / tn.stddev;
    const double z = normal_cdf(beta) - normal_cdf(alpha);
    return (normal_cdf((x - tn.mean) / tn.stddev) - normal_cdf(alpha)) / z;
}

InitialConditionSpec InitialConditionSpec::constant(Vec x0) {
    InitialConditionSpec s;
    s.kind = Kind::Constant;
    s.x0 = std::move(x0);
    return s;
}

InitialConditionSpec InitialConditionSpec::named(std::string name, std::function<Vec(const Vec&)> map) {
    InitialConditionSpec s;
    s.kind = Kind::Map;
    s.name = std::move(name);
    s.map = std::move(map);
    return s;
}

Vec initial_condition_map(const InitialConditionSpec& spec, const Vec& omega, int state_dim) {
    Vec x = (spec.kind == InitialConditionSpec::Kind::Constant) ? spec.x0 : spec.map(omega);
    if (static_cast<int>(x.size()) != state_dim)
        throw std::invalid_argument("initial_condition_map: phi(omega) has dimension " +
                                    std::to_string(x.size()) + ", state dimension is " +
                                    std::to_string(state_dim));
    return x;
}

}  // namespace eoc
