#pragma once

// Uniform time grid and piecewise-constant control grid (one control row per
// interval [t_j, t_{j+1})).

#include <stdexcept>
#include <vector>

#include "eoc/linalg.hpp"

namespace eoc {

struct TimeGrid {
    double t0 = 0.0;
    double tf = 1.0;
    int steps = 1;  // number of intervals N; N+1 nodes

    TimeGrid() = default;
    TimeGrid(double t0_, double tf_, int steps_) : t0(t0_), tf(tf_), steps(steps_) {
        if (!(tf > t0)) throw std::invalid_argument("TimeGrid: tf must be > t0");
        if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
    }

    double dt() const { return (tf - t0) / steps; }
    double node(int j) const { return t0 + j * dt(); }
    int nodes() const { return steps + 1; }

    bool operator==(const TimeGrid& o) const { return t0 == o.t0 && tf == o.tf && steps == o.steps; }
};

struct ControlGrid {
    TimeGrid grid;
    int m = 0;
    std::vector<double> v;  // steps x m, row-major

    ControlGrid() = default;
    ControlGrid(const TimeGrid& g, int m_, double fill = 0.0)
        : grid(g), m(m_), v(static_cast<size_t>(g.steps) * m_, fill) {}

    double& at(int j, int i) { return v[static_cast<size_t>(j) * m + i]; }
    double at(int j, int i) const { return v[static_cast<size_t>(j) * m + i]; }

    Vec row(int j) const {
        Vec r(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) r[static_cast<size_t>(i)] = at(j, i);
        return r;
    }

    void clamp(const Vec& lo, const Vec& hi) {
        for (int j = 0; j < grid.steps; ++j)
            for (int i = 0; i < m; ++i) {
                double& u = at(j, i);
                if (u < lo[static_cast<size_t>(i)]) u = lo[static_cast<size_t>(i)];
                if (u > hi[static_cast<size_t>(i)]) u = hi[static_cast<size_t>(i)];
            }
    }

    bool within(const Vec& lo, const Vec& hi) const {
        for (int j = 0; j < grid.steps; ++j)
            for (int i = 0; i < m; ++i)
                if (at(j, i) < lo[static_cast<size_t>(i)] || at(j, i) > hi[static_cast<size_t>(i)]) return false;
        return true;
    }
};

}  // namespace eoc
