#include "eoc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eoc {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kDegenerateEps = 1e-12;  // scalar denominator threshold
constexpr double kVacuousRowTol = 1e-6;   // row-coefficient / row-scale ratio
constexpr double kCouplingTol = 1e-8;     // allowed coupling into removed columns
constexpr double kCondLimit = 1e12;
}  // namespace

SwitchingData switching_function(const TrajectoryBundle& traj, const CostateBundle& costate,
                                 const ControlAffineSystem& sys, double tol_psi) {
    if (!(traj.grid == costate.grid) || traj.k != costate.k)
        throw std::invalid_argument("switching_function: bundle mismatch");
    SwitchingData sw;
    sw.grid = traj.grid;
    sw.m = sys.m;
    sw.tol_psi = tol_psi;
    sw.psi.assign(static_cast<size_t>(traj.grid.nodes()) * sys.m, 0.0);
    for (int j = 0; j < traj.grid.nodes(); ++j) {
        for (int i = 1; i <= sys.m; ++i) {
            double acc = 0.0;
            for (int s = 0; s < traj.k; ++s)
                acc += dot(costate.state_vec(j, s),
                           sys.f[static_cast<size_t>(i)](traj.state_vec(j, s), traj.omega(s)));
            sw.at(j, i - 1) = acc / traj.k;
        }
    }
    return sw;
}

const char* node_class_name(NodeClass c) {
    switch (c) {
        case NodeClass::BangMin: return "min";
        case NodeClass::BangMax: return "max";
        case NodeClass::Singular: return "singular";
        case NodeClass::Switch: return "switch";
    }
    return "?";
}

ArcReport classify_arcs(const SwitchingData& sw, const ControlGrid& control, int min_arc_nodes) {
    if (!(sw.tol_psi > 0.0 && sw.tol_psi < 1.0))
        throw std::invalid_argument("classify_arcs: tol_psi must lie in (0,1)");
    if (min_arc_nodes < 1) throw std::invalid_argument("classify_arcs: min_arc_nodes must be >= 1");
    if (control.m != sw.m) throw std::invalid_argument("classify_arcs: control dimension mismatch");

    const int nodes = sw.grid.nodes();
    const int m = sw.m;
    ArcReport rep;
    rep.grid = sw.grid;
    rep.m = m;
    rep.tol_psi = sw.tol_psi;
    rep.min_arc_nodes = min_arc_nodes;
    rep.cls.assign(static_cast<size_t>(nodes) * m, NodeClass::Singular);

    for (int i = 0; i < m; ++i) {
        double maxabs = 0.0;
        for (int j = 0; j < nodes; ++j) maxabs = std::max(maxabs, std::abs(sw.at(j, i)));
        const double thr = sw.tol_psi * maxabs;
        for (int j = 0; j < nodes; ++j) {
            const double psi = sw.at(j, i);
            NodeClass c;
            if (std::abs(psi) <= thr)
                c = NodeClass::Singular;
            else
                c = psi > 0.0 ? NodeClass::BangMax : NodeClass::BangMin;
            rep.cls[static_cast<size_t>(j) * m + i] = c;
        }
        // short singular runs are switch artifacts, not arcs
        int j = 0;
        while (j < nodes) {
            if (rep.at(j, i) != NodeClass::Singular) { ++j; continue; }
            int e = j;
            while (e + 1 < nodes && rep.at(e + 1, i) == NodeClass::Singular) ++e;
            if (e - j + 1 < min_arc_nodes)
                for (int q = j; q <= e; ++q) rep.cls[static_cast<size_t>(q) * m + i] = NodeClass::Switch;
            j = e + 1;
        }
    }

    // node partition; switch nodes count as bang on the side of sign(Psi)
    auto node_sets = [&](int j, std::vector<int>& S, std::vector<int>& bmin, std::vector<int>& bmax) {
        S.clear(); bmin.clear(); bmax.clear();
        for (int i = 0; i < m; ++i) {
            switch (rep.at(j, i)) {
                case NodeClass::Singular: S.push_back(i + 1); break;
                case NodeClass::BangMax: bmax.push_back(i + 1); break;
                case NodeClass::BangMin: bmin.push_back(i + 1); break;
                case NodeClass::Switch:
                    (sw.at(j, i) >= 0.0 ? bmax : bmin).push_back(i + 1);
                    break;
            }
        }
    };

    std::vector<int> S, bmin, bmax, S2, bmin2, bmax2;
    int j = 0;
    while (j < nodes) {
        node_sets(j, S, bmin, bmax);
        int e = j;
        while (e + 1 < nodes) {
            node_sets(e + 1, S2, bmin2, bmax2);
            if (S2 != S || bmin2 != bmin || bmax2 != bmax) break;
            ++e;
        }
        ArcInterval iv;
        iv.first = j;
        iv.last = e;
        iv.singular = S;
        iv.bang_min = bmin;
        iv.bang_max = bmax;
        rep.intervals.push_back(std::move(iv));
        j = e + 1;
    }
    return rep;
}

double ensemble_bracket_pairing(const ControlAffineSystem& sys, int a, int b,
                                const std::vector<Vec>& xs, const std::vector<Vec>& ps,
                                const std::vector<Vec>& omegas) {
    const size_t k = xs.size();
    if (ps.size() != k || omegas.size() != k)
        throw std::invalid_argument("ensemble_bracket_pairing: inconsistent node data");
    double acc = 0.0;
    for (size_t s = 0; s < k; ++s) acc += dot(ps[s], nested_bracket(sys, a, b, xs[s], omegas[s]));
    return acc / static_cast<double>(k);
}

namespace {

// Same pairing but with |p . bracket| accumulated: a triangle-inequality
// ceiling used to tell structurally vanishing coefficients from genuine ones.
double pairing_scale(const ControlAffineSystem& sys, int a, int b, const std::vector<Vec>& xs,
                     const std::vector<Vec>& ps, const std::vector<Vec>& omegas) {
    double acc = 0.0;
    for (size_t s = 0; s < xs.size(); ++s)
        acc += std::abs(dot(ps[s], nested_bracket(sys, a, b, xs[s], omegas[s])));
    return acc / static_cast<double>(xs.size());
}

}  // namespace

double scalar_singular_value(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                             const std::vector<Vec>& ps, const std::vector<Vec>& omegas) {
    if (sys.m != 1) throw std::invalid_argument("scalar_singular_value: control must be scalar");
    const double num = ensemble_bracket_pairing(sys, 0, 1, xs, ps, omegas);
    const double den = ensemble_bracket_pairing(sys, 1, 1, xs, ps, omegas);
    if (std::abs(den) < kDegenerateEps * std::max(1.0, std::abs(num)))
        throw std::runtime_error("singular formula degenerate: |<p,[f1,[f0,f1]]>| = " +
                                 std::to_string(std::abs(den)) + " below threshold");
    return -num / den;
}

VectorSingularValue vector_singular_value(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                                          const std::vector<Vec>& ps, const std::vector<Vec>& omegas,
                                          const std::vector<int>& S, const std::vector<int>& bang_min,
                                          const std::vector<int>& bang_max) {
    const int ns = static_cast<int>(S.size());
    if (ns == 0) throw std::invalid_argument("vector_singular_value: empty singular set");

    Mat W(ns, ns);
    Vec b(static_cast<size_t>(ns), 0.0);
    Vec row_scale(static_cast<size_t>(ns), 0.0);
    for (int r = 0; r < ns; ++r) {
        const int i = S[static_cast<size_t>(r)];
        double scale_acc = 0.0;
        for (int c = 0; c < ns; ++c) {
            const int jf = S[static_cast<size_t>(c)];
            W(r, c) = ensemble_bracket_pairing(sys, i, jf, xs, ps, omegas);
            scale_acc += pairing_scale(sys, i, jf, xs, ps, omegas) *
                         std::max({1.0, std::abs(sys.u_min[static_cast<size_t>(jf - 1)]),
                                   std::abs(sys.u_max[static_cast<size_t>(jf - 1)])});
        }
        double bi = ensemble_bracket_pairing(sys, 0, i, xs, ps, omegas);
        scale_acc += pairing_scale(sys, 0, i, xs, ps, omegas);
        for (int jb : bang_min) {
            bi += ensemble_bracket_pairing(sys, i, jb, xs, ps, omegas) * sys.u_min[static_cast<size_t>(jb - 1)];
            scale_acc += pairing_scale(sys, i, jb, xs, ps, omegas) *
                         std::max(1.0, std::abs(sys.u_min[static_cast<size_t>(jb - 1)]));
        }
        for (int jb : bang_max) {
            bi += ensemble_bracket_pairing(sys, i, jb, xs, ps, omegas) * sys.u_max[static_cast<size_t>(jb - 1)];
            scale_acc += pairing_scale(sys, i, jb, xs, ps, omegas) *
                         std::max(1.0, std::abs(sys.u_max[static_cast<size_t>(jb - 1)]));
        }
        b[static_cast<size_t>(r)] = bi;
        row_scale[static_cast<size_t>(r)] = scale_acc;
    }

    VectorSingularValue out;
    out.values.assign(static_cast<size_t>(ns), kNan);
    out.indeterminate.assign(static_cast<size_t>(ns), false);

    // Rows whose signed coefficients all vanish relative to their ceiling are
    // 0 = 0 within noise: the equation does not determine that component.
    std::vector<int> keep;
    for (int r = 0; r < ns; ++r) {
        double coef = std::abs(b[static_cast<size_t>(r)]);
        for (int c = 0; c < ns; ++c) coef = std::max(coef, std::abs(W(r, c)));
        const double sc = std::max(row_scale[static_cast<size_t>(r)], 1e-300);
        if (coef <= kVacuousRowTol * sc)
            out.indeterminate[static_cast<size_t>(r)] = true;
        else
            keep.push_back(r);
    }
    if (keep.empty()) return out;  // fully indeterminate node

    // Kept equations must not couple into removed unknowns.
    for (int r : keep)
        for (int c = 0; c < ns; ++c)
            if (out.indeterminate[static_cast<size_t>(c)] &&
                std::abs(W(r, c)) > kCouplingTol * std::max(row_scale[static_cast<size_t>(r)], 1e-300))
                throw std::runtime_error(
                    "vector_singular_value: determinate equation couples into an indeterminate "
                    "component; system cannot be reduced");

    const int nk = static_cast<int>(keep.size());
    Mat Wk(nk, nk);
    Vec bk(static_cast<size_t>(nk));
    for (int r = 0; r < nk; ++r) {
        for (int c = 0; c < nk; ++c) Wk(r, c) = W(keep[static_cast<size_t>(r)], keep[static_cast<size_t>(c)]);
        bk[static_cast<size_t>(r)] = -b[static_cast<size_t>(keep[static_cast<size_t>(r)])];
    }
    LuFactors lu = lu_factor(Wk);
    out.cond = lu_cond1(Wk, lu);
    if (out.cond > kCondLimit)
        throw std::runtime_error("vector_singular_value: singular-index matrix numerically singular "
                                 "(condition estimate " + std::to_string(out.cond) + ")");
    const Vec sol = lu_solve(lu, bk);
    for (int r = 0; r < nk; ++r) out.values[static_cast<size_t>(keep[static_cast<size_t>(r)])] = sol[static_cast<size_t>(r)];
    return out;
}

namespace {

void gather_node(const TrajectoryBundle& traj, const CostateBundle& costate, int j,
                 std::vector<Vec>& xs, std::vector<Vec>& ps, std::vector<Vec>& omegas) {
    xs.clear(); ps.clear(); omegas.clear();
    for (int s = 0; s < traj.k; ++s) {
        xs.push_back(traj.state_vec(j, s));
        ps.push_back(costate.state_vec(j, s));
        omegas.push_back(traj.omega(s));
    }
}

}  // namespace

std::vector<double> singular_control_scalar(const TrajectoryBundle& traj, const CostateBundle& costate,
                                            const ControlAffineSystem& sys, const ArcInterval& interval) {
    if (sys.m != 1) throw std::invalid_argument("singular_control_scalar: control must be scalar");
    if (interval.singular.empty())
        throw std::invalid_argument("singular_control_scalar: interval is not singular");
    std::vector<double> out;
    std::vector<Vec> xs, ps, omegas;
    for (int j = interval.first; j <= interval.last; ++j) {
        gather_node(traj, costate, j, xs, ps, omegas);
        try {
            out.push_back(scalar_singular_value(sys, xs, ps, omegas));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(std::string(e.what()) + " at node " + std::to_string(j));
        }
    }
    return out;
}

SingularSynthesis singular_control_vector(const TrajectoryBundle& traj, const CostateBundle& costate,
                                          const ControlAffineSystem& sys, const ArcInterval& interval,
                                          const ArcReport& report, double comm_tol) {
    if (interval.singular.empty())
        throw std::invalid_argument("singular_control_vector: interval has no singular components");
    (void)report;

    SingularSynthesis syn;
    syn.interval = interval;

    // commutativity precondition [f_i,f_j] = 0 on the interval's trajectory points
    for (int j = interval.first; j <= interval.last; ++j)
        for (int s = 0; s < traj.k; ++s) {
            const Vec x = traj.state_vec(j, s);
            const Vec& w = traj.omega(s);
            for (int a = 1; a <= sys.m; ++a)
                for (int bfield = a + 1; bfield <= sys.m; ++bfield)
                    syn.commutativity_residual =
                        std::max(syn.commutativity_residual, norm_inf(lie_bracket(sys, a, bfield, x, w)));
        }
    if (syn.commutativity_residual > comm_tol)
        throw std::runtime_error("singular_control_vector: control fields do not commute (max ||[f_i,f_j]|| = " +
                                 std::to_string(syn.commutativity_residual) + ")");

    std::vector<Vec> xs, ps, omegas;
    for (int j = interval.first; j <= interval.last; ++j) {
        gather_node(traj, costate, j, xs, ps, omegas);
        VectorSingularValue v = vector_singular_value(sys, xs, ps, omegas, interval.singular,
                                                      interval.bang_min, interval.bang_max);
        syn.values.push_back(std::move(v.values));
        syn.cond.push_back(v.cond);
    }
    return syn;
}

std::vector<SingularSynthesis> synthesize_singular_controls(const TrajectoryBundle& traj,
                                                            const CostateBundle& costate,
                                                            const ControlAffineSystem& sys,
                                                            const ArcReport& report) {
    std::vector<SingularSynthesis> out;
    for (const ArcInterval& iv : report.intervals) {
        if (iv.singular.empty()) continue;
        SingularSynthesis syn;
        try {
            if (sys.m == 1) {
                std::vector<double> vals = singular_control_scalar(traj, costate, sys, iv);
                syn.interval = iv;
                for (double v : vals) syn.values.push_back({v});
                syn.cond.assign(vals.size(), 1.0);
            } else {
                syn = singular_control_vector(traj, costate, sys, iv, report);
            }
        } catch (const std::exception& e) {
            syn.interval = iv;
            syn.note = e.what();
            syn.values.assign(static_cast<size_t>(iv.last - iv.first + 1),
                              std::vector<double>(iv.singular.size(), kNan));
            syn.cond.assign(static_cast<size_t>(iv.last - iv.first + 1), kNan);
        }
        out.push_back(std::move(syn));
    }
    return out;
}

CertificateReport pmp_certificate(const TrajectoryBundle& traj, const CostateBundle& costate,
                                  const ControlGrid& control, const ControlAffineSystem& sys,
                                  double tol_psi, int min_arc_nodes) {
    const SwitchingData sw = switching_function(traj, costate, sys, tol_psi);
    const ArcReport rep = classify_arcs(sw, control, min_arc_nodes);
    const int nodes = traj.grid.nodes();
    const int N = traj.grid.steps;

    CertificateReport cert;

    // Hamiltonian gap: the box maximizer of an affine function picks the
    // bound selected by the sign of Psi; u(t_j) is the interval value (the
    // terminal node reuses the last interval's control).
    double gap_sum = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const int jc = std::min(j, N - 1);
        double gap = 0.0;
        for (int i = 0; i < sys.m; ++i) {
            const double psi = sw.at(j, i);
            const double best = std::max(psi * sys.u_min[static_cast<size_t>(i)],
                                         psi * sys.u_max[static_cast<size_t>(i)]);
            gap += best - psi * control.at(jc, i);
        }
        gap_sum += gap;
        cert.hamiltonian_gap_max = std::max(cert.hamiltonian_gap_max, gap);
    }
    cert.hamiltonian_gap_mean = gap_sum / nodes;

    double scale = 0.0;
    for (int i = 0; i < sys.m; ++i) {
        double maxabs = 0.0;
        for (int j = 0; j < nodes; ++j) maxabs = std::max(maxabs, std::abs(sw.at(j, i)));
        scale = std::max(scale, maxabs * (sys.u_max[static_cast<size_t>(i)] - sys.u_min[static_cast<size_t>(i)]));
    }
    cert.gap_scale = scale;

    // first-order adjoint residual ||p_{j+1} - p_j + dt (df/dx)^T p_j||
    const double dt = traj.grid.dt();
    double res_sum = 0.0;
    int res_count = 0;
    for (int s = 0; s < traj.k; ++s) {
        for (int j = 0; j < N; ++j) {
            const Mat A = dynamics_jacobian(sys, traj.state_vec(j, s), control.row(j), traj.omega(s));
            Vec r = sub(costate.state_vec(j + 1, s), costate.state_vec(j, s));
            axpy(dt, matTvec(A, costate.state_vec(j, s)), r);
            const double nr = norm2(r);
            res_sum += nr;
            ++res_count;
            cert.adjoint_residual_max = std::max(cert.adjoint_residual_max, nr);
        }
    }
    cert.adjoint_residual_mean = res_sum / res_count;

    // terminal condition -p(T,w) = grad g(x(T,w),w)
    for (int s = 0; s < traj.k; ++s) {
        Vec r = add(costate.state_vec(N, s), sys.terminal_cost_grad(traj.state_vec(N, s), traj.omega(s)));
        cert.terminal_residual_max = std::max(cert.terminal_residual_max, norm_inf(r));
    }

    // bang-side consistency on non-singular, non-switch nodes
    int mismatches = 0;
    for (int j = 0; j < nodes; ++j) {
        const int jc = std::min(j, N - 1);
        for (int i = 0; i < sys.m; ++i) {
            const NodeClass c = rep.at(j, i);
            if (c == NodeClass::Singular) { ++cert.singular_nodes; continue; }
            if (c == NodeClass::Switch) continue;
            ++cert.bang_nodes_checked;
            const double range = sys.u_max[static_cast<size_t>(i)] - sys.u_min[static_cast<size_t>(i)];
            const double u = control.at(jc, i);
            const double target =
                c == NodeClass::BangMax ? sys.u_max[static_cast<size_t>(i)] : sys.u_min[static_cast<size_t>(i)];
            if (std::abs(u - target) > 1e-9 * range) ++mismatches;
        }
    }
    cert.bang_mismatch_fraction = cert.bang_nodes_checked > 0
                                      ? static_cast<double>(mismatches) / cert.bang_nodes_checked
                                      : 0.0;
    return cert;
}

}  // namespace eoc
