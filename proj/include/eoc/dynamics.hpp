#pragma once

// Control-affine systems f(x,u,w) = f_0(x,w) + sum_i f_i(x,w) u_i with
// analytic Jacobians, optional Hessians, terminal cost, and the Lie-bracket
// algebra ([f,g] = g'f - f'g) up to the nested brackets [f_i,[f_0,f_j]].

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eoc/linalg.hpp"

namespace eoc {

using Field = std::function<Vec(const Vec& x, const Vec& omega)>;
using FieldJac = std::function<Mat(const Vec& x, const Vec& omega)>;
// Hessian: H[a](b,c) = d^2 f_a / dx_b dx_c (n matrices of size n x n).
using FieldHess = std::function<std::vector<Mat>(const Vec& x, const Vec& omega)>;

struct ControlAffineSystem {
    int n = 0;  // state dimension
    int m = 0;  // control dimension

    std::vector<Field> f;        // size m+1, f[0] is the drift
    std::vector<FieldJac> jac;   // size m+1
    std::vector<FieldHess> hess; // size m+1; entries may be empty std::function

    std::function<double(const Vec&, const Vec&)> terminal_cost;    // g
    std::function<Vec(const Vec&, const Vec&)> terminal_cost_grad;  // grad_x g

    Vec u_min, u_max;  // componentwise box, u_min < u_max
    double t0 = 0.0;
    double tf = 1.0;

    // Optional admissible-domain predicate; integration aborts when violated.
    std::function<bool(const Vec& x)> state_ok;
    std::string domain_note;  // human-readable reason used in blow-up errors

    bool has_hessian(int i) const { return static_cast<bool>(hess[static_cast<size_t>(i)]); }
    void validate_shape() const;
};

// f_0(x,w) + sum_i f_i(x,w) u_i
Vec dynamics_eval(const ControlAffineSystem& sys, const Vec& x, const Vec& u, const Vec& omega);

// Jacobian of the combined field: J_0 + sum_i u_i J_i.
Mat dynamics_jacobian(const ControlAffineSystem& sys, const Vec& x, const Vec& u, const Vec& omega);

// [f,g](x,w) = Jg(x,w) f(x,w) - Jf(x,w) g(x,w)
Vec lie_bracket(const Field& f, const FieldJac& jf, const Field& g, const FieldJac& jg,
                const Vec& x, const Vec& omega);

// Bracket of two system fields by index.
Vec lie_bracket(const ControlAffineSystem& sys, int a, int b, const Vec& x, const Vec& omega);

// An evaluable bracket field carrying its provenance tag, e.g. "[f1,[f0,f1]]".
struct BracketField {
    std::string tag;
    Field eval;
};

BracketField make_bracket(const ControlAffineSystem& sys, int a, int b);
BracketField make_nested_bracket(const ControlAffineSystem& sys, int i, int j, bool allow_fd = true);

// [f_i,[f_0,f_j]](x,w). The inner bracket's Jacobian is assembled from
// Hessians when f_0 and f_j provide them, otherwise approximated by central
// differences of the inner bracket (step max(1,|x|) * eps^(1/3)); with
// allow_fd == false the fallback throws instead.
Vec nested_bracket(const ControlAffineSystem& sys, int i, int j, const Vec& x, const Vec& omega,
                   bool allow_fd = true);

// Central finite-difference helpers shared by validation and fallbacks.
double fd_step(const Vec& x);
Mat fd_jacobian(const Field& f, const Vec& x, const Vec& omega, int out_dim);

// Validation against finite differences; returns the worst relative error and
// (through `where`) the offending field index, used by the invariant suite.
struct JacobianCheck {
    bool pass = true;
    int worst_field = -1;
    double worst_rel_err = 0.0;
};
JacobianCheck validate_jacobians(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                                 const std::vector<Vec>& omegas, double rtol = 1e-5);
JacobianCheck validate_cost_gradient(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                                     const std::vector<Vec>& omegas, double rtol = 1e-5);

}  // namespace eoc
