#include "eoc/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eoc {

void ControlAffineSystem::validate_shape() const {
    if (n < 1 || m < 1) throw std::invalid_argument("system: n and m must be >= 1");
    if (f.size() != static_cast<size_t>(m + 1) || jac.size() != static_cast<size_t>(m + 1) ||
        hess.size() != static_cast<size_t>(m + 1))
        throw std::invalid_argument("system: need m+1 fields, Jacobians and Hessian slots");
    if (u_min.size() != static_cast<size_t>(m) || u_max.size() != static_cast<size_t>(m))
        throw std::invalid_argument("system: control bounds must have length m");
    for (int i = 0; i < m; ++i)
        if (!(u_min[i] < u_max[i])) throw std::invalid_argument("system: u_min must be < u_max componentwise");
    if (!(tf > t0)) throw std::invalid_argument("system: horizon requires tf > t0");
}

Vec dynamics_eval(const ControlAffineSystem& sys, const Vec& x, const Vec& u, const Vec& omega) {
    check_dim(x.size(), static_cast<size_t>(sys.n), "dynamics_eval state");
    check_dim(u.size(), static_cast<size_t>(sys.m), "dynamics_eval control");
    Vec r = sys.f[0](x, omega);
    check_dim(r.size(), static_cast<size_t>(sys.n), "dynamics_eval f0 output");
    for (int i = 1; i <= sys.m; ++i) {
        Vec fi = sys.f[static_cast<size_t>(i)](x, omega);
        check_dim(fi.size(), static_cast<size_t>(sys.n), "dynamics_eval field output");
        axpy(u[static_cast<size_t>(i - 1)], fi, r);
    }
    return r;
}

Mat dynamics_jacobian(const ControlAffineSystem& sys, const Vec& x, const Vec& u, const Vec& omega) {
    Mat A = sys.jac[0](x, omega);
    for (int i = 1; i <= sys.m; ++i) {
        const double ui = u[static_cast<size_t>(i - 1)];
        if (ui == 0.0) continue;
        Mat Ji = sys.jac[static_cast<size_t>(i)](x, omega);
        for (size_t q = 0; q < A.a.size(); ++q) A.a[q] += ui * Ji.a[q];
    }
    return A;
}

Vec lie_bracket(const Field& f, const FieldJac& jf, const Field& g, const FieldJac& jg,
                const Vec& x, const Vec& omega) {
    const Vec fv = f(x, omega);
    const Vec gv = g(x, omega);
    check_dim(gv.size(), fv.size(), "lie_bracket");
    const Mat Jf = jf(x, omega);
    const Mat Jg = jg(x, omega);
    return sub(matvec(Jg, fv), matvec(Jf, gv));
}

Vec lie_bracket(const ControlAffineSystem& sys, int a, int b, const Vec& x, const Vec& omega) {
    return lie_bracket(sys.f[static_cast<size_t>(a)], sys.jac[static_cast<size_t>(a)],
                       sys.f[static_cast<size_t>(b)], sys.jac[static_cast<size_t>(b)], x, omega);
}

BracketField make_bracket(const ControlAffineSystem& sys, int a, int b) {
    BracketField bf;
    bf.tag = "[f" + std::to_string(a) + ",f" + std::to_string(b) + "]";
    bf.eval = [&sys, a, b](const Vec& x, const Vec& omega) { return lie_bracket(sys, a, b, x, omega); };
    return bf;
}

BracketField make_nested_bracket(const ControlAffineSystem& sys, int i, int j, bool allow_fd) {
    BracketField bf;
    bf.tag = "[f" + std::to_string(i) + ",[f0,f" + std::to_string(j) + "]]";
    bf.eval = [&sys, i, j, allow_fd](const Vec& x, const Vec& omega) {
        return nested_bracket(sys, i, j, x, omega, allow_fd);
    };
    return bf;
}

double fd_step(const Vec& x) {
    double nx = norm_inf(x);
    return std::max(1.0, nx) * std::cbrt(std::numeric_limits<double>::epsilon());
}

Mat fd_jacobian(const Field& f, const Vec& x, const Vec& omega, int out_dim) {
    const int n = static_cast<int>(x.size());
    const double h = fd_step(x);
    Mat J(out_dim, n);
    Vec xp = x, xm = x;
    for (int b = 0; b < n; ++b) {
        xp[b] = x[b] + h;
        xm[b] = x[b] - h;
        const Vec fp = f(xp, omega);
        const Vec fm = f(xm, omega);
        for (int a = 0; a < out_dim; ++a) J(a, b) = (fp[a] - fm[a]) / (2.0 * h);
        xp[b] = x[b];
        xm[b] = x[b];
    }
    return J;
}

namespace {

// Jacobian of h = [f_0, f_j] from Hessians:
//   dh_a/dx_b = sum_c Hj[a](b,c) f0_c + (Jj J0 - J0 Jj)_ab - sum_c H0[a](b,c) fj_c
Mat inner_bracket_jacobian_analytic(const ControlAffineSystem& sys, int j, const Vec& x, const Vec& omega) {
    const int n = sys.n;
    const Vec f0 = sys.f[0](x, omega);
    const Vec fj = sys.f[static_cast<size_t>(j)](x, omega);
    const Mat J0 = sys.jac[0](x, omega);
    const Mat Jj = sys.jac[static_cast<size_t>(j)](x, omega);
    const std::vector<Mat> H0 = sys.hess[0](x, omega);
    const std::vector<Mat> Hj = sys.hess[static_cast<size_t>(j)](x, omega);

    Mat Jh = mat_sub(matmul(Jj, J0), matmul(J0, Jj));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int c = 0; c < n; ++c) s += Hj[static_cast<size_t>(a)](b, c) * f0[static_cast<size_t>(c)] -
                                             H0[static_cast<size_t>(a)](b, c) * fj[static_cast<size_t>(c)];
            Jh(a, b) += s;
        }
    return Jh;
}

}  // namespace

Vec nested_bracket(const ControlAffineSystem& sys, int i, int j, const Vec& x, const Vec& omega,
                   bool allow_fd) {
    if (i < 0 || i > sys.m || j < 0 || j > sys.m)
        throw std::invalid_argument("nested_bracket: field index out of range");

    // inner bracket h = [f_0, f_j]
    const Vec h = lie_bracket(sys, 0, j, x, omega);

    Mat Jh;
    if (sys.has_hessian(0) && sys.has_hessian(j)) {
        Jh = inner_bracket_jacobian_analytic(sys, j, x, omega);
    } else if (allow_fd) {
        Field inner = [&sys, j](const Vec& xx, const Vec& ww) { return lie_bracket(sys, 0, j, xx, ww); };
        Jh = fd_jacobian(inner, x, omega, sys.n);
    } else {
        throw std::runtime_error("nested_bracket: Hessian unavailable for f0 or f" + std::to_string(j) +
                                 " and finite-difference fallback is disabled");
    }

    const Vec fi = sys.f[static_cast<size_t>(i)](x, omega);
    const Mat Ji = sys.jac[static_cast<size_t>(i)](x, omega);
    return sub(matvec(Jh, fi), matvec(Ji, h));
}

namespace {

double rel_err(const Mat& got, const Mat& want) {
    double num = 0.0, den = 0.0;
    for (size_t q = 0; q < got.a.size(); ++q) {
        num = std::max(num, std::abs(got.a[q] - want.a[q]));
        den = std::max(den, std::abs(want.a[q]));
    }
    return num / std::max(den, 1.0);
}

}  // namespace

JacobianCheck validate_jacobians(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                                 const std::vector<Vec>& omegas, double rtol) {
    JacobianCheck r;
    for (int i = 0; i <= sys.m; ++i) {
        for (size_t p = 0; p < xs.size(); ++p) {
            Mat J = sys.jac[static_cast<size_t>(i)](xs[p], omegas[p]);
            Mat Jfd = fd_jacobian(sys.f[static_cast<size_t>(i)], xs[p], omegas[p], sys.n);
            const double e = rel_err(J, Jfd);
            if (e > r.worst_rel_err) {
                r.worst_rel_err = e;
                r.worst_field = i;
            }
        }
    }
    r.pass = r.worst_rel_err <= rtol;
    return r;
}

JacobianCheck validate_cost_gradient(const ControlAffineSystem& sys, const std::vector<Vec>& xs,
                                     const std::vector<Vec>& omegas, double rtol) {
    JacobianCheck r;
    for (size_t p = 0; p < xs.size(); ++p) {
        const Vec g = sys.terminal_cost_grad(xs[p], omegas[p]);
        const double h = fd_step(xs[p]);
        Vec xp = xs[p], xm = xs[p];
        double num = 0.0, den = 0.0;
        for (int b = 0; b < sys.n; ++b) {
            xp[b] += h;
            xm[b] -= h;
            const double fd = (sys.terminal_cost(xp, omegas[p]) - sys.terminal_cost(xm, omegas[p])) / (2.0 * h);
            num = std::max(num, std::abs(g[static_cast<size_t>(b)] - fd));
            den = std::max(den, std::abs(fd));
            xp[b] = xs[p][b];
            xm[b] = xs[p][b];
        }
        const double e = num / std::max(den, 1.0);
        if (e > r.worst_rel_err) {
            r.worst_rel_err = e;
            r.worst_field = 0;
        }
    }
    r.pass = r.worst_rel_err <= rtol;
    return r;
}

}  // namespace eoc
