#pragma once

// Small dense vector/matrix helpers sized for the state/control dimensions
// of this library (n <= 4, m <= 2 in the built-in problems). Row-major.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eoc {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline void check_dim(size_t got, size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                    std::to_string(got) + ", expected " + std::to_string(want) + ")");
}

inline double dot(const Vec& x, const Vec& y) {
    check_dim(y.size(), x.size(), "dot");
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(const Vec& x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
}

inline Vec add(const Vec& x, const Vec& y) {
    check_dim(y.size(), x.size(), "add");
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

inline Vec sub(const Vec& x, const Vec& y) {
    check_dim(y.size(), x.size(), "sub");
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

inline Vec scale(double a, const Vec& x) {
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = a * x[i];
    return r;
}

// r += a*x
inline void axpy(double a, const Vec& x, Vec& r) {
    check_dim(r.size(), x.size(), "axpy");
    for (size_t i = 0; i < x.size(); ++i) r[i] += a * x[i];
}

inline Vec matvec(const Mat& A, const Vec& x) {
    check_dim(x.size(), static_cast<size_t>(A.cols), "matvec");
    Vec r(A.rows, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < A.cols; ++j) s += A(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

// A^T x without forming the transpose.
inline Vec matTvec(const Mat& A, const Vec& x) {
    check_dim(x.size(), static_cast<size_t>(A.rows), "matTvec");
    Vec r(A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) r[j] += A(i, j) * x[i];
    return r;
}

inline Mat matmul(const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    Mat C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

inline Mat mat_sub(const Mat& A, const Mat& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("mat_sub: shape mismatch");
    Mat C(A.rows, A.cols);
    for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] - B.a[i];
    return C;
}

inline double mat_norm1(const Mat& A) {
    double m = 0.0;
    for (int j = 0; j < A.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < A.rows; ++i) s += std::abs(A(i, j));
        m = std::max(m, s);
    }
    return m;
}

// LU factorization with partial pivoting, in place. Returns permutation sign
// and throws on exact singularity.
struct LuFactors {
    Mat lu;
    std::vector<int> piv;
};

inline LuFactors lu_factor(Mat A) {
    if (A.rows != A.cols) throw std::invalid_argument("lu_factor: square matrix required");
    const int n = A.rows;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int c = 0; c < n; ++c) {
        int p = c;
        double best = std::abs(A(c, c));
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A(r, c)) > best) { best = std::abs(A(r, c)); p = r; }
        if (best == 0.0) throw std::runtime_error("lu_factor: matrix is exactly singular");
        if (p != c) {
            for (int j = 0; j < n; ++j) std::swap(A(c, j), A(p, j));
            std::swap(piv[c], piv[p]);
        }
        for (int r = c + 1; r < n; ++r) {
            A(r, c) /= A(c, c);
            const double l = A(r, c);
            for (int j = c + 1; j < n; ++j) A(r, j) -= l * A(c, j);
        }
    }
    return {std::move(A), std::move(piv)};
}

inline Vec lu_solve(const LuFactors& f, const Vec& b) {
    const int n = f.lu.rows;
    check_dim(b.size(), static_cast<size_t>(n), "lu_solve");
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = b[f.piv[i]];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) y[i] -= f.lu(i, j) * y[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) y[i] -= f.lu(i, j) * y[j];
        y[i] /= f.lu(i, i);
    }
    return y;
}

// 1-norm condition number computed exactly via n solves; fine for tiny n.
inline double lu_cond1(const Mat& A, const LuFactors& f) {
    const int n = A.rows;
    double inv_norm = 0.0;
    for (int j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        Vec col = lu_solve(f, e);
        double s = 0.0;
        for (double v : col) s += std::abs(v);
        inv_norm = std::max(inv_norm, s);
    }
    return mat_norm1(A) * inv_norm;
}

}  // namespace eoc
