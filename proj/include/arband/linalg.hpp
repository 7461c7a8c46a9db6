#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "arband/errors.hpp"

namespace arband {

// Small dense row-major matrix. Sized for AR work (dimensions up to ~100),
// so no blocking or pivot finesse beyond what correctness needs.
struct matrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> a;

    matrix() = default;
    matrix(int rows, int cols) : n_rows(rows), n_cols(cols), a(static_cast<std::size_t>(rows) * cols, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n_cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n_cols + j]; }

    static matrix identity(int n) {
        matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline matrix mat_mul(const matrix& x, const matrix& y) {
    if (x.n_cols != y.n_rows) throw dimension_mismatch("mat_mul: inner dimensions differ");
    matrix z(x.n_rows, y.n_cols);
    for (int i = 0; i < x.n_rows; ++i)
        for (int k = 0; k < x.n_cols; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (int j = 0; j < y.n_cols; ++j) z(i, j) += xik * y(k, j);
        }
    return z;
}

// Cholesky factor L (lower) of a symmetric matrix. A pivot at or below
// pivot_floor means the matrix is not positive definite to working
// precision; no regularization is applied.
inline matrix cholesky_factor(const matrix& s, double pivot_floor) {
    if (s.n_rows != s.n_cols) throw dimension_mismatch("cholesky_factor: matrix not square");
    const int n = s.n_rows;
    matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = s(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > pivot_floor))
            throw not_positive_definite("cholesky_factor: pivot " + std::to_string(d) +
                                        " at column " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / ljj;
        }
    }
    return l;
}

// Solves L L^T x = b given the Cholesky factor.
inline std::vector<double> cholesky_solve(const matrix& l, std::vector<double> b) {
    const int n = l.n_rows;
    if (static_cast<int>(b.size()) != n) throw dimension_mismatch("cholesky_solve: rhs size");
    for (int i = 0; i < n; ++i) {
        double v = b[i];
        for (int k = 0; k < i; ++k) v -= l(i, k) * b[k];
        b[i] = v / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = b[i];
        for (int k = i + 1; k < n; ++k) v -= l(k, i) * b[k];
        b[i] = v / l(i, i);
    }
    return b;
}

// Inverse of a lower-triangular factor.
inline matrix lower_inverse(const matrix& l) {
    const int n = l.n_rows;
    matrix w(n, n);
    for (int j = 0; j < n; ++j) {
        w(j, j) = 1.0 / l(j, j);
        for (int i = j + 1; i < n; ++i) {
            double v = 0.0;
            for (int k = j; k < i; ++k) v += l(i, k) * w(k, j);
            w(i, j) = -v / l(i, i);
        }
    }
    return w;
}

// Full inverse from the Cholesky factor: inv = W^T W with W = L^{-1}.
inline matrix cholesky_inverse(const matrix& l) {
    const matrix w = lower_inverse(l);
    const int n = l.n_rows;
    matrix inv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = 0.0;
            for (int k = j; k < n; ++k) v += w(k, i) * w(k, j);
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

// Gaussian elimination with partial pivoting for small unsymmetric systems.
inline std::vector<double> gauss_solve(matrix m, std::vector<double> b) {
    const int n = m.n_rows;
    if (m.n_cols != n || static_cast<int>(b.size()) != n)
        throw dimension_mismatch("gauss_solve: shape mismatch");
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
        if (std::fabs(m(piv, col)) < 1e-300)
            throw numerical_error("gauss_solve: singular system");
        if (piv != col) {
            for (int c = col; c < n; ++c) std::swap(m(piv, c), m(col, c));
            std::swap(b[piv], b[col]);
        }
        const double inv_p = 1.0 / m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) * inv_p;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) m(r, c) -= f * m(col, c);
            b[r] -= f * b[col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = b[i];
        for (int k = i + 1; k < n; ++k) v -= m(i, k) * b[k];
        b[i] = v / m(i, i);
    }
    return b;
}

}  // namespace arband
