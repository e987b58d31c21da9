#pragma once

// Minimal dense linear algebra for the small systems that appear in the
// DQ test and quantile regression (dimension <= ~15).

#include <cmath>
#include <cstddef>
#include <vector>

namespace tailrisk::math {

// Row-major square matrix helper.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;
    explicit Matrix(std::size_t n_) : n(n_), a(n_ * n_, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Solve A x = b by Gaussian elimination with partial pivoting.
// Returns false if A is numerically singular.
inline bool solve(Matrix A, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = A.n;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(A(r, col)) > std::fabs(A(piv, col))) piv = r;
        if (std::fabs(A(piv, col)) < 1e-12) return false;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double m = A(r, col) / A(col, col);
            if (m == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) A(r, j) -= m * A(col, j);
            b[r] -= m * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return true;
}

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// A = V diag(eig) V'. Used for the pseudo-inverse fallback.
inline void jacobi_eigen(const Matrix& A, std::vector<double>& eig, Matrix& V) {
    const std::size_t n = A.n;
    Matrix S = A;
    V = Matrix(n);
    for (std::size_t i = 0; i < n; ++i) V(i, i) = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += S(i, j) * S(i, j);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(S(p, q)) < 1e-300) continue;
                double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
                double t = std::copysign(1.0, theta) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    eig.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eig[i] = S(i, i);
}

// x = pinv(A) b for symmetric A, dropping eigenvalues below tol * max|eig|.
inline std::vector<double> pinv_solve_sym(const Matrix& A, const std::vector<double>& b,
                                          double tol = 1e-10) {
    std::vector<double> eig;
    Matrix V(A.n);
    jacobi_eigen(A, eig, V);
    double emax = 0.0;
    for (double e : eig) emax = std::max(emax, std::fabs(e));
    const std::size_t n = A.n;
    std::vector<double> vtb(n, 0.0), x(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) vtb[j] += V(i, j) * b[i];
    for (std::size_t j = 0; j < n; ++j)
        if (std::fabs(eig[j]) > tol * emax && emax > 0.0) vtb[j] /= eig[j];
        else vtb[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) x[i] += V(i, j) * vtb[j];
    return x;
}

}  // namespace tailrisk::math
