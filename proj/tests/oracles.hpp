#pragma once

// Test-only oracles: independent implementations used to cross-check the
// library. Everything here is deliberately written from scratch (plain loops,
// no calls into the solver paths under test).

#include <cmath>
#include <cstdint>
#include <vector>

#include "rbcm/linalg.hpp"
#include "rbcm/rng.hpp"

namespace oracle {

using rbcm::Matrix;
using rbcm::Vector;

// ---------------------------------------------------------------------------
// deterministic test data
// ---------------------------------------------------------------------------

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.data().size(); ++i) m.data()[i] = rbcm::gaussian(seed, i);
    return m;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rbcm::gaussian(seed, i);
    return v;
}

inline Vector random_unit_vector(std::size_t n, std::uint64_t seed) {
    Vector v = random_vector(n, seed);
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    for (double& x : v) x /= s;
    return v;
}

// ---------------------------------------------------------------------------
// objectives
// ---------------------------------------------------------------------------

inline double lasso_objective(const Matrix& X, const Vector& y, const Vector& a, double lambda) {
    double fit = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < X.cols(); ++c) s += X(r, c) * a[c];
        const double d = y[r] - s;
        fit += d * d;
    }
    double l1 = 0.0;
    for (double v : a) l1 += std::abs(v);
    return fit + lambda * l1;
}

inline double least_squares_objective(const Matrix& X, const Vector& y, const Vector& a) {
    return lasso_objective(X, y, a, 0.0);
}

// ---------------------------------------------------------------------------
// cyclic coordinate descent for the lasso, run to a tight tolerance
// ---------------------------------------------------------------------------

inline Vector lasso_coordinate_descent(const Matrix& X, const Vector& y, double lambda,
                                       double tol = 1e-10, std::size_t max_sweeps = 200000) {
    const std::size_t n = X.cols();
    const std::size_t d = X.rows();
    Vector a(n, 0.0);
    Vector residual = y;  // y - X a
    std::vector<double> col_sq(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t r = 0; r < d; ++r) col_sq[j] += X(r, j) * X(r, j);

    double prev = lasso_objective(X, y, a, lambda);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        for (std::size_t j = 0; j < n; ++j) {
            if (col_sq[j] == 0.0) continue;
            double rho = 0.0;
            for (std::size_t r = 0; r < d; ++r) rho += X(r, j) * residual[r];
            rho += a[j] * col_sq[j];
            double next;
            if (rho > lambda / 2.0)
                next = (rho - lambda / 2.0) / col_sq[j];
            else if (rho < -lambda / 2.0)
                next = (rho + lambda / 2.0) / col_sq[j];
            else
                next = 0.0;
            const double change = next - a[j];
            if (change != 0.0) {
                for (std::size_t r = 0; r < d; ++r) residual[r] -= X(r, j) * change;
                a[j] = next;
            }
        }
        const double cur = lasso_objective(X, y, a, lambda);
        if (prev - cur < tol * (1.0 + std::abs(cur))) break;
        prev = cur;
    }
    return a;
}

// ---------------------------------------------------------------------------
// projected gradient for non-negative least squares
// ---------------------------------------------------------------------------

// Largest eigenvalue by a long, fixed power iteration (independent of the
// library's estimator).
inline double power_eig(const Matrix& A, std::size_t iters = 20000) {
    const std::size_t n = A.rows();
    Vector v(n, 1.0);
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Vector w(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) w[r] += A(r, c) * v[c];
        double nrm = 0.0;
        for (double x : w) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (double& x : w) x /= nrm;
        lambda = 0.0;
        Vector aw(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) aw[r] += A(r, c) * w[c];
        for (std::size_t r = 0; r < n; ++r) lambda += w[r] * aw[r];
        v = w;
    }
    return lambda;
}

inline Vector nnls_projected_gradient(const Matrix& X, const Vector& y,
                                      std::size_t iters = 100000) {
    const std::size_t n = X.cols();
    const std::size_t d = X.rows();
    Matrix G(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < d; ++r) s += X(r, i) * X(r, j);
            G(i, j) = s;
        }
    Vector xty(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t r = 0; r < d; ++r) xty[j] += X(r, j) * y[r];

    const double L = 2.0 * power_eig(G);
    const double step = 1.0 / L;
    Vector a(n, 0.0);
    for (std::size_t it = 0; it < iters; ++it) {
        Vector grad(n, 0.0);  // 2 (G a - X^T y)
        for (std::size_t i = 0; i < n; ++i) {
            double s = -xty[i];
            for (std::size_t j = 0; j < n; ++j) s += G(i, j) * a[j];
            grad[i] = 2.0 * s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            a[i] -= step * grad[i];
            if (a[i] < 0.0) a[i] = 0.0;
        }
    }
    return a;
}

// ---------------------------------------------------------------------------
// largest eigenvalue of a symmetric 3x3 via the characteristic cubic
// ---------------------------------------------------------------------------

inline double sym3_max_eigenvalue(const Matrix& A) {
    // Trigonometric solution of det(A - x I) = 0 for symmetric 3x3.
    const double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
    const double q = (A(0, 0) + A(1, 1) + A(2, 2)) / 3.0;
    if (p1 == 0.0) return std::max({A(0, 0), A(1, 1), A(2, 2)});
    const double p2 = (A(0, 0) - q) * (A(0, 0) - q) + (A(1, 1) - q) * (A(1, 1) - q) +
                      (A(2, 2) - q) * (A(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    // B = (A - q I) / p; r = det(B) / 2
    double B[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            B[i][j] = (A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                       (i == j ? q : 0.0)) /
                      p;
    const double detB = B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1]) -
                        B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0]) +
                        B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]);
    double r = detB / 2.0;
    r = std::min(1.0, std::max(-1.0, r));
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi);
}

// ---------------------------------------------------------------------------
// Gauss-Jordan inverse: an algebraic route independent of Cholesky
// ---------------------------------------------------------------------------

inline Matrix gauss_jordan_inverse(Matrix A) {
    const std::size_t n = A.rows();
    Matrix inv = rbcm::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(pivot, col))) pivot = r;
        if (pivot != col)
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(A(pivot, c), A(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        const double diag = A(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            A(col, c) /= diag;
            inv(col, c) /= diag;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = A(r, col);
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                A(r, c) -= factor * A(col, c);
                inv(r, c) -= factor * inv(col, c);
            }
        }
    }
    return inv;
}

// ---------------------------------------------------------------------------
// exact two-sided McNemar p-value via Pascal's triangle
// ---------------------------------------------------------------------------

inline double mcnemar_binomial_sum(std::size_t n01, std::size_t n10) {
    const std::size_t m = n01 + n10;
    if (m == 0) return 1.0;
    const std::size_t k = std::min(n01, n10);
    // Pascal's triangle row m (exact in unsigned arithmetic for desk-scale m).
    std::vector<unsigned long long> row(m + 1, 0);
    row[0] = 1;
    for (std::size_t i = 1; i <= m; ++i) {
        row[i] = 1;
        for (std::size_t j = i; j-- > 1;) row[j] += row[j - 1];
    }
    unsigned long long sum = 0;
    for (std::size_t j = 0; j <= k; ++j) sum += row[j];
    const double p = 2.0 * static_cast<double>(sum) * std::exp2(-static_cast<double>(m));
    return p < 1.0 ? p : 1.0;
}

}  // namespace oracle
