#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rbcm/errors.hpp"

namespace rbcm {

using Vector = std::vector<double>;

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Dense row-major matrix of doubles. The checked factory `from_data` is the
// entry point for external data; internal arithmetic builds matrices directly.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_data(std::size_t rows, std::size_t cols, Vector data) {
        if (rows == 0 || cols == 0)
            throw DimensionMismatch("matrix dimensions must be positive");
        if (data.size() != rows * cols)
            throw DimensionMismatch("matrix data has " + std::to_string(data.size()) +
                                    " entries, expected " + std::to_string(rows * cols));
        if (!all_finite(data))
            throw DimensionMismatch("matrix data contains non-finite entries");
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(data);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    Vector column(std::size_t c) const {
        Vector out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
        return out;
    }

    void set_column(std::size_t c, const Vector& v) {
        for (std::size_t r = 0; r < rows_; ++r) data_[r * cols_ + c] = v[r];
    }

    // Columns [begin, end) as a new matrix.
    Matrix columns(std::size_t begin, std::size_t end) const {
        Matrix out(rows_, end - begin);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = (*this)(r, c);
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

inline Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm1(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double norm_inf(const Vector& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

// y = A x
inline Vector matvec(const Matrix& A, const Vector& x) {
    if (x.size() != A.cols()) throw DimensionMismatch("matvec: size mismatch");
    Vector y(A.rows());
    for (std::size_t r = 0; r < A.rows(); ++r) {
        const double* row = A.row_ptr(r);
        double s = 0.0;
        for (std::size_t c = 0; c < A.cols(); ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

// y = A^T x, accumulated row-wise so the row-major layout stays contiguous.
inline Vector matvec_t(const Matrix& A, const Vector& x) {
    if (x.size() != A.rows()) throw DimensionMismatch("matvec_t: size mismatch");
    Vector y(A.cols(), 0.0);
    for (std::size_t r = 0; r < A.rows(); ++r) {
        const double* row = A.row_ptr(r);
        const double xr = x[r];
        for (std::size_t c = 0; c < A.cols(); ++c) y[c] += row[c] * xr;
    }
    return y;
}

inline Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.rows()) throw DimensionMismatch("matmul: size mismatch");
    Matrix C(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        double* ci = C.row_ptr(i);
        for (std::size_t k = 0; k < A.cols(); ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            const double* bk = B.row_ptr(k);
            for (std::size_t j = 0; j < B.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

inline Matrix transpose(const Matrix& A) {
    Matrix T(A.cols(), A.rows());
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c) T(c, r) = A(r, c);
    return T;
}

// X^T X via rank-1 accumulation over rows; result is symmetric by construction
// up to rounding.
inline Matrix gram(const Matrix& X) {
    const std::size_t n = X.cols();
    Matrix G(n, n);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const double* row = X.row_ptr(r);
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = row[j];
            if (xj == 0.0) continue;
            double* gj = G.row_ptr(j);
            for (std::size_t k = 0; k < n; ++k) gj[k] += xj * row[k];
        }
    }
    return G;
}

namespace detail {

inline double max_abs(const Matrix& A) {
    double m = 0.0;
    for (double x : A.data()) m = std::max(m, std::abs(x));
    return m;
}

inline void require_symmetric(const Matrix& A, double rel_tol) {
    if (A.rows() != A.cols()) throw DimensionMismatch("SPD solve needs a square matrix");
    const double scale = max_abs(A);
    const double tol = rel_tol * std::max(1.0, scale);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = i + 1; j < A.cols(); ++j)
            if (std::abs(A(i, j) - A(j, i)) > tol)
                throw DimensionMismatch("matrix is not symmetric within tolerance at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
}

}  // namespace detail

// Lower-triangular Cholesky factorization of a symmetric positive-definite
// matrix. The input is symmetrized (A <- (A + A^T)/2) first; floating-point
// products like X^T X are only symmetric to rounding.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const Matrix& A, double symmetry_tol = 1e-10) {
        detail::require_symmetric(A, symmetry_tol);
        n_ = A.rows();
        L_ = Matrix(n_, n_);
        min_pivot_ = std::numeric_limits<double>::infinity();
        max_pivot_ = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = 0.5 * (A(i, j) + A(j, i));
                const double* li = L_.row_ptr(i);
                const double* lj = L_.row_ptr(j);
                for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
                if (i == j) {
                    if (s <= 0.0) throw FactorizationFailure(i, s);
                    min_pivot_ = std::min(min_pivot_, s);
                    max_pivot_ = std::max(max_pivot_, s);
                    L_(i, i) = std::sqrt(s);
                } else {
                    L_(i, j) = s / L_(j, j);
                }
            }
        }
    }

    std::size_t size() const { return n_; }

    // Ratio of extreme pivots (diagonal of L squared); a cheap condition
    // estimate for the factored matrix.
    double pivot_ratio() const { return max_pivot_ / min_pivot_; }

    Vector solve(Vector b) const {
        if (b.size() != n_) throw DimensionMismatch("Cholesky solve: size mismatch");
        // L y = b
        for (std::size_t i = 0; i < n_; ++i) {
            const double* li = L_.row_ptr(i);
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= li[k] * b[k];
            b[i] = s / li[i];
        }
        // L^T x = y
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = b[ii];
            for (std::size_t k = ii + 1; k < n_; ++k) s -= L_(k, ii) * b[k];
            b[ii] = s / L_(ii, ii);
        }
        return b;
    }

    Matrix solve(const Matrix& B) const {
        if (B.rows() != n_) throw DimensionMismatch("Cholesky solve: size mismatch");
        Matrix X(n_, B.cols());
        for (std::size_t c = 0; c < B.cols(); ++c) X.set_column(c, solve(B.column(c)));
        return X;
    }

private:
    std::size_t n_ = 0;
    Matrix L_;
    double min_pivot_ = 0.0;
    double max_pivot_ = 0.0;
};

// Solve A X = B for symmetric positive-definite A.
inline Matrix solve_spd(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows()) throw DimensionMismatch("solve_spd: size mismatch");
    return CholeskyFactor(A).solve(B);
}

inline Vector solve_spd(const Matrix& A, const Vector& b) {
    return CholeskyFactor(A).solve(b);
}

// Dominant eigenvalue of a symmetric PSD matrix by power iteration. The start
// vector is all-ones (normalized) so step sizes are reproducible across runs.
// Stops on the Rayleigh residual ||A v - lambda v||, which bounds the distance
// to the nearest eigenvalue.
inline double max_eigenvalue(const Matrix& A, std::size_t max_iter = 5000, double tol = 1e-6) {
    detail::require_symmetric(A, 1e-10);
    const std::size_t n = A.rows();
    Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        Vector w = matvec(A, v);
        lambda = dot(v, w);
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = w[i] - lambda * v[i];
            resid += r * r;
        }
        if (std::sqrt(resid) <= tol * std::max(1.0, std::abs(lambda))) return lambda;
        const double wn = norm2(w);
        if (wn < 1e-300) return 0.0;  // A v = 0: zero matrix on the current subspace
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    }
    throw NonConvergence("power iteration did not converge in " + std::to_string(max_iter) +
                             " iterations",
                         Vector{lambda}, max_iter);
}

// Rescale every column to unit l2 norm. Directions are preserved.
inline Matrix normalize_columns(const Matrix& X, double min_norm = 1e-12) {
    Matrix out = X;
    for (std::size_t c = 0; c < X.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < X.rows(); ++r) s += X(r, c) * X(r, c);
        const double nrm = std::sqrt(s);
        if (nrm < min_norm) throw ZeroColumn(c);
        for (std::size_t r = 0; r < X.rows(); ++r) out(r, c) /= nrm;
    }
    return out;
}

// sign(v) * max(|v| - t, 0), the proximal operator of t*|.|
inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

inline Vector soft_threshold(Vector v, double t) {
    for (double& x : v) x = soft_threshold(x, t);
    return v;
}

}  // namespace rbcm
