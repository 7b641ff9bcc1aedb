#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rbcm/dictionary.hpp"
#include "rbcm/errors.hpp"
#include "rbcm/linalg.hpp"

namespace rbcm {

struct SolverOptions {
    std::size_t max_iter = 1000;
    double tol = 1e-8;

    // ALM schedule (Algorithm 2 of the CCRC-l1 formulation).
    double mu0 = 0.5;
    double mu_max = 1e6;
    double rho = 1.1;
    double eps = 1e-3;

    static SolverOptions alm_defaults() {
        SolverOptions o;
        o.max_iter = 2000;
        return o;
    }

    void validate() const {
        if (max_iter == 0) throw DimensionMismatch("SolverOptions: max_iter must be positive");
        if (!(tol > 0)) throw DimensionMismatch("SolverOptions: tol must be positive");
        if (!(rho > 1)) throw DimensionMismatch("SolverOptions: rho must exceed 1");
        if (!(mu0 > 0) || !(mu0 < mu_max))
            throw DimensionMismatch("SolverOptions: need 0 < mu0 < mu_max");
    }
};

// Per-solve diagnostics, filled when a caller passes a trace pointer.
struct SolveTrace {
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objectives;  // FISTA: objective after every iteration (index 0 = start)
    double final_gap = 0.0;          // ALM: ||beta - z||_inf at exit
};

// Precomputed coefficient map P with coefficients = P y.
struct LinearOperator {
    Matrix P;  // n x d

    Vector apply(const Vector& y) const { return matvec(P, y); }
};

namespace detail {

inline bool degenerate_rhs(const Vector& y) { return norm2(y) < 1e-12; }

inline void warn_if_not_unit(const Vector& y, const char* who) {
    const double nrm = norm2(y);
    if (nrm >= 1e-12 && std::abs(nrm - 1.0) > 1e-6)
        warn(std::string(who) + ": test vector norm is " + std::to_string(nrm) +
             ", expected unit norm");
}

inline double lasso_objective(const Matrix& X, const Vector& y, const Vector& a, double lambda) {
    Vector r = matvec(X, a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    return dot(r, r) + lambda * norm1(a);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// l1: min ||y - X a||_2^2 + lambda ||a||_1 by FISTA with constant step 1/L,
// L = lambda_max(2 X^T X), and momentum restart whenever the objective would
// increase. The restart makes the objective sequence non-increasing.
// ---------------------------------------------------------------------------
inline Vector fista_l1(const Matrix& X, const Vector& y, double lambda,
                       const SolverOptions& opts = SolverOptions{}, SolveTrace* trace = nullptr,
                       double lipschitz = 0.0) {
    opts.validate();
    if (!(lambda > 0)) throw DimensionMismatch("fista_l1: lambda must be positive");
    if (y.size() != X.rows()) throw DimensionMismatch("fista_l1: rhs length mismatch");
    detail::warn_if_not_unit(y, "fista_l1");

    const std::size_t n = X.cols();
    if (detail::degenerate_rhs(y)) {
        if (trace) *trace = SolveTrace{0, true, {}, 0.0};
        return Vector(n, 0.0);
    }

    double L = lipschitz;
    if (L <= 0.0) {
        Matrix G2 = gram(X);
        for (double& g : G2.data()) g *= 2.0;
        L = max_eigenvalue(G2);
    }
    // Inflate slightly: the power-iteration estimate can undershoot by its
    // tolerance, and the descent guarantee needs step <= 1/L.
    L *= 1.0 + 1e-5;
    const double step = 1.0 / L;
    const double thresh = lambda / L;

    Vector a(n, 0.0);
    Vector w = a;
    double t = 1.0;
    double f_prev = detail::lasso_objective(X, y, a, lambda);
    if (trace) {
        *trace = SolveTrace{};
        trace->objectives.push_back(f_prev);
    }

    auto prox_step = [&](const Vector& point) {
        Vector r = matvec(X, point);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
        Vector g = matvec_t(X, r);  // gradient / 2
        Vector out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = soft_threshold(point[i] - 2.0 * step * g[i], thresh);
        return out;
    };

    for (std::size_t k = 1; k <= opts.max_iter; ++k) {
        Vector a_next = prox_step(w);
        double f_next = detail::lasso_objective(X, y, a_next, lambda);
        if (f_next > f_prev) {
            // Restart momentum at the last accepted iterate.
            t = 1.0;
            a_next = prox_step(a);
            f_next = detail::lasso_objective(X, y, a_next, lambda);
            if (f_next > f_prev) {  // rounding edge: keep the old iterate
                a_next = a;
                f_next = f_prev;
            }
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < n; ++i)
            w[i] = a_next[i] + ((t - 1.0) / t_next) * (a_next[i] - a[i]);
        const double decrease = f_prev - f_next;
        a = std::move(a_next);
        t = t_next;
        f_prev = f_next;
        if (trace) {
            trace->iterations = k;
            trace->objectives.push_back(f_next);
        }
        if (decrease <= opts.tol * (1.0 + std::abs(f_next))) {
            if (trace) trace->converged = true;
            return a;
        }
    }
    throw NonConvergence("fista_l1 hit the iteration limit (" + std::to_string(opts.max_iter) + ")",
                         a, opts.max_iter);
}

inline Vector fista_l1(const PartitionedDictionary& D, const Vector& y, double lambda,
                       const SolverOptions& opts = SolverOptions{}, SolveTrace* trace = nullptr,
                       double lipschitz = 0.0) {
    return fista_l1(D.atoms(), y, lambda, opts, trace, lipschitz);
}

// ---------------------------------------------------------------------------
// Ridge / CRC closed form: P = (X^T X + lambda I)^(-1) X^T.
// ---------------------------------------------------------------------------
inline LinearOperator ridge_operator(const Matrix& X, double lambda) {
    if (!(lambda > 0)) throw DimensionMismatch("ridge_operator: lambda must be positive");
    Matrix A = gram(X);
    for (std::size_t i = 0; i < A.rows(); ++i) A(i, i) += lambda;
    return LinearOperator{solve_spd(A, transpose(X))};
}

inline LinearOperator ridge_operator(const PartitionedDictionary& D, double lambda) {
    return ridge_operator(D.atoms(), lambda);
}

// ---------------------------------------------------------------------------
// CCRC closed form: P = (1 + lambda2) (X^T X + lambda1 I + lambda2 M)^(-1) X^T
// with M the block-diagonal matrix of class Grams.
// ---------------------------------------------------------------------------
inline LinearOperator ccrc_operator(const PartitionedDictionary& D, double lambda1,
                                    double lambda2) {
    if (!(lambda1 > 0)) throw DimensionMismatch("ccrc_operator: lambda1 must be positive");
    if (lambda2 < 0) throw DimensionMismatch("ccrc_operator: lambda2 must be non-negative");
    Matrix A = gram(D.atoms());
    if (lambda2 != 0.0) {
        const Matrix M = D.competition_matrix();
        for (std::size_t i = 0; i < A.data().size(); ++i) A.data()[i] += lambda2 * M.data()[i];
    }
    for (std::size_t i = 0; i < A.rows(); ++i) A(i, i) += lambda1;
    Matrix P = solve_spd(A, transpose(D.atoms()));
    for (double& p : P.data()) p *= 1.0 + lambda2;
    return LinearOperator{std::move(P)};
}

// ---------------------------------------------------------------------------
// CCRC with an l1 penalty on the coefficients, solved by ALM:
//   beta-step: [X^T X + lambda2 M + (mu/2) I] beta = (1+lambda2) X^T y + (mu z - theta)/2
//   z-step:    z = soft_threshold(beta + theta/mu, lambda1/mu)
//   theta += mu (beta - z);  mu = min(rho mu, mu_max);  stop when ||beta-z||_inf < eps.
// The stopping gap compares the fresh beta against the z it was solved with
// (once the multiplier stabilizes, the post-update pair agrees by
// construction and would stop the iteration at suboptimal points) and also
// requires the returned pair to satisfy the bound.
// Returns z, the iterate the l1 penalty acts on; it is exactly sparse.
// ---------------------------------------------------------------------------
inline Vector alm_ccrc_l1_core(const Matrix& X, const Matrix& gram_plus_competition,
                               const Vector& y, double lambda1, double lambda2,
                               const SolverOptions& opts, SolveTrace* trace = nullptr) {
    opts.validate();
    if (!(lambda1 > 0)) throw DimensionMismatch("alm_ccrc_l1: lambda1 must be positive");
    if (lambda2 < 0) throw DimensionMismatch("alm_ccrc_l1: lambda2 must be non-negative");
    if (y.size() != X.rows()) throw DimensionMismatch("alm_ccrc_l1: rhs length mismatch");
    detail::warn_if_not_unit(y, "alm_ccrc_l1");

    const std::size_t n = X.cols();
    if (detail::degenerate_rhs(y)) {
        if (trace) *trace = SolveTrace{0, true, {}, 0.0};
        return Vector(n, 0.0);
    }

    Vector rhs_base = matvec_t(X, y);
    for (double& v : rhs_base) v *= 1.0 + lambda2;

    Vector z(n, 0.0), theta(n, 0.0), beta(n, 0.0);
    double mu = opts.mu0;

    std::optional<CholeskyFactor> factor;
    double factored_mu = -1.0;

    for (std::size_t k = 1; k <= opts.max_iter; ++k) {
        if (mu != factored_mu) {
            Matrix A = gram_plus_competition;
            for (std::size_t i = 0; i < n; ++i) A(i, i) += 0.5 * mu;
            factor.emplace(A);
            factored_mu = mu;
        }
        Vector rhs = rhs_base;
        for (std::size_t i = 0; i < n; ++i) rhs[i] += 0.5 * (mu * z[i] - theta[i]);
        beta = factor->solve(std::move(rhs));

        double gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(beta[i] - z[i]));

        const double thresh = lambda1 / mu;
        double post_gap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = soft_threshold(beta[i] + theta[i] / mu, thresh);
            const double d = beta[i] - z[i];
            theta[i] += mu * d;
            post_gap = std::max(post_gap, std::abs(d));
        }
        mu = std::min(opts.rho * mu, opts.mu_max);

        if (trace) {
            trace->iterations = k;
            trace->final_gap = post_gap;
        }
        if (gap < opts.eps && post_gap < opts.eps) {
            if (trace) trace->converged = true;
            return z;
        }
    }
    throw NonConvergence("alm_ccrc_l1 hit the iteration limit (" + std::to_string(opts.max_iter) + ")",
                         z, opts.max_iter);
}

inline Vector alm_ccrc_l1(const PartitionedDictionary& D, const Vector& y, double lambda1,
                          double lambda2, const SolverOptions& opts = SolverOptions::alm_defaults(),
                          SolveTrace* trace = nullptr) {
    Matrix base = gram(D.atoms());
    if (lambda2 != 0.0) {
        const Matrix M = D.competition_matrix();
        for (std::size_t i = 0; i < base.data().size(); ++i)
            base.data()[i] += lambda2 * M.data()[i];
    }
    return alm_ccrc_l1_core(D.atoms(), base, y, lambda1, lambda2, opts, trace);
}

// ---------------------------------------------------------------------------
// Non-negative least squares, Lawson-Hanson active set. The core works on the
// normal-equation data (G = X^T X, X^T y) so a shared Gram matrix can be
// reused across many right-hand sides.
// ---------------------------------------------------------------------------
inline Vector nnls_core(const Matrix& G, const Vector& Xty, std::size_t max_outer = 0,
                        double tol = 1e-10) {
    const std::size_t n = G.cols();
    if (Xty.size() != n) throw DimensionMismatch("nnls: normal-equation size mismatch");
    if (max_outer == 0) max_outer = 10 * n + 30;

    Vector x(n, 0.0);
    std::vector<bool> passive(n, false);
    std::vector<std::size_t> active_order;  // passive indices, insertion order

    auto gradient_half = [&](const Vector& v) {
        // w = X^T y - G v, the negative half-gradient of ||y - X v||^2
        Vector w = Xty;
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] == 0.0) continue;
            const double* gi = G.row_ptr(i);
            const double vi = v[i];
            for (std::size_t j = 0; j < n; ++j) w[j] -= gi[j] * vi;
        }
        return w;
    };

    // Least squares restricted to the passive set, via normal equations.
    auto passive_ls = [&]() {
        const std::size_t m = active_order.size();
        Matrix Gp(m, m);
        Vector bp(m);
        for (std::size_t a = 0; a < m; ++a) {
            bp[a] = Xty[active_order[a]];
            for (std::size_t b = 0; b < m; ++b) Gp(a, b) = G(active_order[a], active_order[b]);
        }
        return CholeskyFactor(Gp).solve(bp);
    };

    std::size_t steps = 0;
    const std::size_t budget = 20 * max_outer + 200;
    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        const Vector w = gradient_half(x);
        std::size_t best = n;
        double best_w = tol;
        for (std::size_t i = 0; i < n; ++i) {
            if (!passive[i] && w[i] > best_w) {
                best_w = w[i];
                best = i;
            }
        }
        if (best == n) return x;  // KKT satisfied
        passive[best] = true;
        active_order.push_back(best);

        while (true) {
            if (++steps > budget)
                throw NonConvergence("nnls exceeded its iteration budget", x, steps);
            Vector zp;
            try {
                zp = passive_ls();
            } catch (const FactorizationFailure&) {
                throw NonConvergence("nnls: passive-set Gram matrix is singular", x, steps);
            }
            bool feasible = true;
            for (double v : zp)
                if (v <= tol) {
                    feasible = false;
                    break;
                }
            if (feasible) {
                for (double& v : x) v = 0.0;
                for (std::size_t a = 0; a < active_order.size(); ++a) x[active_order[a]] = zp[a];
                break;
            }
            // Back off along x -> z until the first passive coordinate hits zero.
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < active_order.size(); ++a) {
                if (zp[a] <= tol) {
                    const double xi = x[active_order[a]];
                    const double denom = xi - zp[a];
                    if (denom > 0) alpha = std::min(alpha, xi / denom);
                }
            }
            if (!std::isfinite(alpha)) alpha = 0.0;
            for (std::size_t a = 0; a < active_order.size(); ++a) {
                const std::size_t i = active_order[a];
                x[i] += alpha * (zp[a] - x[i]);
            }
            // Drop coordinates pinned at zero.
            std::vector<std::size_t> kept;
            for (std::size_t a = 0; a < active_order.size(); ++a) {
                const std::size_t i = active_order[a];
                if (x[i] <= tol) {
                    x[i] = 0.0;
                    passive[i] = false;
                } else {
                    kept.push_back(i);
                }
            }
            if (kept.size() == active_order.size())
                throw NonConvergence("nnls: anti-cycling stall", x, steps);
            active_order = std::move(kept);
            if (active_order.empty()) break;
        }
    }
    throw NonConvergence("nnls exceeded max outer iterations", x, max_outer);
}

inline Vector nnls(const Matrix& X, const Vector& y, std::size_t max_outer = 0,
                   double tol = 1e-10) {
    if (y.size() != X.rows()) throw DimensionMismatch("nnls: rhs length mismatch");
    if (detail::degenerate_rhs(y)) return Vector(X.cols(), 0.0);
    return nnls_core(gram(X), matvec_t(X, y), max_outer, tol);
}

// ---------------------------------------------------------------------------
// Classwise least squares for LRC: (X_i^T X_i)^(-1) X_i^T y, with an explicit
// failure when the class Gram matrix is numerically singular.
// ---------------------------------------------------------------------------
inline Vector lrc_fit(const Matrix& Xi, const Vector& y, std::size_t class_index = 0,
                      double condition_limit = 1e12) {
    if (y.size() != Xi.rows()) throw DimensionMismatch("lrc_fit: rhs length mismatch");
    const Matrix Gi = gram(Xi);
    std::optional<CholeskyFactor> factor;
    try {
        factor.emplace(Gi);
    } catch (const FactorizationFailure&) {
        throw RankDeficientClass(class_index, std::numeric_limits<double>::infinity());
    }
    if (factor->pivot_ratio() >= condition_limit)
        throw RankDeficientClass(class_index, factor->pivot_ratio());
    if (detail::degenerate_rhs(y)) return Vector(Xi.cols(), 0.0);
    return factor->solve(matvec_t(Xi, y));
}

}  // namespace rbcm
