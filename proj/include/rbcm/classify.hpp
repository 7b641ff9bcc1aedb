#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rbcm/dictionary.hpp"
#include "rbcm/errors.hpp"
#include "rbcm/linalg.hpp"
#include "rbcm/solvers.hpp"

namespace rbcm {

enum class Method {
    Src,
    Crc,
    Lrc,
    Ccrc,
    CcrcL1,
    Nrc,
    Scrc,
    SaCrc,
    Frc,
    Sccrc,
};

inline const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = {
        Method::Src, Method::Crc,  Method::Lrc,   Method::Ccrc, Method::CcrcL1,
        Method::Nrc, Method::Scrc, Method::SaCrc, Method::Frc,  Method::Sccrc,
    };
    return methods;
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Src: return "SRC";
        case Method::Crc: return "CRC";
        case Method::Lrc: return "LRC";
        case Method::Ccrc: return "CCRC";
        case Method::CcrcL1: return "CCRC_L1";
        case Method::Nrc: return "NRC";
        case Method::Scrc: return "SCRC";
        case Method::SaCrc: return "SA_CRC";
        case Method::Frc: return "FRC";
        case Method::Sccrc: return "SCCRC";
    }
    return "?";
}

inline Method parse_method(std::string name) {
    for (char& c : name) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (c == '-') c = '_';
    }
    for (Method m : all_methods())
        if (method_name(m) == name) return m;
    throw DimensionMismatch("unknown method '" + name + "'");
}

// Classifier selector plus every hyperparameter the pipelines read.
//   lambda  - l1 weight for the sparse side; also the ridge weight of plain CRC
//   lambda1 - ridge weight of the collaborative side (CCRC, and the CRC side
//             of the fusion methods SCRC/SA_CRC/FRC)
//   lambda2 - competition weight (CCRC, CCRC_L1, SCCRC)
//   theta   - FRC residual mixing weight in [0, 1]
struct MethodConfig {
    Method method = Method::Sccrc;
    double lambda = 1e-3;
    double lambda1 = 1e-3;
    double lambda2 = 1e-3;
    double theta = 0.5;
    SolverOptions solver_opts;
    bool fatal_nonconvergence = false;

    static MethodConfig defaults_for(Method m) {
        MethodConfig cfg;
        cfg.method = m;
        if (m == Method::CcrcL1) cfg.solver_opts = SolverOptions::alm_defaults();
        return cfg;
    }

    void validate() const {
        solver_opts.validate();
        const bool needs_l1 = method == Method::Src || method == Method::Scrc ||
                              method == Method::SaCrc || method == Method::Frc ||
                              method == Method::Sccrc;
        const bool needs_ridge = method == Method::Crc;
        if ((needs_l1 || needs_ridge) && !(lambda > 0))
            throw DimensionMismatch(method_name(method) + ": lambda must be positive");
        const bool needs_ccrc = method == Method::Ccrc || method == Method::CcrcL1 ||
                                method == Method::Sccrc;
        const bool needs_ridge1 = method == Method::Scrc || method == Method::SaCrc ||
                                  method == Method::Frc;
        if ((needs_ccrc || needs_ridge1) && !(lambda1 > 0))
            throw DimensionMismatch(method_name(method) + ": lambda1 must be positive");
        if (needs_ccrc && lambda2 < 0)
            throw DimensionMismatch(method_name(method) + ": lambda2 must be non-negative");
        if (method == Method::Frc && !(theta >= 0.0 && theta <= 1.0))
            throw DimensionMismatch("FRC: theta must lie in [0, 1]");
    }
};

// Per-class reconstruction errors; entries are >= 0 or +inf.
struct ClassResiduals {
    Vector values;
};

struct Prediction {
    std::size_t class_index = 0;
    ClassResiduals residuals;
    Vector coefficients;   // the final vector the decision used
    double solve_time = 0; // seconds, wall clock around the solve
    bool converged = true; // false when a solver returned its last iterate
};

// ---------------------------------------------------------------------------
// Residual rules and fusion operators
// ---------------------------------------------------------------------------

// r_i = ||y - X_i c_i||_2
inline ClassResiduals class_residuals_plain(const PartitionedDictionary& D, const Vector& c,
                                            const Vector& y) {
    if (c.size() != D.atom_count() || y.size() != D.dim())
        throw DimensionMismatch("class_residuals_plain: size mismatch");
    ClassResiduals r;
    r.values.resize(D.class_count());
    for (std::size_t i = 0; i < D.class_count(); ++i) {
        Vector rec = D.reconstruct_class(c, i);
        double s = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = y[k] - rec[k];
            s += d * d;
        }
        r.values[i] = std::sqrt(s);
    }
    return r;
}

// r_i = ||y - X_i c_i||_2 / ||c_i||_2, +inf for numerically zero class slices.
inline ClassResiduals class_residuals_regularized(const PartitionedDictionary& D, const Vector& c,
                                                  const Vector& y) {
    ClassResiduals r = class_residuals_plain(D, c, y);
    bool any_finite = false;
    for (std::size_t i = 0; i < D.class_count(); ++i) {
        double s = 0.0;
        for (std::size_t k = D.class_offset(i); k < D.class_offset(i + 1); ++k) s += c[k] * c[k];
        const double slice_norm = std::sqrt(s);
        if (slice_norm < 1e-12) {
            r.values[i] = std::numeric_limits<double>::infinity();
        } else {
            r.values[i] /= slice_norm;
            any_finite = true;
        }
    }
    if (!any_finite) throw AllClassesDegenerate();
    return r;
}

// Index of the smallest residual; ties break toward the smallest index.
inline std::size_t argmin_class(const ClassResiduals& r) {
    std::size_t best = r.values.size();
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (r.values[i] < best_value) {
            best_value = r.values[i];
            best = i;
        }
    }
    if (best == r.values.size()) throw AllClassesDegenerate();
    return best;
}

inline Vector fuse_multiply(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("fuse_multiply: size mismatch");
    Vector f(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) f[i] = a[i] * b[i];
    return f;
}

inline Vector fuse_sum_normalize(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("fuse_sum_normalize: size mismatch");
    Vector f(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) f[i] = a[i] + b[i];
    const double nrm = norm2(f);
    if (nrm <= 1e-12) throw ZeroFusion();
    for (double& v : f) v /= nrm;
    return f;
}

inline ClassResiduals fuse_residual_weighted(const ClassResiduals& r_sr, const ClassResiduals& r_cr,
                                             double theta) {
    if (r_sr.values.size() != r_cr.values.size())
        throw DimensionMismatch("fuse_residual_weighted: size mismatch");
    if (!(theta >= 0.0 && theta <= 1.0))
        throw DimensionMismatch("fuse_residual_weighted: theta must lie in [0, 1]");
    ClassResiduals out;
    out.values.resize(r_sr.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (1.0 - theta) * r_sr.values[i] + theta * r_cr.values[i];
    return out;
}

// ---------------------------------------------------------------------------
// Method pipelines. A pipeline binds a dictionary and a config, precomputing
// whatever the method can reuse across test samples (coefficient operators,
// Gram matrices, the FISTA step size, per-class factors). classify() is pure
// and safe to call concurrently from many threads. The dictionary is held by
// reference and must outlive the pipeline.
// ---------------------------------------------------------------------------
class MethodPipeline {
public:
    MethodPipeline(const PartitionedDictionary& dictionary, MethodConfig config)
        : dict_(&dictionary), cfg_(std::move(config)) {
        cfg_.validate();
        const Method m = cfg_.method;

        if (m == Method::Src || m == Method::Scrc || m == Method::SaCrc || m == Method::Frc ||
            m == Method::Sccrc) {
            Matrix G2 = gram(dict_->atoms());
            for (double& g : G2.data()) g *= 2.0;
            fista_lipschitz_ = max_eigenvalue(G2);
        }
        if (m == Method::Crc) ridge_ = ridge_operator(*dict_, cfg_.lambda);
        if (m == Method::Scrc || m == Method::SaCrc || m == Method::Frc)
            ridge_ = ridge_operator(*dict_, cfg_.lambda1);
        if (m == Method::Ccrc || m == Method::Sccrc)
            ccrc_ = ccrc_operator(*dict_, cfg_.lambda1, cfg_.lambda2);
        if (m == Method::CcrcL1) {
            Matrix base = gram(dict_->atoms());
            if (cfg_.lambda2 != 0.0) {
                const Matrix M = dict_->competition_matrix();
                for (std::size_t i = 0; i < base.data().size(); ++i)
                    base.data()[i] += cfg_.lambda2 * M.data()[i];
            }
            alm_base_ = std::move(base);
        }
        if (m == Method::Nrc) nrc_gram_ = gram(dict_->atoms());
        if (m == Method::Lrc) {
            for (std::size_t i = 0; i < dict_->class_count(); ++i) {
                Matrix Xi = dict_->class_atoms(i);
                std::optional<CholeskyFactor> factor;
                try {
                    CholeskyFactor f(gram(Xi));
                    if (f.pivot_ratio() < 1e12) factor.emplace(std::move(f));
                } catch (const FactorizationFailure&) {
                }
                lrc_blocks_.push_back(std::move(Xi));
                lrc_factors_.push_back(std::move(factor));
            }
        }
    }

    const MethodConfig& config() const { return cfg_; }
    const PartitionedDictionary& dictionary() const { return *dict_; }

    Prediction classify(const Vector& y_raw) const {
        const auto start = std::chrono::steady_clock::now();
        if (y_raw.size() != dict_->dim())
            throw DimensionMismatch("classify: sample dimension mismatch");

        Vector y = y_raw;
        const double nrm = norm2(y);
        if (nrm >= 1e-12) {
            if (std::abs(nrm - 1.0) > 1e-6)
                warn("classify: normalizing test sample with norm " + std::to_string(nrm));
            if (nrm != 1.0)
                for (double& v : y) v /= nrm;
        }

        Prediction p;
        switch (cfg_.method) {
            case Method::Src: {
                p.coefficients = solve_sparse(y, p.converged);
                p.residuals = class_residuals_plain(*dict_, p.coefficients, y);
                break;
            }
            case Method::Crc: {
                p.coefficients = ridge_->apply(y);
                p.residuals = class_residuals_regularized(*dict_, p.coefficients, y);
                break;
            }
            case Method::Lrc: {
                p.coefficients.assign(dict_->atom_count(), 0.0);
                p.residuals.values.assign(dict_->class_count(),
                                          std::numeric_limits<double>::infinity());
                for (std::size_t i = 0; i < dict_->class_count(); ++i) {
                    if (!lrc_factors_[i]) continue;  // rank-deficient class: keep +inf
                    const Vector ai = lrc_factors_[i]->solve(matvec_t(lrc_blocks_[i], y));
                    Vector rec = matvec(lrc_blocks_[i], ai);
                    double s = 0.0;
                    for (std::size_t k = 0; k < y.size(); ++k) {
                        const double d = y[k] - rec[k];
                        s += d * d;
                    }
                    p.residuals.values[i] = std::sqrt(s);
                    std::copy(ai.begin(), ai.end(),
                              p.coefficients.begin() +
                                  static_cast<std::ptrdiff_t>(dict_->class_offset(i)));
                }
                break;
            }
            case Method::Ccrc: {
                p.coefficients = ccrc_->apply(y);
                p.residuals = class_residuals_regularized(*dict_, p.coefficients, y);
                break;
            }
            case Method::CcrcL1: {
                try {
                    p.coefficients = alm_ccrc_l1_core(dict_->atoms(), *alm_base_, y, cfg_.lambda1,
                                                      cfg_.lambda2, cfg_.solver_opts);
                } catch (const NonConvergence& e) {
                    if (cfg_.fatal_nonconvergence) throw;
                    p.coefficients = e.last_iterate;
                    p.converged = false;
                }
                p.residuals = class_residuals_plain(*dict_, p.coefficients, y);
                break;
            }
            case Method::Nrc: {
                try {
                    p.coefficients = norm2(y) < 1e-12
                                         ? Vector(dict_->atom_count(), 0.0)
                                         : nnls_core(*nrc_gram_, matvec_t(dict_->atoms(), y));
                } catch (const NonConvergence& e) {
                    if (cfg_.fatal_nonconvergence) throw;
                    p.coefficients = e.last_iterate;
                    p.converged = false;
                }
                p.residuals = class_residuals_plain(*dict_, p.coefficients, y);
                break;
            }
            case Method::Scrc: {
                const Vector sparse = solve_sparse(y, p.converged);
                p.coefficients = fuse_multiply(sparse, ridge_->apply(y));
                p.residuals = class_residuals_plain(*dict_, p.coefficients, y);
                break;
            }
            case Method::SaCrc: {
                const Vector sparse = solve_sparse(y, p.converged);
                p.coefficients = fuse_sum_normalize(sparse, ridge_->apply(y));
                p.residuals = class_residuals_plain(*dict_, p.coefficients, y);
                break;
            }
            case Method::Frc: {
                const Vector sparse = solve_sparse(y, p.converged);
                const Vector collab = ridge_->apply(y);
                p.residuals = fuse_residual_weighted(class_residuals_plain(*dict_, sparse, y),
                                                     class_residuals_plain(*dict_, collab, y),
                                                     cfg_.theta);
                p.coefficients = sparse;
                break;
            }
            case Method::Sccrc: {
                const Vector sparse = solve_sparse(y, p.converged);
                p.coefficients = fuse_multiply(sparse, ccrc_->apply(y));
                p.residuals = class_residuals_plain(*dict_, p.coefficients, y);
                break;
            }
        }
        p.class_index = argmin_class(p.residuals);
        p.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return p;
    }

private:
    Vector solve_sparse(const Vector& y, bool& converged) const {
        try {
            return fista_l1(dict_->atoms(), y, cfg_.lambda, cfg_.solver_opts, nullptr,
                            fista_lipschitz_);
        } catch (const NonConvergence& e) {
            if (cfg_.fatal_nonconvergence) throw;
            converged = false;
            return e.last_iterate;
        }
    }

    const PartitionedDictionary* dict_;
    MethodConfig cfg_;
    double fista_lipschitz_ = 0.0;
    std::optional<LinearOperator> ridge_;
    std::optional<LinearOperator> ccrc_;
    std::optional<Matrix> alm_base_;
    std::optional<Matrix> nrc_gram_;
    std::vector<Matrix> lrc_blocks_;
    std::vector<std::optional<CholeskyFactor>> lrc_factors_;
};

// One-shot classification. Experiment loops should build a MethodPipeline once
// and reuse it; this recomputes the method's operators on every call.
inline Prediction classify(const PartitionedDictionary& D, const Vector& y,
                           const MethodConfig& cfg) {
    return MethodPipeline(D, cfg).classify(y);
}

}  // namespace rbcm
