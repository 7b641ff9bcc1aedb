#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rbcm/classify.hpp"
#include "rbcm/dataset.hpp"
#include "rbcm/dictionary.hpp"
#include "rbcm/errors.hpp"
#include "rbcm/eval.hpp"
#include "rbcm/solvers.hpp"

namespace rbcm {

struct ExperimentConfig {
    std::size_t train_per_class = 1;
    std::vector<MethodConfig> methods;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> parameter_grid;  // (lambda1, lambda2) for sweeps
    std::string report_path;  // empty: do not write
    std::string dump_dir;     // empty: no per-sample dumps
    std::size_t threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (train_per_class == 0)
            throw DimensionMismatch("config: train_per_class must be at least 1");
        if (methods.empty()) throw DimensionMismatch("config: no methods configured");
        for (std::size_t i = 0; i < methods.size(); ++i) {
            methods[i].validate();
            for (std::size_t j = i + 1; j < methods.size(); ++j)
                if (methods[i].method == methods[j].method)
                    throw DimensionMismatch("config: method " + method_name(methods[i].method) +
                                            " listed more than once");
        }
    }
};

struct MethodReport {
    MethodConfig config;
    double accuracy = 0.0;
    double total_solve_seconds = 0.0;
    double mean_sci = 0.0;
    std::size_t sci_samples = 0;  // samples whose coefficient vector had l1 mass
    std::size_t nonconverged = 0;
    std::vector<PredictionRecord> records;
};

struct McNemarCell {
    std::string method_a;
    std::string method_b;
    McNemarResult result;
};

struct ExperimentReport {
    static constexpr const char* kSchema = "rbcm-report/1";

    ExperimentConfig config;
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
    std::vector<MethodReport> methods;
    std::vector<McNemarCell> mcnemar;  // full matrix, row-major over config order
};

namespace detail {

// Index-sharded worker pool. The first exception (if any) is rethrown on the
// calling thread after all workers join.
template <typename Fn>
inline void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Training columns reordered into contiguous class blocks (stable within a
// class), as the dictionary layout requires.
inline Matrix class_grouped_columns(const LabeledDataset& train) {
    Matrix grouped(train.dim(), train.size());
    std::size_t col = 0;
    for (std::size_t c = 0; c < train.class_count; ++c)
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train.labels[i] == c) {
                for (std::size_t r = 0; r < train.dim(); ++r)
                    grouped(r, col) = train.features(r, i);
                ++col;
            }
    return grouped;
}

inline Vector normalized_or_zero(Vector y) {
    const double nrm = norm2(y);
    if (nrm >= 1e-12 && nrm != 1.0)
        for (double& v : y) v /= nrm;
    return y;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON report
// ---------------------------------------------------------------------------

inline nlohmann::json method_config_to_json(const MethodConfig& m) {
    return nlohmann::json{
        {"method", method_name(m.method)},
        {"lambda", m.lambda},
        {"lambda1", m.lambda1},
        {"lambda2", m.lambda2},
        {"theta", m.theta},
        {"fatal_nonconvergence", m.fatal_nonconvergence},
        {"solver",
         {{"max_iter", m.solver_opts.max_iter},
          {"tol", m.solver_opts.tol},
          {"mu0", m.solver_opts.mu0},
          {"mu_max", m.solver_opts.mu_max},
          {"rho", m.solver_opts.rho},
          {"eps", m.solver_opts.eps}}},
    };
}

inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json methods_cfg = nlohmann::json::array();
    for (const auto& m : report.config.methods) methods_cfg.push_back(method_config_to_json(m));

    nlohmann::json results = nlohmann::json::array();
    for (const auto& mr : report.methods) {
        nlohmann::json predictions = nlohmann::json::array();
        for (const auto& r : mr.records)
            predictions.push_back({{"sample_id", r.sample_id},
                                   {"true_label", r.true_label},
                                   {"predicted", r.predicted},
                                   {"solve_time", r.solve_time}});
        results.push_back({{"method", method_name(mr.config.method)},
                           {"accuracy", mr.accuracy},
                           {"total_solve_seconds", mr.total_solve_seconds},
                           {"mean_sci", mr.mean_sci},
                           {"sci_samples", mr.sci_samples},
                           {"nonconverged", mr.nonconverged},
                           {"predictions", predictions}});
    }

    nlohmann::json mcnemar = nlohmann::json::array();
    for (const auto& cell : report.mcnemar)
        mcnemar.push_back({{"method_a", cell.method_a},
                           {"method_b", cell.method_b},
                           {"n01", cell.result.n01},
                           {"n10", cell.result.n10},
                           {"p_value", cell.result.p_value}});

    return nlohmann::json{
        {"schema", ExperimentReport::kSchema},
        {"config",
         {{"train_per_class", report.config.train_per_class},
          {"noise_variance", report.config.noise_variance},
          {"seed", report.config.seed},
          {"threads", report.config.threads},
          {"methods", methods_cfg}}},
        {"dataset",
         {{"dim", report.dim},
          {"classes", report.classes},
          {"train_samples", report.train_samples},
          {"test_samples", report.test_samples}}},
        {"results", results},
        {"mcnemar", mcnemar},
    };
}

inline void write_report(const ExperimentReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError(path, "cannot open report file for writing");
    os << report_to_json(report).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& ds) {
    cfg.validate();
    ds.validate();

    auto [train, test] = split_first_k(ds, cfg.train_per_class);
    const Matrix test_features = add_gaussian_noise(test.features, cfg.noise_variance, cfg.seed);

    std::vector<std::size_t> class_sizes(train.class_count, 0);
    for (std::size_t l : train.labels) ++class_sizes[l];
    const PartitionedDictionary dict(detail::class_grouped_columns(train), class_sizes);

    std::vector<Vector> test_vectors(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        test_vectors[i] = detail::normalized_or_zero(test_features.column(i));

    ExperimentReport report;
    report.config = cfg;
    report.dim = ds.dim();
    report.classes = ds.class_count;
    report.train_samples = train.size();
    report.test_samples = test.size();

    const bool dump = !cfg.dump_dir.empty();
    if (dump) std::filesystem::create_directories(cfg.dump_dir);

    for (const MethodConfig& method_cfg : cfg.methods) {
        const std::string name = method_name(method_cfg.method);
        const MethodPipeline pipeline(dict, method_cfg);
        std::vector<Prediction> predictions(test.size());
        detail::parallel_for(test.size(), cfg.threads, [&](std::size_t i) {
            try {
                predictions[i] = pipeline.classify(test_vectors[i]);
            } catch (const NonConvergence& e) {
                throw NonConvergence(name + ", test sample " + std::to_string(i) + ": " + e.what(),
                                     e.last_iterate, e.iterations);
            } catch (const std::exception& e) {
                throw Error(name + ", test sample " + std::to_string(i) + ": " + e.what());
            }
        });

        MethodReport mr;
        mr.config = method_cfg;
        mr.records.reserve(test.size());
        double sci_sum = 0.0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const Prediction& p = predictions[i];
            mr.records.push_back({i, test.labels[i], p.class_index, p.solve_time});
            mr.total_solve_seconds += p.solve_time;
            if (!p.converged) ++mr.nonconverged;
            try {
                sci_sum += sci(p.coefficients, dict);
                ++mr.sci_samples;
            } catch (const ZeroCoefficientVector&) {
            }
        }
        mr.accuracy = accuracy(mr.records);
        mr.mean_sci = mr.sci_samples == 0 ? 0.0 : sci_sum / static_cast<double>(mr.sci_samples);

        if (dump) {
            const auto base = std::filesystem::path(cfg.dump_dir) / name;
            std::ofstream coeffs(base.string() + "_coefficients.csv");
            std::ofstream residuals(base.string() + "_residuals.csv");
            for (std::size_t i = 0; i < test.size(); ++i) {
                coeffs << i;
                for (double v : predictions[i].coefficients)
                    coeffs << ',' << detail::format_double(v);
                coeffs << '\n';
                residuals << i;
                for (double v : predictions[i].residuals.values)
                    residuals << ',' << detail::format_double(v);
                residuals << '\n';
            }
        }
        report.methods.push_back(std::move(mr));
    }

    if (report.methods.size() >= 2) {
        for (const auto& a : report.methods)
            for (const auto& b : report.methods)
                report.mcnemar.push_back({method_name(a.config.method),
                                          method_name(b.config.method),
                                          mcnemar_exact(a.records, b.records)});
    }

    if (!cfg.report_path.empty()) write_report(report, cfg.report_path);
    return report;
}

// ---------------------------------------------------------------------------
// Parameter sweep: SCCRC accuracy over a (lambda1, lambda2) grid. The sparse
// coefficients do not depend on the grid point, so they are solved once per
// test sample and reused for every cell.
// ---------------------------------------------------------------------------

struct SweepCell {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double accuracy = 0.0;
    bool ok = false;
    std::string error;
};

inline std::vector<std::pair<double, double>> default_parameter_grid() {
    const std::vector<double> values = {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
    std::vector<std::pair<double, double>> grid;
    grid.reserve(values.size() * values.size());
    for (double l1 : values)
        for (double l2 : values) grid.emplace_back(l1, l2);
    return grid;
}

inline std::vector<SweepCell> sweep_parameters(const ExperimentConfig& cfg,
                                               const LabeledDataset& ds) {
    if (cfg.parameter_grid.empty()) throw DimensionMismatch("sweep: parameter grid is empty");
    ds.validate();

    MethodConfig base = MethodConfig::defaults_for(Method::Sccrc);
    for (const auto& m : cfg.methods)
        if (m.method == Method::Sccrc) base = m;

    auto [train, test] = split_first_k(ds, cfg.train_per_class);
    const Matrix test_features = add_gaussian_noise(test.features, cfg.noise_variance, cfg.seed);

    std::vector<std::size_t> class_sizes(train.class_count, 0);
    for (std::size_t l : train.labels) ++class_sizes[l];
    const PartitionedDictionary dict(detail::class_grouped_columns(train), class_sizes);

    std::vector<Vector> test_vectors(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        test_vectors[i] = detail::normalized_or_zero(test_features.column(i));

    Matrix G2 = gram(dict.atoms());
    for (double& g : G2.data()) g *= 2.0;
    const double lipschitz = max_eigenvalue(G2);

    std::vector<Vector> sparse(test.size());
    detail::parallel_for(test.size(), cfg.threads, [&](std::size_t i) {
        try {
            sparse[i] = fista_l1(dict.atoms(), test_vectors[i], base.lambda, base.solver_opts,
                                 nullptr, lipschitz);
        } catch (const NonConvergence& e) {
            if (base.fatal_nonconvergence)
                throw NonConvergence("sweep, test sample " + std::to_string(i) + ": " + e.what(),
                                     e.last_iterate, e.iterations);
            sparse[i] = e.last_iterate;
        }
    });

    std::vector<SweepCell> cells;
    cells.reserve(cfg.parameter_grid.size());
    for (const auto& [l1, l2] : cfg.parameter_grid) {
        SweepCell cell;
        cell.lambda1 = l1;
        cell.lambda2 = l2;
        try {
            const LinearOperator op = ccrc_operator(dict, l1, l2);
            std::vector<unsigned char> correct(test.size(), 0);
            detail::parallel_for(test.size(), cfg.threads, [&](std::size_t i) {
                const Vector fused = fuse_multiply(sparse[i], op.apply(test_vectors[i]));
                const ClassResiduals r = class_residuals_plain(dict, fused, test_vectors[i]);
                correct[i] = argmin_class(r) == test.labels[i] ? 1 : 0;
            });
            std::size_t right = 0;
            for (unsigned char c : correct) right += c;
            cell.accuracy = static_cast<double>(right) / static_cast<double>(test.size());
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

inline void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError(path, "cannot open sweep output for writing");
    os << "lambda1,lambda2,accuracy,error\n";
    for (const auto& c : cells) {
        os << detail::format_double(c.lambda1) << ',' << detail::format_double(c.lambda2) << ',';
        if (c.ok)
            os << detail::format_double(c.accuracy) << ",\n";
        else
            os << "nan,\"" << c.error << "\"\n";
    }
}

}  // namespace rbcm
