// Command-line benchmark harness for the representation-based classifiers:
//   rbcm run    - run configured classifiers on a dataset and emit a JSON report
//   rbcm sweep  - SCCRC accuracy surface over a (lambda1, lambda2) grid
//   rbcm synth  - generate a seeded synthetic blob dataset

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rbcm/rbcm.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNonConvergence = 3;

std::vector<rbcm::MethodConfig> build_method_configs(const std::string& list, double lambda,
                                                     double lambda1, double lambda2, double theta,
                                                     bool fatal, std::size_t max_iter) {
    std::vector<rbcm::MethodConfig> configs;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = list.find(',', pos);
        const std::string token =
            list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!token.empty()) {
            rbcm::MethodConfig cfg =
                rbcm::MethodConfig::defaults_for(rbcm::parse_method(token));
            cfg.lambda = lambda;
            cfg.lambda1 = lambda1;
            cfg.lambda2 = lambda2;
            cfg.theta = theta;
            cfg.fatal_nonconvergence = fatal;
            if (max_iter > 0) cfg.solver_opts.max_iter = max_iter;
            configs.push_back(cfg);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (configs.empty()) throw rbcm::DimensionMismatch("no methods given");
    return configs;
}

std::vector<std::pair<double, double>> parse_grid(const std::string& spec) {
    if (spec == "default") return rbcm::default_parameter_grid();
    std::vector<std::pair<double, double>> grid;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string token =
            spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!token.empty()) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                throw rbcm::DimensionMismatch("grid pair '" + token + "' is not lambda1:lambda2");
            grid.emplace_back(std::stod(token.substr(0, colon)), std::stod(token.substr(colon + 1)));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (grid.empty()) throw rbcm::DimensionMismatch("grid is empty");
    return grid;
}

void print_summary(const rbcm::ExperimentReport& report) {
    std::printf("%-8s %10s %14s %10s %6s\n", "method", "accuracy", "solve_seconds", "mean_sci",
                "nc");
    for (const auto& m : report.methods)
        std::printf("%-8s %10.4f %14.3f %10.4f %6zu\n",
                    rbcm::method_name(m.config.method).c_str(), m.accuracy,
                    m.total_solve_seconds, m.mean_sci, m.nonconverged);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"representation-based classification benchmark harness"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "classify a dataset and write a JSON report");
    std::string features_path, labels_path, report_path, dump_dir;
    std::string methods_list =
        "SRC,CRC,LRC,CCRC,CCRC_L1,NRC,SCRC,SA_CRC,FRC,SCCRC";
    std::size_t train_per_class = 1;
    double lambda = 1e-3, lambda1 = 1e-3, lambda2 = 1e-3, theta = 0.5, noise_variance = 0.0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::size_t max_iter = 0;
    bool fatal_nonconvergence = false;
    run->add_option("--features", features_path, "feature matrix (CSV or RBCM binary)")
        ->required();
    run->add_option("--labels", labels_path, "labels file, one 0-based integer per line")
        ->required();
    run->add_option("--train-per-class", train_per_class, "first k samples per class train")
        ->required();
    run->add_option("--methods", methods_list, "comma-separated method list");
    run->add_option("--lambda", lambda, "l1 weight (and plain-CRC ridge weight)");
    run->add_option("--lambda1", lambda1, "collaborative ridge weight");
    run->add_option("--lambda2", lambda2, "competition weight");
    run->add_option("--theta", theta, "FRC residual mixing weight in [0,1]");
    run->add_option("--noise-variance", noise_variance, "Gaussian noise variance on test features");
    run->add_option("--seed", seed, "noise generator seed");
    run->add_option("--report", report_path, "JSON report output path");
    run->add_option("--dump-coefficients", dump_dir, "directory for per-sample CSV dumps");
    run->add_option("--threads", threads, "worker threads (0 = hardware)");
    run->add_option("--max-iter", max_iter, "solver iteration budget (0 = per-solver default)");
    run->add_flag("--fatal-nonconvergence", fatal_nonconvergence,
                  "abort (exit 3) when a solver fails to converge");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "SCCRC accuracy over a (lambda1, lambda2) grid");
    std::string sweep_features, sweep_labels, grid_spec = "default", sweep_out;
    std::size_t sweep_train = 1, sweep_threads = 0;
    double sweep_lambda = 1e-3, sweep_noise = 0.0;
    std::uint64_t sweep_seed = 0;
    sweep->add_option("--features", sweep_features, "feature matrix (CSV or RBCM binary)")
        ->required();
    sweep->add_option("--labels", sweep_labels, "labels file")->required();
    sweep->add_option("--train-per-class", sweep_train, "first k samples per class train")
        ->required();
    sweep->add_option("--grid", grid_spec, "'default' or comma list of lambda1:lambda2 pairs");
    sweep->add_option("--lambda", sweep_lambda, "l1 weight for the sparse side");
    sweep->add_option("--noise-variance", sweep_noise, "Gaussian noise variance on test features");
    sweep->add_option("--seed", sweep_seed, "noise generator seed");
    sweep->add_option("--out", sweep_out, "output CSV path")->required();
    sweep->add_option("--threads", sweep_threads, "worker threads (0 = hardware)");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic blob dataset");
    std::size_t classes = 10, dim = 40, per_class = 16;
    double separation = 0.6;
    std::uint64_t synth_seed = 0;
    std::string out_features, out_labels, format = "csv";
    synth->add_option("--classes", classes, "number of classes (>= 2)");
    synth->add_option("--dim", dim, "feature dimension");
    synth->add_option("--per-class", per_class, "samples per class");
    synth->add_option("--separation", separation, "between-class separation scale");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out-features", out_features, "feature output path")->required();
    synth->add_option("--out-labels", out_labels, "labels output path")->required();
    synth->add_option("--format", format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            rbcm::ExperimentConfig cfg;
            try {
                cfg.methods = build_method_configs(methods_list, lambda, lambda1, lambda2, theta,
                                                   fatal_nonconvergence, max_iter);
                cfg.train_per_class = train_per_class;
                cfg.noise_variance = noise_variance;
                cfg.seed = seed;
                cfg.threads = threads;
                cfg.report_path = report_path;
                cfg.dump_dir = dump_dir;
                cfg.validate();
            } catch (const rbcm::Error& e) {
                std::cerr << "rbcm run: " << e.what() << '\n';
                return kExitUsage;
            }
            const rbcm::LabeledDataset ds = rbcm::load_dataset(features_path, labels_path);
            const rbcm::ExperimentReport report = rbcm::run_experiment(cfg, ds);
            print_summary(report);
            if (!report_path.empty()) std::cout << "report written to " << report_path << '\n';
        } else if (sweep->parsed()) {
            rbcm::ExperimentConfig cfg;
            try {
                cfg.methods = {rbcm::MethodConfig::defaults_for(rbcm::Method::Sccrc)};
                cfg.methods[0].lambda = sweep_lambda;
                cfg.train_per_class = sweep_train;
                cfg.noise_variance = sweep_noise;
                cfg.seed = sweep_seed;
                cfg.threads = sweep_threads;
                cfg.parameter_grid = parse_grid(grid_spec);
            } catch (const std::exception& e) {
                std::cerr << "rbcm sweep: " << e.what() << '\n';
                return kExitUsage;
            }
            const rbcm::LabeledDataset ds = rbcm::load_dataset(sweep_features, sweep_labels);
            const auto cells = rbcm::sweep_parameters(cfg, ds);
            rbcm::write_sweep_csv(cells, sweep_out);
            std::cout << cells.size() << " grid cells written to " << sweep_out << '\n';
        } else if (synth->parsed()) {
            rbcm::LabeledDataset ds;
            try {
                ds = rbcm::make_blobs(classes, dim, per_class, separation, synth_seed);
            } catch (const rbcm::Error& e) {
                std::cerr << "rbcm synth: " << e.what() << '\n';
                return kExitUsage;
            }
            if (format == "bin")
                rbcm::save_features_binary(out_features, ds.features);
            else
                rbcm::save_features_csv(out_features, ds.features);
            rbcm::save_labels(out_labels, ds.labels);
            std::cout << "wrote " << ds.size() << " samples (" << classes << " classes, dim "
                      << dim << ")\n";
        }
    } catch (const rbcm::NonConvergence& e) {
        std::cerr << "rbcm: solver did not converge: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const rbcm::Error& e) {
        std::cerr << "rbcm: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "rbcm: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
