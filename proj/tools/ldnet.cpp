// Command-line front end: simulate, fit, tune, bench, dcor, gradcheck.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ldnet/csv.hpp"
#include "ldnet/errors.hpp"
#include "ldnet/experiment.hpp"
#include "ldnet/gradcheck.hpp"
#include "ldnet/harness.hpp"
#include "ldnet/metrics.hpp"
#include "ldnet/report.hpp"
#include "ldnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace ldnet;

namespace {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::vector<std::string> overrides;  // key=value
    bool no_standardize = false;
};

struct DataOptions {
    std::string train_path;
    std::string val_path;
    std::string predictors;
    std::string responses;
    std::string loss = "ld";
    std::string penalty = "none";
    double lambda = 0.0;
};

ExperimentConfig build_config(const GlobalOptions& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = load_config_file(g.config_path);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) cfg.base_seed = *g.seed;
    if (g.no_standardize) cfg.set("standardize", "false");
    return cfg;
}

fs::path out_file(const GlobalOptions& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

Dataset load_dataset(const std::string& path, const DataOptions& d) {
    if (d.predictors.empty() != d.responses.empty()) {
        throw ConfigError("--predictors and --responses must be given together");
    }
    if (d.predictors.empty()) return import_dataset_csv(path);
    return load_csv(path, split_list(d.predictors), split_list(d.responses));
}

TrainConfig train_config_for(const ExperimentConfig& cfg, const Dataset& data, const DataOptions& d) {
    TrainConfig t = cfg.train;
    t.network.layer_widths = {data.p()};
    for (int h : cfg.hidden) t.network.layer_widths.push_back(h);
    t.network.layer_widths.push_back(data.q());
    t.seed = cfg.base_seed;
    if (d.loss == "ld") {
        t.loss.kind = LossKind::ld;
    } else if (d.loss == "ls") {
        t.loss.kind = LossKind::ls;
    } else {
        throw ConfigError("--loss must be ld or ls");
    }
    if (d.penalty == "none") {
        t.penalty.kind = PenaltyKind::none;
    } else if (d.penalty == "group") {
        t.penalty.kind = PenaltyKind::group_lasso;
    } else if (d.penalty == "adaptive") {
        t.penalty.kind = PenaltyKind::adaptive_group_lasso;
    } else {
        throw ConfigError("--penalty must be none, group or adaptive");
    }
    t.penalty.lambda = d.lambda;
    return t;
}

FitReport fit_with_eta(const Dataset& train, const Dataset& val, const TrainConfig& t,
                       const ExperimentConfig& cfg) {
    return cfg.eta_fixed ? fit(train, val, t) : fit_eta_grid(train, val, t, cfg.eta_grid);
}

// Penalized learning rate, plus an unpenalized LD pilot for the adaptive weights.
void attach_pilot(TrainConfig& t, const Dataset& train, const Dataset& val, const ExperimentConfig& cfg) {
    const TrainConfig base = t;
    t.eta = cfg.effective_penalized_eta();
    if (t.penalty.kind != PenaltyKind::adaptive_group_lasso) return;
    TrainConfig pilot_cfg = base;
    pilot_cfg.loss.kind = LossKind::ld;
    pilot_cfg.penalty.kind = PenaltyKind::none;
    t.penalty.pilot_norms = group_norms(fit_with_eta(train, val, pilot_cfg, cfg).params.first_layer());
}

void write_fit(const GlobalOptions& g, const FitReport& report) {
    open_out(out_file(g, "fit.json")) << fit_report_json(report);
    auto trace = open_out(out_file(g, "trace.csv"));
    write_trace_csv(report, trace);
}

int run_simulate(const GlobalOptions& g, int replication) {
    const ExperimentConfig cfg = build_config(g);
    cfg.validate();
    const SimulatedData sim = simulate_data(cfg, replication_seed(cfg.base_seed, replication));
    export_dataset_csv(sim.train, out_file(g, "train.csv").string());
    export_dataset_csv(sim.val, out_file(g, "val.csv").string());
    export_dataset_csv(sim.test, out_file(g, "test.csv").string());
    std::cout << "wrote train/val/test (" << sim.train.n() << "/" << sim.val.n() << "/"
              << sim.test.n() << " rows, p=" << sim.train.p() << ", q=" << sim.train.q()
              << ") to " << g.out_dir << "\n";
    return 0;
}

int run_fit(const GlobalOptions& g, const DataOptions& d) {
    const ExperimentConfig cfg = build_config(g);
    const Dataset train = load_dataset(d.train_path, d);
    const Dataset val = d.val_path.empty() ? train : load_dataset(d.val_path, d);
    TrainConfig t = train_config_for(cfg, train, d);
    if (t.penalty.kind != PenaltyKind::none) attach_pilot(t, train, val, cfg);
    const FitReport report = t.penalty.kind == PenaltyKind::none ? fit_with_eta(train, val, t, cfg)
                                                                 : fit(train, val, t);
    write_fit(g, report);
    std::cout << "stopped at epoch " << report.stopped_epoch << ", best epoch " << report.best_epoch
              << ", validation loss " << format_double(report.best_val_loss()) << ", eta "
              << format_double(report.config_echo.eta) << "\nselected:";
    for (std::size_t j = 0; j < report.selected_mask.size(); ++j) {
        if (report.selected_mask[j]) std::cout << " x" << (j + 1);
    }
    std::cout << "\n";
    return 0;
}

int run_tune(const GlobalOptions& g, const DataOptions& d) {
    const ExperimentConfig cfg = build_config(g);
    const Dataset train = load_dataset(d.train_path, d);
    DataOptions dd = d;
    if (dd.penalty == "none") dd.penalty = "group";
    TrainConfig t = train_config_for(cfg, train, dd);

    auto table = open_out(out_file(g, "tune.csv"));
    table << "lambda,score\n";
    if (!d.val_path.empty()) {
        const Dataset val = load_dataset(d.val_path, d);
        attach_pilot(t, train, val, cfg);
        const LambdaSearch search = tune_lambda(train, val, cfg.lambda_grid, t);
        for (std::size_t i = 0; i < search.grid.size(); ++i) {
            table << format_double(search.grid[i]) << ',' << format_double(search.scores[i]) << '\n';
        }
        write_fit(g, search.best());
        std::cout << "best lambda " << format_double(search.best_lambda) << " (eta "
                  << format_double(t.eta) << ")\n";
    } else {
        if (!cfg.eta_fixed) {
            throw ConfigError("cross-validated tuning needs a fixed eta (set eta=<value>)");
        }
        t.eta = cfg.effective_penalized_eta();
        const CvLambdaSearch cv = tune_lambda_cv(train, cfg.cv_folds, cfg.lambda_grid, t, cfg.base_seed);
        for (std::size_t i = 0; i < cv.grid.size(); ++i) {
            table << format_double(cv.grid[i]) << ',' << format_double(cv.mean_scores[i]) << '\n';
        }
        std::cout << "best lambda " << format_double(cv.best_lambda) << " (" << cfg.cv_folds
                  << "-fold CV)\n";
    }
    return 0;
}

int run_bench(const GlobalOptions& g, const std::optional<int>& replications,
              const std::optional<int>& workers) {
    ExperimentConfig cfg = build_config(g);
    if (replications) cfg.replications = *replications;
    if (workers) cfg.workers = *workers;
    const ReportFormat format = parse_report_format(g.format);
    const ReplicationTable table = run_experiment(cfg);
    const fs::path path = out_file(g, format == ReportFormat::csv ? "report.csv" : "report.json");
    emit_report(table, format, path.string());
    for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& a : table.aggregates) {
        std::cout << a.estimator << ": mse " << format_double(a.mean_mse) << " mspe "
                  << format_double(a.mean_mspe) << " nc " << format_double(a.mean_nc) << " nic "
                  << format_double(a.mean_nic) << " nt " << a.nt << "/" << a.count << "\n";
    }
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int run_dcor(const GlobalOptions& g, const std::string& path, const std::string& columns) {
    const CsvTable table = read_csv_table(path);
    std::vector<std::string> names;
    if (!columns.empty()) {
        names = split_list(columns);
    } else {
        for (const auto& h : table.header) {
            if (!h.empty() && h[0] == 'y') names.push_back(h);
        }
        if (names.empty()) names = table.header;
    }
    const Dataset data = load_csv(path, {}, names);
    const Matrix d = dcor_matrix(data.Y);
    auto out = open_out(out_file(g, "dcor.csv"));
    for (std::size_t j = 0; j < names.size(); ++j) out << ',' << names[j];
    out << '\n';
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        out << names[i];
        std::cout << names[i];
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            out << ',' << format_double(d(i, j));
            std::cout << ' ' << format_double(d(i, j));
        }
        out << '\n';
        std::cout << '\n';
    }
    return 0;
}

int run_gradcheck(const GlobalOptions& g, int configs, double tol) {
    const std::uint64_t seed = g.seed.value_or(1);
    const GradCheckSummary s = audit_gradients(configs, seed);
    auto out = open_out(out_file(g, "gradcheck.csv"));
    out << "case,layers,loss,penalty,max_rel_error\n";
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
        const auto& c = s.cases[i];
        std::string layers;
        for (std::size_t l = 0; l < c.layer_widths.size(); ++l) {
            layers += (l ? "-" : "") + std::to_string(c.layer_widths[l]);
        }
        out << i << ',' << layers << ',' << c.loss << ',' << c.penalty << ','
            << format_double(c.max_rel_error) << '\n';
    }
    const bool ok = s.max_rel_error < tol;
    std::cout << configs << " configurations, max relative error " << format_double(s.max_rel_error)
              << " (" << s.resampled << " seam draws resampled): " << (ok ? "ok" : "FAILED") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-distance multivariate regression with deep networks"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Base seed (overrides the config file)");
    app.add_option("--config", g.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", g.format, "Report format for bench")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--set", g.overrides, "Config override key=value (repeatable)");
    app.add_flag("--no-standardize", g.no_standardize, "Keep real-data columns on their raw scale");

    auto* simulate = app.add_subcommand("simulate", "Write train/val/test CSVs of a simulated design");
    int sim_replication = 0;
    simulate->add_option("--replication", sim_replication, "Replication index")->capture_default_str();

    DataOptions d;
    auto add_data_flags = [&](CLI::App* cmd) {
        cmd->add_option("--train", d.train_path, "Training CSV")->required()->check(CLI::ExistingFile);
        cmd->add_option("--val", d.val_path, "Validation CSV")->check(CLI::ExistingFile);
        cmd->add_option("--predictors", d.predictors, "Comma-separated predictor columns");
        cmd->add_option("--responses", d.responses, "Comma-separated response columns");
        cmd->add_option("--loss", d.loss, "ld or ls")->capture_default_str();
        cmd->add_option("--penalty", d.penalty, "none, group or adaptive")->capture_default_str();
    };
    auto* fit_cmd = app.add_subcommand("fit", "Train one network on CSV data");
    add_data_flags(fit_cmd);
    fit_cmd->add_option("--lambda", d.lambda, "Penalty level")->capture_default_str();

    auto* tune = app.add_subcommand("tune", "Select lambda on a validation set or by k-fold CV");
    add_data_flags(tune);

    auto* bench = app.add_subcommand("bench", "Run a replicated experiment and write the report");
    std::optional<int> replications, workers;
    bench->add_option("--replications", replications, "Number of replications");
    bench->add_option("--workers", workers, "Worker threads");

    auto* dcor = app.add_subcommand("dcor", "Pairwise distance correlation of CSV columns");
    std::string dcor_path, dcor_columns;
    dcor->add_option("--data", dcor_path, "CSV file")->required()->check(CLI::ExistingFile);
    dcor->add_option("--columns", dcor_columns, "Columns (default: y* columns, else all)");

    auto* gradcheck = app.add_subcommand("gradcheck", "Backprop versus finite differences");
    int configs = 200;
    double tol = 1e-5;
    gradcheck->add_option("--configs", configs, "Random configurations")->capture_default_str();
    gradcheck->add_option("--tol", tol, "Maximum relative error")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return run_simulate(g, sim_replication);
        if (*fit_cmd) return run_fit(g, d);
        if (*tune) return run_tune(g, d);
        if (*bench) return run_bench(g, replications, workers);
        if (*dcor) return run_dcor(g, dcor_path, dcor_columns);
        if (*gradcheck) return run_gradcheck(g, configs, tol);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
