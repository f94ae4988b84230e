#include "ldnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ldnet/csv.hpp"
#include "ldnet/errors.hpp"

namespace ldnet {

namespace {

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) {
        throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw ConfigError("config key '" + key + "' expects an integer");
    return static_cast<long long>(d);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || v.front() == '-') {
        throw ConfigError("config key '" + key + "' expects a nonnegative integer");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
    return out;
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::example1: return "example1";
        case Experiment::example2: return "example2";
        case Experiment::example3: return "example3";
        case Experiment::real_data: return "real_data";
        case Experiment::custom: return "custom";
    }
    return "?";
}

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::dnn_ls_ind: return "DNN-LS-IND";
        case Estimator::dnn_ls: return "DNN-LS";
        case Estimator::dnn_ld: return "DNN-LD";
        case Estimator::gdnn_ld: return "GDNN-LD";
        case Estimator::agdnn_ld: return "AGDNN-LD";
    }
    return "?";
}

std::string to_string(ErrorKind e) {
    switch (e) {
        case ErrorKind::std_normal_iid: return "std_normal_iid";
        case ErrorKind::t3_iid: return "t3_iid";
        case ErrorKind::mv_normal: return "mv_normal";
        case ErrorKind::mv_t3: return "mv_t3";
    }
    return "?";
}

Experiment parse_experiment(const std::string& s) {
    for (auto e : {Experiment::example1, Experiment::example2, Experiment::example3,
                   Experiment::real_data, Experiment::custom}) {
        if (to_string(e) == s) return e;
    }
    throw ConfigError("unknown experiment '" + s + "'");
}

Estimator parse_estimator(const std::string& s) {
    for (auto e : {Estimator::dnn_ls_ind, Estimator::dnn_ls, Estimator::dnn_ld, Estimator::gdnn_ld,
                   Estimator::agdnn_ld}) {
        if (to_string(e) == s) return e;
    }
    throw ConfigError("unknown estimator '" + s + "'");
}

ErrorKind parse_error_kind(const std::string& s) {
    if (s == "std_normal_iid" || s == "normal" || s == "N01") return ErrorKind::std_normal_iid;
    if (s == "t3_iid" || s == "t3") return ErrorKind::t3_iid;
    if (s == "mv_normal" || s == "MN") return ErrorKind::mv_normal;
    if (s == "mv_t3" || s == "MT") return ErrorKind::mv_t3;
    throw ConfigError("unknown error distribution '" + s + "'");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const std::string& v = value;
    if (key == "experiment") {
        experiment = parse_experiment(v);
    } else if (key == "estimators") {
        estimators.clear();
        for (const auto& item : split_list(v)) estimators.push_back(parse_estimator(item));
    } else if (key == "replications") {
        replications = static_cast<int>(to_int(key, v));
    } else if (key == "base_seed" || key == "seed") {
        base_seed = to_u64(key, v);
    } else if (key == "hidden") {
        hidden.clear();
        for (const auto& item : split_list(v)) hidden.push_back(static_cast<int>(to_int(key, item)));
    } else if (key == "eta") {
        if (v == "grid") {
            eta_fixed = false;
        } else {
            eta_fixed = true;
            train.eta = to_double(key, v);
        }
    } else if (key == "eta_grid") {
        eta_grid = to_doubles(key, v);
    } else if (key == "penalized_eta") {
        penalized_eta = to_double(key, v);
    } else if (key == "max_epochs") {
        train.max_epochs = static_cast<int>(to_int(key, v));
    } else if (key == "patience") {
        train.patience = static_cast<int>(to_int(key, v));
    } else if (key == "early_stopping") {
        train.early_stopping = to_bool(key, v);
    } else if (key == "init_scale") {
        train.init_scale = to_double(key, v);
    } else if (key == "tau1") {
        train.penalty.tau1 = to_double(key, v);
    } else if (key == "tau2") {
        train.loss.tau2 = to_double(key, v);
    } else if (key == "gamma") {
        train.penalty.gamma = to_double(key, v);
    } else if (key == "pilot_floor") {
        train.penalty.pilot_floor = to_double(key, v);
    } else if (key == "penalize_bias") {
        train.penalty.penalize_bias = to_bool(key, v);
    } else if (key == "gradient_variant") {
        GradientVariant g;
        if (v == "corrected") {
            g = GradientVariant::corrected;
        } else if (v == "paper_literal") {
            g = GradientVariant::paper_literal;
        } else {
            throw ConfigError("gradient_variant must be corrected or paper_literal");
        }
        train.loss.variant = g;
        train.penalty.variant = g;
    } else if (key == "ls_reduction") {
        if (v == "mean") {
            train.loss.ls_reduction = Reduction::mean;
        } else if (v == "sum") {
            train.loss.ls_reduction = Reduction::sum;
        } else {
            throw ConfigError("ls_reduction must be mean or sum");
        }
    } else if (key == "selection_threshold") {
        train.selection_threshold = to_double(key, v);
    } else if (key == "case") {
        example_case = static_cast<int>(to_int(key, v));
    } else if (key == "q") {
        q = static_cast<int>(to_int(key, v));
    } else if (key == "error") {
        error = parse_error_kind(v);
    } else if (key == "alpha") {
        alpha = to_double(key, v);
    } else if (key == "outlier_shift") {
        outlier_shift = to_double(key, v);
    } else if (key == "n_train") {
        n_train = static_cast<int>(to_int(key, v));
    } else if (key == "n_val") {
        n_val = static_cast<int>(to_int(key, v));
    } else if (key == "n_test") {
        n_test = static_cast<int>(to_int(key, v));
    } else if (key == "lambda_grid") {
        lambda_grid = to_doubles(key, v);
    } else if (key == "data_path" || key == "slump_csv" || key == "train_path") {
        data_path = v;
    } else if (key == "val_path") {
        val_path = v;
    } else if (key == "test_path") {
        test_path = v;
    } else if (key == "cv_folds") {
        cv_folds = static_cast<int>(to_int(key, v));
    } else if (key == "train_fraction") {
        train_fraction = to_double(key, v);
    } else if (key == "standardize") {
        standardize = to_bool(key, v);
    } else if (key == "noise_columns") {
        noise_columns = static_cast<int>(to_int(key, v));
    } else if (key == "workers") {
        workers = static_cast<int>(to_int(key, v));
    } else if (key == "record_timing") {
        record_timing = to_bool(key, v);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

double ExperimentConfig::effective_outlier_shift() const {
    if (outlier_shift) return *outlier_shift;
    return experiment == Experiment::real_data ? 5.0 : 7.0;
}

double ExperimentConfig::effective_penalized_eta() const {
    if (penalized_eta) return *penalized_eta;
    if (eta_fixed || eta_grid.empty()) return train.eta;
    return *std::min_element(eta_grid.begin(), eta_grid.end());
}

void ExperimentConfig::validate() const {
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (estimators.empty()) throw ConfigError("no estimators requested");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("hidden widths must be >= 1");
    }
    if (!eta_fixed && eta_grid.empty()) throw ConfigError("eta grid is empty");
    for (double e : eta_grid) {
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eta grid values must lie in (0, 1]");
    }
    if (eta_fixed && !(train.eta > 0.0 && train.eta <= 1.0)) {
        throw ConfigError("learning rate must lie in (0, 1]");
    }
    if (penalized_eta && !(*penalized_eta > 0.0 && *penalized_eta <= 1.0)) {
        throw ConfigError("penalized_eta must lie in (0, 1]");
    }
    if (train.max_epochs < 1 || train.patience < 1) {
        throw ConfigError("max_epochs and patience must be >= 1");
    }
    train.loss.validate();
    if (!(train.penalty.tau1 > 0.0)) throw ConfigError("tau1 must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (example_case != 1 && example_case != 2) throw ConfigError("case must be 1 or 2");
    if (q < 1) throw ConfigError("q must be >= 1");
    if (n_train < 1 || n_val < 1 || n_test < 1) throw ConfigError("sample sizes must be >= 1");
    for (double l : lambda_grid) {
        if (!(l >= 0.0)) throw ConfigError("lambda grid values must be >= 0");
    }
    const bool penalized =
        std::any_of(estimators.begin(), estimators.end(), [](Estimator e) {
            return e == Estimator::gdnn_ld || e == Estimator::agdnn_ld;
        });
    if (penalized && lambda_grid.empty()) throw ConfigError("lambda grid is empty");
    if (experiment == Experiment::real_data) {
        if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw ConfigError("train_fraction must lie in (0, 1)");
        }
        if (data_path.empty()) throw ConfigError("real_data needs data_path (the slump CSV)");
    }
    if (experiment == Experiment::custom &&
        (data_path.empty() || val_path.empty() || test_path.empty())) {
        throw ConfigError("custom experiments need data_path, val_path and test_path");
    }
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
    std::map<std::string, std::string> out;
    out["experiment"] = to_string(experiment);
    std::string est;
    for (std::size_t i = 0; i < estimators.size(); ++i) est += (i ? "," : "") + to_string(estimators[i]);
    out["estimators"] = est;
    out["replications"] = std::to_string(replications);
    out["base_seed"] = std::to_string(base_seed);
    std::string hid;
    for (std::size_t i = 0; i < hidden.size(); ++i) hid += (i ? "," : "") + std::to_string(hidden[i]);
    out["hidden"] = hid;
    out["eta"] = eta_fixed ? format_double(train.eta) : "grid";
    out["eta_grid"] = join(eta_grid);
    out["penalized_eta"] = format_double(effective_penalized_eta());
    out["max_epochs"] = std::to_string(train.max_epochs);
    out["patience"] = std::to_string(train.patience);
    out["early_stopping"] = train.early_stopping ? "true" : "false";
    out["init_scale"] = format_double(train.init_scale);
    out["tau1"] = format_double(train.penalty.tau1);
    out["tau2"] = format_double(train.loss.tau2);
    out["gamma"] = format_double(train.penalty.gamma);
    out["pilot_floor"] = format_double(train.penalty.pilot_floor);
    out["penalize_bias"] = train.penalty.penalize_bias ? "true" : "false";
    out["gradient_variant"] =
        train.loss.variant == GradientVariant::corrected ? "corrected" : "paper_literal";
    out["ls_reduction"] = train.loss.ls_reduction == Reduction::mean ? "mean" : "sum";
    out["selection_threshold"] = format_double(train.selection_threshold);
    out["case"] = std::to_string(example_case);
    out["q"] = std::to_string(q);
    out["error"] = to_string(error);
    out["alpha"] = format_double(alpha);
    out["outlier_shift"] = format_double(effective_outlier_shift());
    out["n_train"] = std::to_string(n_train);
    out["n_val"] = std::to_string(n_val);
    out["n_test"] = std::to_string(n_test);
    out["lambda_grid"] = join(lambda_grid);
    out["data_path"] = data_path;
    out["val_path"] = val_path;
    out["test_path"] = test_path;
    out["cv_folds"] = std::to_string(cv_folds);
    out["train_fraction"] = format_double(train_fraction);
    out["standardize"] = standardize ? "true" : "false";
    out["noise_columns"] = std::to_string(noise_columns);
    out["record_timing"] = record_timing ? "true" : "false";
    return out;
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + " has no '='");
        }
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            base.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), std::move(base));
}

}  // namespace ldnet
