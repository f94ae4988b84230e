#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ldnet/datagen.hpp"
#include "ldnet/trainer.hpp"

namespace ldnet {

enum class Experiment { example1, example2, example3, real_data, custom };

enum class Estimator { dnn_ls_ind, dnn_ls, dnn_ld, gdnn_ld, agdnn_ld };

std::string to_string(Experiment e);
std::string to_string(Estimator e);
std::string to_string(ErrorKind e);
Experiment parse_experiment(const std::string& s);
Estimator parse_estimator(const std::string& s);
ErrorKind parse_error_kind(const std::string& s);

/// Everything needed to reproduce a batch of replications. Keys of the flat
/// config file map one-to-one onto `set`.
struct ExperimentConfig {
    Experiment experiment = Experiment::example1;
    std::vector<Estimator> estimators{Estimator::dnn_ld};
    int replications = 1;
    std::uint64_t base_seed = 1;

    // Network and optimizer. Input and output widths come from the data.
    std::vector<int> hidden{10, 10};
    TrainConfig train;
    bool eta_fixed = false;
    std::vector<double> eta_grid{0.01, 0.05, 0.1, 0.3};
    // Learning rate of GDNN-LD and AGDNN-LD fits. Unset: the fixed eta, else the
    // smallest grid value (a column near zero bounces by about eta * lambda per step).
    std::optional<double> penalized_eta;

    // Simulation designs.
    int example_case = 1;
    int q = 3;
    ErrorKind error = ErrorKind::std_normal_iid;
    double alpha = 0.0;
    std::optional<double> outlier_shift;  // 7 for simulations, 5 for real data
    int n_train = 200;
    int n_val = 200;
    int n_test = 10000;

    // Penalized estimators.
    std::vector<double> lambda_grid{1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0};

    // Real data (slump) and custom CSV runs.
    std::string data_path;
    std::string val_path;
    std::string test_path;
    int cv_folds = 5;
    double train_fraction = 0.7;
    bool standardize = true;
    int noise_columns = 2;

    int workers = 1;
    bool record_timing = false;

    /// Applies one key/value pair; throws ConfigError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    double effective_outlier_shift() const;
    double effective_penalized_eta() const;

    /// Ordered key/value echo used in reports.
    std::map<std::string, std::string> echo() const;
};

/// `key = value` lines; `#` starts a comment; blank lines ignored.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

}  // namespace ldnet
