#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldnet/dataset.hpp"
#include "ldnet/losses.hpp"
#include "ldnet/network.hpp"
#include "ldnet/penalties.hpp"

namespace ldnet {

struct TrainConfig {
    NetworkConfig network;
    LossSpec loss;
    PenaltySpec penalty;
    double eta = 0.1;
    int max_epochs = 5000;
    int patience = 200;
    std::uint64_t seed = 0;
    double init_scale = 0.5;
    // When false the run lasts exactly max_epochs and returns the last iterate.
    bool early_stopping = true;
    double selection_threshold = 1e-3;

    void validate() const;
};

/// One matrix per layer, shaped like NetworkParams::weights.
struct Gradients {
    std::vector<Matrix> layers;

    double max_abs() const;
};

struct FitReport {
    NetworkParams params;
    std::vector<double> train_trace;  // penalized training objective after each epoch
    std::vector<double> val_trace;    // unpenalized validation loss after each epoch
    int stopped_epoch = 0;
    int best_epoch = 0;  // 1-based; 0 means the initial parameters were kept
    Mask selected_mask;
    TrainConfig config_echo;
    std::string objective_convention;  // "mean" or "sum" (LS only)

    double best_val_loss() const;
};

/// Single-sample gradient of loss(y, forward(x)) + penalty(W1).
Gradients backprop(const NetworkParams& params, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y, const LossSpec& loss,
                   const PenaltySpec& penalty);

/// Central differences of the same single-sample objective, one weight at a time.
Gradients finite_diff_gradient(const NetworkParams& params, const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& y, const LossSpec& loss,
                               const PenaltySpec& penalty, double step = 1e-6);

/// Reduced data-loss gradient over the whole dataset plus one penalty gradient.
/// Returns the objective at `params` through `objective`.
Gradients batch_gradient(const NetworkParams& params, const Dataset& data, const LossSpec& loss,
                         const PenaltySpec& penalty, double* objective = nullptr);

/// Full-batch gradient descent with validation early stopping.
FitReport fit(const Dataset& train, const Dataset& val, const TrainConfig& config);

/// q single-output LS networks sharing every hyperparameter and the seed.
std::vector<FitReport> fit_independent(const Dataset& train, const Dataset& val,
                                       const TrainConfig& config);

/// Stacks the outputs of per-response networks into an n x q prediction.
Matrix predict_independent(const std::vector<FitReport>& reports, const Matrix& X);

struct LambdaSearch {
    double best_lambda = 0.0;
    int best_index = 0;
    std::vector<double> grid;    // deduplicated, in first-seen order
    std::vector<double> scores;  // unpenalized LD loss on validation (or CV mean)
    std::vector<FitReport> reports;

    const FitReport& best() const { return reports[best_index]; }
};

/// Validation score used for lambda selection: unpenalized LD loss, using the
/// config's tau2 when the loss is LD.
LossSpec selection_loss(const TrainConfig& config);

/// One fit per distinct lambda, best validation LD loss wins, ties go to the larger lambda.
LambdaSearch tune_lambda(const Dataset& train, const Dataset& val, const std::vector<double>& grid,
                         const TrainConfig& base_config);

struct AdaptiveFit {
    FitReport pilot;
    LambdaSearch search;
};

/// Unpenalized LD pilot, adaptive group weights from its first layer, then a lambda search.
AdaptiveFit fit_adaptive(const Dataset& train, const Dataset& val, const std::vector<double>& grid,
                         const TrainConfig& base_config);

/// Shuffled k-fold partition of 0..n-1 (fold sizes differ by at most one).
std::vector<std::vector<int>> kfold_indices(int n, int folds, std::uint64_t seed);

struct CvLambdaSearch {
    double best_lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_scores;
    std::vector<double> mean_best_epoch;
};

/// k-fold lambda selection. Each fold's held-out part serves as the early-stopping
/// set and the scoring set. Adaptive penalties without pilot norms get a pilot per fold.
CvLambdaSearch tune_lambda_cv(const Dataset& data, int folds, const std::vector<double>& grid,
                              const TrainConfig& base_config, std::uint64_t fold_seed);

/// Fits once per learning rate and keeps the report with the lowest best
/// validation loss. Diverging rates are skipped; throws if all diverge.
FitReport fit_eta_grid(const Dataset& train, const Dataset& val, const TrainConfig& config,
                       const std::vector<double>& eta_grid);

/// Learning rate chosen by fit_eta_grid.
double select_eta(const Dataset& train, const Dataset& val, const TrainConfig& config,
                  const std::vector<double>& eta_grid);

}  // namespace ldnet
