#include "ldnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "ldnet/errors.hpp"
#include "ldnet/metrics.hpp"

namespace ldnet {

void TrainConfig::validate() const {
    network.validate();
    loss.validate();
    penalty.validate(network.inputs() + 1);
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("learning rate must lie in (0, 1]");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (const auto& g : layers) m = std::max(m, g.cwiseAbs().maxCoeff());
    return m;
}

double FitReport::best_val_loss() const {
    if (best_epoch >= 1 && best_epoch <= static_cast<int>(val_trace.size())) {
        return val_trace[best_epoch - 1];
    }
    return std::numeric_limits<double>::infinity();
}

namespace {

void require_finite(const Matrix& m, int layer, const char* what) {
    if (!m.allFinite()) {
        throw NumericError(std::string("non-finite ") + what + " at layer " + std::to_string(layer),
                           layer);
    }
}

void check_data_shapes(const Dataset& data, const NetworkConfig& network, const char* name) {
    data.validate();
    if (data.n() == 0) throw ShapeError(std::string(name) + " set is empty");
    if (data.p() != network.inputs() || data.q() != network.outputs()) {
        throw ShapeError(std::string(name) + " set is " + std::to_string(data.p()) + " -> " +
                         std::to_string(data.q()) + " but the network is " +
                         std::to_string(network.inputs()) + " -> " +
                         std::to_string(network.outputs()));
    }
}

std::vector<double> dedupe(const std::vector<double>& grid) {
    std::vector<double> out;
    for (double v : grid) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

// argmin with ties resolved toward the larger lambda.
int pick_lambda(const std::vector<double>& grid, const std::vector<double>& scores) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
        if (scores[i] < scores[best] || (scores[i] == scores[best] && grid[i] > grid[best])) {
            best = i;
        }
    }
    return best;
}

TrainConfig with_lambda(const TrainConfig& base, double lambda) {
    TrainConfig cfg = base;
    if (cfg.penalty.kind == PenaltyKind::none) cfg.penalty.kind = PenaltyKind::group_lasso;
    cfg.penalty.lambda = lambda;
    return cfg;
}

TrainConfig pilot_config(const TrainConfig& base) {
    TrainConfig cfg = base;
    cfg.penalty = PenaltySpec::none();
    return cfg;
}

}  // namespace

Gradients backprop(const NetworkParams& params, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& y, const LossSpec& loss,
                   const PenaltySpec& penalty) {
    params.validate();
    if (y.size() != params.outputs()) {
        throw ShapeError("response has length " + std::to_string(y.size()) +
                         ", network predicts " + std::to_string(params.outputs()));
    }
    const ForwardTrace trace = forward(params, x);
    const int L = params.num_layers();
    Gradients grads;
    grads.layers.resize(L);

    Vector delta = output_delta(loss, y, trace.prediction);
    require_finite(delta, L, "output delta");
    for (int l = L; l >= 1; --l) {
        const Matrix& w = params.weights[l - 1];
        const Vector& below = trace.activations[l - 1];
        Matrix g(w.rows(), w.cols());
        g.col(0) = delta;
        g.rightCols(w.cols() - 1) = delta * below.transpose();
        grads.layers[l - 1] = std::move(g);
        if (l > 1) {
            const Vector e = w.rightCols(w.cols() - 1).transpose() * delta;
            delta = e.array() * below.array() * (1.0 - below.array());
            require_finite(delta, l - 1, "hidden delta");
        }
    }
    grads.layers[0] += penalty_gradient(params.first_layer(), penalty);
    return grads;
}

Gradients finite_diff_gradient(const NetworkParams& params, const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& y, const LossSpec& loss,
                               const PenaltySpec& penalty, double step) {
    if (!(step > 0.0)) throw ConfigError("finite-difference step must be > 0");
    auto objective = [&](const NetworkParams& p) {
        const Vector yhat = forward(p, x).prediction;
        return sample_loss(loss, y - yhat) + penalty_value(p.first_layer(), penalty);
    };
    NetworkParams probe = params;
    Gradients grads;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        Matrix g(params.weights[l].rows(), params.weights[l].cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            for (Eigen::Index c = 0; c < g.cols(); ++c) {
                const double orig = params.weights[l](r, c);
                probe.weights[l](r, c) = orig + step;
                const double up = objective(probe);
                probe.weights[l](r, c) = orig - step;
                const double down = objective(probe);
                probe.weights[l](r, c) = orig;
                g(r, c) = (up - down) / (2.0 * step);
            }
        }
        grads.layers.push_back(std::move(g));
    }
    return grads;
}

Gradients batch_gradient(const NetworkParams& params, const Dataset& data, const LossSpec& loss,
                         const PenaltySpec& penalty, double* objective) {
    if (data.n() == 0) throw ShapeError("gradient of an empty dataset is undefined");
    const BatchTrace trace = forward_batch(params, data.X);
    const int L = params.num_layers();
    const Eigen::Index n = data.X.rows();

    const Matrix residual = data.Y.transpose() - trace.activations[L];
    Matrix delta(residual.rows(), n);
    double total = 0.0;
    if (loss.kind == LossKind::ls) {
        delta = -2.0 * residual;
        total = residual.squaredNorm();
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double norm = residual.col(i).norm();
            total += smooth_norm(norm, loss.tau2);
            delta.col(i) =
                -smooth_norm_gradient_scale(norm, loss.tau2, loss.variant) * residual.col(i);
        }
    }
    const bool summed = loss.kind == LossKind::ls && loss.ls_reduction == Reduction::sum;
    const double factor = summed ? 1.0 : 1.0 / static_cast<double>(n);
    require_finite(delta, L, "output delta");

    Gradients grads;
    grads.layers.resize(L);
    for (int l = L; l >= 1; --l) {
        const Matrix& w = params.weights[l - 1];
        const Matrix& below = trace.activations[l - 1];
        Matrix g(w.rows(), w.cols());
        g.col(0) = delta.rowwise().sum() * factor;
        g.rightCols(w.cols() - 1).noalias() = factor * (delta * below.transpose());
        grads.layers[l - 1] = std::move(g);
        if (l > 1) {
            Matrix e = w.rightCols(w.cols() - 1).transpose() * delta;
            delta = e.array() * below.array() * (1.0 - below.array());
            require_finite(delta, l - 1, "hidden delta");
        }
    }
    grads.layers[0] += penalty_gradient(params.first_layer(), penalty);
    if (objective) {
        *objective = total * factor + penalty_value(params.first_layer(), penalty);
    }
    return grads;
}

FitReport fit(const Dataset& train, const Dataset& val, const TrainConfig& config) {
    config.validate();
    check_data_shapes(train, config.network, "training");
    check_data_shapes(val, config.network, "validation");

    NetworkParams params = init_params(config.network, config.seed, config.init_scale);
    FitReport report;
    report.config_echo = config;
    report.objective_convention =
        config.loss.kind == LossKind::ls && config.loss.ls_reduction == Reduction::sum ? "sum"
                                                                                       : "mean";
    report.train_trace.reserve(config.max_epochs);
    report.val_trace.reserve(config.max_epochs);

    double objective = 0.0;
    Gradients grads = batch_gradient(params, train, config.loss, config.penalty, &objective);
    NetworkParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    int epoch = 0;
    while (epoch < config.max_epochs) {
        ++epoch;
        for (int l = 0; l < params.num_layers(); ++l) {
            params.weights[l].noalias() -= config.eta * grads.layers[l];
        }
        try {
            grads = batch_gradient(params, train, config.loss, config.penalty, &objective);
        } catch (const NumericError&) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch), epoch);
        }
        const double val_loss = data_loss(config.loss, val.Y, predict_batch(params, val.X));
        if (!std::isfinite(objective) || !std::isfinite(val_loss)) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch), epoch);
        }
        report.train_trace.push_back(objective);
        report.val_trace.push_back(val_loss);
        if (val_loss < best_val) {
            best_val = val_loss;
            best = params;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (config.early_stopping && ++since_best >= config.patience) {
            break;
        }
    }
    report.stopped_epoch = epoch;
    if (config.early_stopping) {
        report.params = std::move(best);
    } else {
        report.params = std::move(params);
        report.best_epoch = epoch;
    }
    report.selected_mask = select_variables(report.params, config.selection_threshold).selected;
    return report;
}

std::vector<FitReport> fit_independent(const Dataset& train, const Dataset& val,
                                       const TrainConfig& config) {
    if (config.loss.kind != LossKind::ls) {
        throw ConfigError("the per-response baseline is defined for the LS loss only");
    }
    if (train.q() != config.network.outputs()) {
        throw ShapeError("network output width must equal the number of responses");
    }
    TrainConfig single = config;
    single.network.layer_widths.back() = 1;
    std::vector<FitReport> reports;
    reports.reserve(train.q());
    for (int k = 0; k < train.q(); ++k) {
        reports.push_back(fit(train.response_column(k), val.response_column(k), single));
    }
    return reports;
}

Matrix predict_independent(const std::vector<FitReport>& reports, const Matrix& X) {
    Matrix out(X.rows(), static_cast<Eigen::Index>(reports.size()));
    for (std::size_t k = 0; k < reports.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = predict_batch(reports[k].params, X).col(0);
    }
    return out;
}

LossSpec selection_loss(const TrainConfig& config) {
    if (config.loss.kind == LossKind::ld) {
        return LossSpec::least_distance(config.loss.tau2, config.loss.variant);
    }
    return LossSpec::least_distance();
}

LambdaSearch tune_lambda(const Dataset& train, const Dataset& val, const std::vector<double>& grid,
                         const TrainConfig& base_config) {
    if (grid.empty()) throw ConfigError("lambda grid is empty");
    LambdaSearch search;
    search.grid = dedupe(grid);
    const LossSpec scorer = selection_loss(base_config);
    for (double lambda : search.grid) {
        FitReport report = fit(train, val, with_lambda(base_config, lambda));
        search.scores.push_back(empirical_loss(report.params, val, scorer));
        search.reports.push_back(std::move(report));
    }
    search.best_index = pick_lambda(search.grid, search.scores);
    search.best_lambda = search.grid[search.best_index];
    return search;
}

AdaptiveFit fit_adaptive(const Dataset& train, const Dataset& val, const std::vector<double>& grid,
                         const TrainConfig& base_config) {
    AdaptiveFit out;
    out.pilot = fit(train, val, pilot_config(base_config));
    TrainConfig cfg = base_config;
    cfg.penalty.kind = PenaltyKind::adaptive_group_lasso;
    cfg.penalty.pilot_norms = group_norms(out.pilot.params.first_layer());
    out.search = tune_lambda(train, val, grid, cfg);
    return out;
}

std::vector<std::vector<int>> kfold_indices(int n, int folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("k-fold needs at least two folds");
    if (n < folds) throw ConfigError("fewer rows than folds");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(seed);
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<std::vector<int>> out(folds);
    int start = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = n / folds + (f < n % folds ? 1 : 0);
        out[f].assign(order.begin() + start, order.begin() + start + size);
        start += size;
    }
    return out;
}

CvLambdaSearch tune_lambda_cv(const Dataset& data, int folds, const std::vector<double>& grid,
                              const TrainConfig& base_config, std::uint64_t fold_seed) {
    if (grid.empty()) throw ConfigError("lambda grid is empty");
    CvLambdaSearch out;
    out.grid = dedupe(grid);
    out.mean_scores.assign(out.grid.size(), 0.0);
    out.mean_best_epoch.assign(out.grid.size(), 0.0);
    const LossSpec scorer = selection_loss(base_config);
    const auto parts = kfold_indices(data.n(), folds, fold_seed);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> rest;
        for (int g = 0; g < folds; ++g) {
            if (g != f) rest.insert(rest.end(), parts[g].begin(), parts[g].end());
        }
        const Dataset train = data.rows(rest);
        const Dataset hold = data.rows(parts[f]);
        TrainConfig cfg = base_config;
        if (cfg.penalty.kind == PenaltyKind::adaptive_group_lasso && !cfg.penalty.pilot_norms) {
            const FitReport pilot = fit(train, hold, pilot_config(base_config));
            cfg.penalty.pilot_norms = group_norms(pilot.params.first_layer());
        }
        for (std::size_t i = 0; i < out.grid.size(); ++i) {
            const FitReport report = fit(train, hold, with_lambda(cfg, out.grid[i]));
            out.mean_scores[i] += empirical_loss(report.params, hold, scorer) / folds;
            out.mean_best_epoch[i] += static_cast<double>(report.best_epoch) / folds;
        }
    }
    out.best_lambda = out.grid[pick_lambda(out.grid, out.mean_scores)];
    return out;
}

FitReport fit_eta_grid(const Dataset& train, const Dataset& val, const TrainConfig& config,
                       const std::vector<double>& eta_grid) {
    if (eta_grid.empty()) throw ConfigError("learning-rate grid is empty");
    std::optional<FitReport> best;
    std::optional<NumericError> last_error;
    for (double eta : eta_grid) {
        TrainConfig cfg = config;
        cfg.eta = eta;
        try {
            FitReport report = fit(train, val, cfg);
            if (!best || report.best_val_loss() < best->best_val_loss()) best = std::move(report);
        } catch (const NumericError& e) {
            last_error = e;
        }
    }
    if (!best) throw *last_error;
    return std::move(*best);
}

double select_eta(const Dataset& train, const Dataset& val, const TrainConfig& config,
                  const std::vector<double>& eta_grid) {
    return fit_eta_grid(train, val, config, eta_grid).config_echo.eta;
}

}  // namespace ldnet
