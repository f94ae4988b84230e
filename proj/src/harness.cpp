#include "ldnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "ldnet/csv.hpp"
#include "ldnet/errors.hpp"
#include "ldnet/metrics.hpp"
#include "ldnet/rng.hpp"
#include "ldnet/slump.hpp"

namespace ldnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream indices below a replication seed.
enum Stream : std::uint64_t {
    kTrainData = 1,
    kValData = 2,
    kTestData = 3,
    kContamination = 4,
    kInit = 5,
    kSplit = 6,
    kFolds = 8,
};

struct Context {
    Dataset train;
    Dataset val;
    Dataset test;
    Mask truth;
    std::optional<Mask> noise_mask;  // real data: count NIC over injected noise only
};

// A fitted estimator: one network, or one per response for the IND baseline.
struct Fitted {
    std::vector<NetworkParams> nets;
    double lambda = 0.0;
    int epochs = 0;
    double eta = 0.0;

    Matrix predict(const Matrix& X) const {
        if (nets.size() == 1) return predict_batch(nets[0], X);
        Matrix out(X.rows(), static_cast<Eigen::Index>(nets.size()));
        for (std::size_t k = 0; k < nets.size(); ++k) {
            out.col(static_cast<Eigen::Index>(k)) = predict_batch(nets[k], X).col(0);
        }
        return out;
    }
};

Fitted from_report(const FitReport& r, double lambda = 0.0) {
    return Fitted{{r.params}, lambda, r.stopped_epoch, r.config_echo.eta};
}

TrainConfig base_train_config(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed) {
    TrainConfig t = cfg.train;
    t.network.layer_widths.clear();
    t.network.layer_widths.push_back(data.p());
    for (int h : cfg.hidden) t.network.layer_widths.push_back(h);
    t.network.layer_widths.push_back(data.q());
    t.seed = seed;
    t.penalty = PenaltySpec::none();
    t.penalty.tau1 = cfg.train.penalty.tau1;
    t.penalty.gamma = cfg.train.penalty.gamma;
    t.penalty.pilot_floor = cfg.train.penalty.pilot_floor;
    t.penalty.penalize_bias = cfg.train.penalty.penalize_bias;
    t.penalty.variant = cfg.train.penalty.variant;
    return t;
}

TrainConfig as_ld(TrainConfig t) {
    t.loss.kind = LossKind::ld;
    return t;
}

TrainConfig as_ls(TrainConfig t) {
    t.loss.kind = LossKind::ls;
    return t;
}

FitReport fit_maybe_grid(const Dataset& train, const Dataset& val, const TrainConfig& t,
                         const ExperimentConfig& cfg) {
    if (cfg.eta_fixed) return fit(train, val, t);
    return fit_eta_grid(train, val, t, cfg.eta_grid);
}

// ---- simulated designs: fixed train / validation / test sets ----

class SimulationRunner {
public:
    SimulationRunner(const ExperimentConfig& cfg, const Context& ctx, std::uint64_t seed)
        : cfg_(cfg), ctx_(ctx), base_(base_train_config(cfg, ctx.train, derive_seed(seed, kInit))) {}

    Fitted run(Estimator e) {
        switch (e) {
            case Estimator::dnn_ls: return from_report(fit_maybe_grid(ctx_.train, ctx_.val, as_ls(base_), cfg_));
            case Estimator::dnn_ls_ind: return independent();
            case Estimator::dnn_ld: return from_report(ld_fit());
            case Estimator::gdnn_ld: return penalized(PenaltyKind::group_lasso);
            case Estimator::agdnn_ld: return penalized(PenaltyKind::adaptive_group_lasso);
        }
        throw ConfigError("unknown estimator");
    }

private:
    const FitReport& ld_fit() {
        if (!ld_) ld_ = fit_maybe_grid(ctx_.train, ctx_.val, as_ld(base_), cfg_);
        return *ld_;
    }

    Fitted independent() {
        TrainConfig single = as_ls(base_);
        single.network.layer_widths.back() = 1;
        Fitted out;
        for (int k = 0; k < ctx_.train.q(); ++k) {
            const FitReport r = fit_maybe_grid(ctx_.train.response_column(k),
                                               ctx_.val.response_column(k), single, cfg_);
            out.nets.push_back(r.params);
            out.epochs = std::max(out.epochs, r.stopped_epoch);
            out.eta = r.config_echo.eta;
        }
        return out;
    }

    Fitted penalized(PenaltyKind kind) {
        const FitReport& pilot = ld_fit();
        TrainConfig t = as_ld(base_);
        t.eta = cfg_.effective_penalized_eta();
        t.penalty.kind = kind;
        if (kind == PenaltyKind::adaptive_group_lasso) {
            t.penalty.pilot_norms = group_norms(pilot.params.first_layer());
        }
        const LambdaSearch search = tune_lambda(ctx_.train, ctx_.val, cfg_.lambda_grid, t);
        return from_report(search.best(), search.best_lambda);
    }

    const ExperimentConfig& cfg_;
    const Context& ctx_;
    TrainConfig base_;
    std::optional<FitReport> ld_;
};

// ---- real data: k-fold CV on the training part, refit, score on the test part ----

class CrossValidatedRunner {
public:
    CrossValidatedRunner(const ExperimentConfig& cfg, const Context& ctx, std::uint64_t seed)
        : cfg_(cfg),
          ctx_(ctx),
          base_(base_train_config(cfg, ctx.train, derive_seed(seed, kInit))),
          fold_seed_(derive_seed(seed, kFolds)) {
        base_.eta = cfg.eta_fixed ? cfg.train.eta : pick_eta();
    }

    Fitted run(Estimator e) {
        switch (e) {
            case Estimator::dnn_ls: return unpenalized(as_ls(base_));
            case Estimator::dnn_ls_ind: return independent();
            case Estimator::dnn_ld: return ld_final();
            case Estimator::gdnn_ld: return penalized(PenaltyKind::group_lasso);
            case Estimator::agdnn_ld: return penalized(PenaltyKind::adaptive_group_lasso);
        }
        throw ConfigError("unknown estimator");
    }

private:
    double pick_eta() {
        double best_eta = cfg_.eta_grid.front();
        double best = std::numeric_limits<double>::infinity();
        for (double eta : cfg_.eta_grid) {
            TrainConfig t = as_ld(base_);
            t.eta = eta;
            double score = std::numeric_limits<double>::infinity();
            try {
                score = tune_lambda_cv(ctx_.train, cfg_.cv_folds, {0.0}, t, fold_seed_).mean_scores[0];
            } catch (const NumericError&) {
            }
            if (score < best) {
                best = score;
                best_eta = eta;
            }
        }
        return best_eta;
    }

    static int epochs_from(double mean_best_epoch) {
        return std::max(1, static_cast<int>(std::lround(mean_best_epoch)));
    }

    FitReport refit(const Dataset& train, TrainConfig t, int epochs) const {
        t.early_stopping = false;
        t.max_epochs = epochs;
        return fit(train, train, t);
    }

    Fitted unpenalized(const TrainConfig& t) {
        const CvLambdaSearch cv = tune_lambda_cv(ctx_.train, cfg_.cv_folds, {0.0}, t, fold_seed_);
        return from_report(refit(ctx_.train, t, epochs_from(cv.mean_best_epoch[0])));
    }

    const FitReport& ld_report() {
        if (!ld_) {
            const TrainConfig t = as_ld(base_);
            const CvLambdaSearch cv = tune_lambda_cv(ctx_.train, cfg_.cv_folds, {0.0}, t, fold_seed_);
            ld_ = refit(ctx_.train, t, epochs_from(cv.mean_best_epoch[0]));
        }
        return *ld_;
    }

    Fitted ld_final() { return from_report(ld_report()); }

    Fitted independent() {
        TrainConfig single = as_ls(base_);
        single.network.layer_widths.back() = 1;
        Fitted out;
        for (int k = 0; k < ctx_.train.q(); ++k) {
            const Dataset col = ctx_.train.response_column(k);
            const CvLambdaSearch cv = tune_lambda_cv(col, cfg_.cv_folds, {0.0}, single, fold_seed_);
            const FitReport r = refit(col, single, epochs_from(cv.mean_best_epoch[0]));
            out.nets.push_back(r.params);
            out.epochs = std::max(out.epochs, r.stopped_epoch);
            out.eta = single.eta;
        }
        return out;
    }

    Fitted penalized(PenaltyKind kind) {
        TrainConfig t = as_ld(base_);
        t.eta = cfg_.effective_penalized_eta();
        t.penalty.kind = kind;
        // Adaptive CV fits one pilot per fold because pilot_norms is left empty.
        const CvLambdaSearch cv = tune_lambda_cv(ctx_.train, cfg_.cv_folds, cfg_.lambda_grid, t, fold_seed_);
        const auto it = std::find(cv.grid.begin(), cv.grid.end(), cv.best_lambda);
        const int epochs = epochs_from(cv.mean_best_epoch[it - cv.grid.begin()]);
        if (kind == PenaltyKind::adaptive_group_lasso) {
            t.penalty.pilot_norms = group_norms(ld_report().params.first_layer());
        }
        t.penalty.lambda = cv.best_lambda;
        return from_report(refit(ctx_.train, t, epochs), cv.best_lambda);
    }

    const ExperimentConfig& cfg_;
    const Context& ctx_;
    TrainConfig base_;
    std::uint64_t fold_seed_;
    std::optional<FitReport> ld_;
};

Context simulated_context(const ExperimentConfig& cfg, std::uint64_t seed) {
    SimulatedData sim = simulate_data(cfg, seed);
    Context ctx;
    ctx.train = std::move(sim.train);
    ctx.val = std::move(sim.val);
    ctx.test = std::move(sim.test);
    ctx.truth = *ctx.train.relevant_mask;
    return ctx;
}

ReplicationRow evaluate(const std::string& name, const Fitted& fitted, const Context& ctx) {
    ReplicationRow row;
    row.estimator = name;
    const Matrix pred = fitted.predict(ctx.test.X);
    row.mse = ctx.test.true_mean ? mean_squared(*ctx.test.true_mean, pred) : kNaN;
    row.mspe = mean_squared(ctx.test.Y, pred);

    Mask selected(ctx.truth.size(), false);
    double frob_sq = 0.0;
    for (const auto& net : fitted.nets) {
        const Mask s = select_variables(net, kSelectionThreshold).selected;
        for (std::size_t j = 0; j < s.size(); ++j) selected[j] = selected[j] || s[j];
        const double f = irrelevant_weight_frobenius(net, ctx.truth);
        frob_sq += f * f;
    }
    if (ctx.noise_mask) {
        for (std::size_t j = 0; j < selected.size(); ++j) {
            if (!selected[j]) continue;
            if (ctx.truth[j]) ++row.nc;
            if ((*ctx.noise_mask)[j]) ++row.nic;
        }
        row.exact_match = selected == ctx.truth;
    } else {
        const SelectionCounts c = selection_counts(selected, ctx.truth);
        row.nc = c.nc;
        row.nic = c.nic;
        row.exact_match = c.exact_match;
    }
    row.frobenius = std::sqrt(frob_sq);
    row.lambda_selected = fitted.lambda;
    row.epochs = fitted.epochs;
    row.eta = fitted.eta;
    return row;
}

template <class Runner>
std::vector<ReplicationRow> run_estimators(const ExperimentConfig& cfg, const Context& ctx,
                                           int replication, std::uint64_t seed) {
    Runner runner(cfg, ctx, seed);
    const Matrix dcor = dcor_matrix(ctx.train.Y);
    std::vector<ReplicationRow> rows;
    for (Estimator e : cfg.estimators) {
        const auto start = std::chrono::steady_clock::now();
        ReplicationRow row;
        try {
            row = evaluate(to_string(e), runner.run(e), ctx);
        } catch (const NumericError& err) {
            row = ReplicationRow{};
            row.estimator = to_string(e);
            row.ok = false;
            row.error = err.what();
            row.mse = row.mspe = row.frobenius = row.lambda_selected = kNaN;
        }
        const auto stop = std::chrono::steady_clock::now();
        row.replication = replication;
        row.seed = seed;
        row.dcor = dcor;
        row.wall_ms = cfg.record_timing
                          ? std::chrono::duration<double, std::milli>(stop - start).count()
                          : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
    if (xs.empty()) return {kNaN, kNaN};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, kNaN};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

}  // namespace

SimulatedData simulate_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    ErrorSpec err;
    err.kind = cfg.error;
    SimulatedData out;
    switch (cfg.experiment) {
        case Experiment::example1:
        case Experiment::example2: {
            const int case_id = cfg.experiment == Experiment::example2 ? 1 : cfg.example_case;
            out.train = gen_example1(case_id, cfg.q, cfg.n_train, err, derive_seed(seed, kTrainData));
            out.val = gen_example1(case_id, cfg.q, cfg.n_val, err, derive_seed(seed, kValData));
            out.test = gen_example1(case_id, cfg.q, cfg.n_test, err, derive_seed(seed, kTestData));
            break;
        }
        case Experiment::example3:
            out.train = gen_example3(cfg.n_train, err, derive_seed(seed, kTrainData));
            out.val = gen_example3(cfg.n_val, err, derive_seed(seed, kValData));
            out.test = gen_example3(cfg.n_test, err, derive_seed(seed, kTestData));
            break;
        default:
            throw ConfigError("experiment '" + to_string(cfg.experiment) + "' is not a simulated design");
    }
    if (cfg.alpha > 0.0) {
        out.train = contaminate(out.train, cfg.alpha, cfg.effective_outlier_shift(),
                                derive_seed(seed, kContamination));
    }
    return out;
}

std::uint64_t replication_seed(std::uint64_t base_seed, int replication) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(replication));
}

const Aggregate& ReplicationTable::aggregate(const std::string& estimator) const {
    for (const auto& a : aggregates) {
        if (a.estimator == estimator) return a;
    }
    throw ConfigError("no aggregate for estimator '" + estimator + "'");
}

std::vector<const ReplicationRow*> ReplicationTable::rows_for(const std::string& estimator) const {
    std::vector<const ReplicationRow*> out;
    for (const auto& r : rows) {
        if (r.estimator == estimator) out.push_back(&r);
    }
    return out;
}

std::vector<Aggregate> aggregate_rows(const std::vector<ReplicationRow>& rows) {
    std::vector<std::string> names;
    for (const auto& r : rows) {
        if (std::find(names.begin(), names.end(), r.estimator) == names.end()) {
            names.push_back(r.estimator);
        }
    }
    std::vector<Aggregate> out;
    for (const auto& name : names) {
        Aggregate a;
        a.estimator = name;
        std::vector<double> mse, mspe, nc, nic, exact, frob, lambda, epochs, wall;
        for (const auto& r : rows) {
            if (r.estimator != name) continue;
            if (!r.ok) {
                ++a.failures;
                continue;
            }
            ++a.count;
            a.nt += r.exact_match ? 1 : 0;
            mse.push_back(r.mse);
            mspe.push_back(r.mspe);
            nc.push_back(r.nc);
            nic.push_back(r.nic);
            exact.push_back(r.exact_match ? 1.0 : 0.0);
            frob.push_back(r.frobenius);
            lambda.push_back(r.lambda_selected);
            epochs.push_back(r.epochs);
            wall.push_back(r.wall_ms);
        }
        std::tie(a.mean_mse, a.se_mse) = mean_se(mse);
        std::tie(a.mean_mspe, a.se_mspe) = mean_se(mspe);
        std::tie(a.mean_nc, a.se_nc) = mean_se(nc);
        std::tie(a.mean_nic, a.se_nic) = mean_se(nic);
        std::tie(a.mean_exact, a.se_exact) = mean_se(exact);
        std::tie(a.mean_frobenius, a.se_frobenius) = mean_se(frob);
        std::tie(a.mean_lambda, a.se_lambda) = mean_se(lambda);
        std::tie(a.mean_epochs, a.se_epochs) = mean_se(epochs);
        std::tie(a.mean_wall_ms, a.se_wall_ms) = mean_se(wall);
        out.push_back(a);
    }
    return out;
}

ReplicationTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    ReplicationTable table;
    table.experiment = to_string(config.experiment);
    table.config = config.echo();

    std::optional<SlumpData> slump;
    std::optional<Context> custom;
    if (config.experiment == Experiment::real_data) {
        slump = load_slump_csv(config.data_path);
        const int signals =
            static_cast<int>(std::count(slump->signal_mask.begin(), slump->signal_mask.end(), true));
        if (signals != slump->data.p()) {
            table.warnings.push_back(
                std::to_string(slump->data.p()) + " raw predictors ingested, " +
                std::to_string(signals) + " of them marked as signals");
        }
    } else if (config.experiment == Experiment::custom) {
        Context ctx;
        ctx.train = import_dataset_csv(config.data_path);
        ctx.val = import_dataset_csv(config.val_path);
        ctx.test = import_dataset_csv(config.test_path);
        ctx.truth = ctx.train.relevant_mask.value_or(Mask(ctx.train.p(), true));
        custom = std::move(ctx);
    }

    auto replicate = [&](int r) {
        const std::uint64_t seed = replication_seed(config.base_seed, r);
        if (slump) {
            SlumpOptions opts;
            opts.train_fraction = config.train_fraction;
            opts.noise_columns = config.noise_columns;
            opts.standardize = config.standardize;
            opts.outlier_fraction = config.alpha;
            opts.outlier_shift = config.effective_outlier_shift();
            SlumpSplit split = prepare_slump(*slump, opts, derive_seed(seed, kSplit));
            Context ctx;
            ctx.train = std::move(split.train);
            ctx.test = std::move(split.test);
            ctx.truth = *ctx.train.relevant_mask;
            ctx.noise_mask = std::move(split.noise_mask);
            return run_estimators<CrossValidatedRunner>(config, ctx, r, seed);
        }
        if (custom) return run_estimators<SimulationRunner>(config, *custom, r, seed);
        const Context ctx = simulated_context(config, seed);
        return run_estimators<SimulationRunner>(config, ctx, r, seed);
    };

    std::vector<std::vector<ReplicationRow>> slots(config.replications);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (int r = next++; r < config.replications; r = next++) {
            try {
                slots[r] = replicate(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int threads = std::min(config.workers, config.replications);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (auto& slot : slots) {
        for (auto& row : slot) table.rows.push_back(std::move(row));
    }
    table.aggregates = aggregate_rows(table.rows);
    int failed = 0;
    for (const auto& a : table.aggregates) failed += a.failures;
    if (failed > 0) {
        table.warnings.push_back(std::to_string(failed) +
                                 " fits aborted and were excluded from the aggregates");
    }
    return table;
}

}  // namespace ldnet
