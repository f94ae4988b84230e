#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ldnet/datagen.hpp"
#include "ldnet/errors.hpp"
#include "ldnet/trainer.hpp"

using namespace ldnet;

namespace {

// Independent oracle: central differences of the one-sample penalized objective.
std::vector<Matrix> fd_objective(const NetworkParams& params, const Vector& x, const Vector& y,
                                 const LossSpec& loss, const PenaltySpec& pen, double h = 1e-6) {
    Dataset one;
    one.X = x.transpose();
    one.Y = y.transpose();
    std::vector<Matrix> out;
    NetworkParams probe = params;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        Matrix g(params.weights[l].rows(), params.weights[l].cols());
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            const double orig = params.weights[l].data()[i];
            probe.weights[l].data()[i] = orig + h;
            const double up = empirical_objective(probe, one, loss, pen);
            probe.weights[l].data()[i] = orig - h;
            const double down = empirical_objective(probe, one, loss, pen);
            probe.weights[l].data()[i] = orig;
            g.data()[i] = (up - down) / (2 * h);
        }
        out.push_back(g);
    }
    return out;
}

double max_rel(const Gradients& g, const std::vector<Matrix>& fd) {
    double worst = 0.0;
    for (std::size_t l = 0; l < fd.size(); ++l) {
        for (Eigen::Index i = 0; i < fd[l].size(); ++i) {
            const double a = g.layers[l].data()[i];
            worst = std::max(worst, std::abs(a - fd[l].data()[i]) / std::max(1.0, std::abs(a)));
        }
    }
    return worst;
}

Dataset toy_curve(int n, std::uint64_t seed, double outlier_frac = 0.0, double shift = 0.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::normal_distribution<double> z(0.0, 0.1);
    Dataset d;
    d.X.resize(n, 1);
    d.Y.resize(n, 1);
    Matrix mean(n, 1);
    for (int i = 0; i < n; ++i) {
        d.X(i, 0) = u(gen);
        mean(i, 0) = std::sin(d.X(i, 0));
        d.Y(i, 0) = mean(i, 0) + z(gen);
        if (i < static_cast<int>(outlier_frac * n)) d.Y(i, 0) += shift;
    }
    d.true_mean = mean;
    return d;
}

Dataset tanh_data(int n, int p, int q, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Dataset d;
    d.X.resize(n, p);
    d.Y.resize(n, q);
    for (Eigen::Index i = 0; i < d.X.size(); ++i) d.X.data()[i] = z(gen);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < q; ++k) d.Y(i, k) = std::tanh(d.X(i, 0)) * (k + 1) + 0.3 * z(gen);
    return d;
}

double mean_sq_error(const Matrix& a, const Matrix& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

TrainConfig small_config(std::vector<int> widths, LossSpec loss) {
    TrainConfig t;
    t.network.layer_widths = std::move(widths);
    t.loss = loss;
    t.eta = 0.1;
    t.max_epochs = 300;
    t.patience = 50;
    t.seed = 3;
    return t;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("zero residual gives a zero loss gradient") {
    const NetworkParams p = init_params(NetworkConfig{{2, 4, 3}}, 1);
    const Vector x = Vector::Constant(2, 0.3);
    const Vector y = forward(p, x).prediction;
    for (const LossSpec& loss : {LossSpec::least_squares(), LossSpec::least_distance()}) {
        const Gradients g = backprop(p, x, y, loss, PenaltySpec::none());
        CHECK(g.max_abs() == 0.0);
    }
}

TEST_CASE("LS output gradient on a single identity layer") {
    NetworkParams p = zero_params(NetworkConfig{{1, 2}});
    p.weights[0].col(1) << 1.0, 1.0;
    const Vector x = Vector::Ones(1);
    Vector y(2);
    y << 2.0, -1.0;  // residual (1, -2)
    const Gradients g = backprop(p, x, y, LossSpec::least_squares(), PenaltySpec::none());
    CHECK(g.layers[0](0, 1) == -2.0);
    CHECK(g.layers[0](1, 1) == 4.0);
}

TEST_CASE("backprop matches finite differences on random configurations") {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<std::vector<int>> shapes{{1, 3, 2}, {2, 10, 10, 3}, {4, 5, 1}};
    int checked = 0;
    for (int t = 0; t < 108; ++t) {
        const auto& shape = shapes[t % 3];
        const NetworkParams p = init_params(NetworkConfig{shape}, gen(), 1.0);
        Vector x(shape.front()), y(shape.back());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 2 * u(gen);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = 2 * u(gen);
        const LossSpec loss = (t / 3) % 2 ? LossSpec::least_squares() : LossSpec::least_distance();
        PenaltySpec pen = PenaltySpec::none();
        if ((t / 6) % 3 == 1) pen = PenaltySpec::group_lasso(0.05);
        if ((t / 6) % 3 == 2) {
            Vector norms = Vector::Constant(shape.front() + 1, 0.5);
            pen = PenaltySpec::adaptive(0.05, norms);
        }
        if (loss.kind == LossKind::ld &&
            std::abs((y - forward(p, x).prediction).norm() - loss.tau2) < 1e-4) {
            continue;
        }
        const Gradients bp = backprop(p, x, y, loss, pen);
        const auto fd = fd_objective(p, x, y, loss, pen);
        CHECK(max_rel(bp, fd) < 1e-5);
        const Gradients lib_fd = finite_diff_gradient(p, x, y, loss, pen);
        CHECK(max_rel(bp, lib_fd.layers) < 1e-5);
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("finite differences vanish for the zero function") {
    const NetworkParams p = zero_params(NetworkConfig{{2, 3, 2}});
    const Gradients g = finite_diff_gradient(p, Vector::Ones(2), Vector::Zero(2),
                                             LossSpec::least_squares(), PenaltySpec::none());
    CHECK(g.max_abs() == 0.0);
    CHECK_THROWS_AS(finite_diff_gradient(p, Vector::Ones(2), Vector::Zero(2), LossSpec::least_squares(),
                                         PenaltySpec::none(), 0.0),
                    ConfigError);
}

TEST_CASE("mirrored residual flips the LD gradient") {
    const NetworkParams p = init_params(NetworkConfig{{2, 5, 3}}, 8);
    const Vector x = Vector::LinSpaced(2, -0.5, 0.5);
    const Vector yhat = forward(p, x).prediction;
    Vector r(3);
    r << 0.4, -1.1, 0.7;
    const Gradients a = backprop(p, x, yhat + r, LossSpec::least_distance(), PenaltySpec::none());
    const Gradients b = backprop(p, x, yhat - r, LossSpec::least_distance(), PenaltySpec::none());
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK((a.layers[l] + b.layers[l]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("batch gradient is the mean of sample gradients plus one penalty gradient") {
    const NetworkParams p = init_params(NetworkConfig{{3, 6, 2}}, 4);
    const Dataset d = tanh_data(12, 3, 2, 6);
    const PenaltySpec pen = PenaltySpec::group_lasso(0.1);
    double obj = 0.0;
    const Gradients batch = batch_gradient(p, d, LossSpec::least_distance(), pen, &obj);
    std::vector<Matrix> sum;
    for (const auto& w : p.weights) sum.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (int i = 0; i < d.n(); ++i) {
        const Gradients g = backprop(p, d.X.row(i).transpose(), d.Y.row(i).transpose(),
                                     LossSpec::least_distance(), PenaltySpec::none());
        for (std::size_t l = 0; l < sum.size(); ++l) sum[l] += g.layers[l] / d.n();
    }
    sum[0] += penalty_gradient(p.first_layer(), pen);
    for (std::size_t l = 0; l < sum.size(); ++l) {
        CHECK((batch.layers[l] - sum[l]).cwiseAbs().maxCoeff() < 1e-13);
    }
    CHECK(obj == doctest::Approx(empirical_objective(p, d, LossSpec::least_distance(), pen)).epsilon(1e-13));
}

TEST_CASE("training objective decreases on a noiseless toy") {
    Dataset d;
    d.X = Matrix(40, 1);
    d.X.col(0) = Vector::LinSpaced(40, -1.0, 1.0);
    d.Y = d.X;
    TrainConfig t = small_config({1, 4, 1}, LossSpec::least_squares());
    t.eta = 0.01;
    t.max_epochs = 50;
    t.early_stopping = false;
    const FitReport r = fit(d, d, t);
    REQUIRE(r.train_trace.size() == 50);
    for (std::size_t e = 1; e < r.train_trace.size(); ++e) CHECK(r.train_trace[e] < r.train_trace[e - 1]);
}

TEST_CASE("trace lengths, early stopping and reproducibility") {
    const Dataset train = tanh_data(40, 2, 2, 1);
    const Dataset val = tanh_data(40, 2, 2, 2);
    TrainConfig t = small_config({2, 5, 2}, LossSpec::least_distance());
    t.eta = 0.3;
    t.patience = 10;
    t.max_epochs = 2000;
    const FitReport r = fit(train, val, t);
    CHECK(r.train_trace.size() == static_cast<std::size_t>(r.stopped_epoch));
    CHECK(r.val_trace.size() == static_cast<std::size_t>(r.stopped_epoch));
    const double min_val = *std::min_element(r.val_trace.begin(), r.val_trace.end());
    CHECK(r.best_val_loss() == min_val);
    CHECK(empirical_loss(r.params, val, t.loss) == doctest::Approx(min_val).epsilon(1e-13));
    CHECK(r.stopped_epoch - r.best_epoch <= t.patience);
    CHECK(r.selected_mask.size() == 2);

    const FitReport again = fit(train, val, t);
    CHECK(again.params == r.params);
    CHECK(again.train_trace == r.train_trace);
    CHECK(again.val_trace == r.val_trace);
}

TEST_CASE("patience 1 stops at the first non-improvement") {
    const Dataset d = tanh_data(30, 2, 1, 5);
    TrainConfig t = small_config({2, 3, 1}, LossSpec::least_distance());
    t.patience = 1;
    t.eta = 1.0;
    t.max_epochs = 500;
    const FitReport r = fit(d, d, t);
    std::size_t first = r.val_trace.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < r.val_trace.size(); ++e) {
        if (r.val_trace[e] >= best) {
            first = e;
            break;
        }
        best = r.val_trace[e];
    }
    if (first == r.val_trace.size()) {
        CHECK(r.stopped_epoch == t.max_epochs);
    } else {
        CHECK(r.stopped_epoch == static_cast<int>(first) + 1);
    }
}

TEST_CASE("without early stopping the last iterate is returned") {
    const Dataset d = tanh_data(20, 2, 2, 9);
    TrainConfig t = small_config({2, 3, 2}, LossSpec::least_distance());
    t.early_stopping = false;
    t.max_epochs = 37;
    const FitReport r = fit(d, d, t);
    CHECK(r.stopped_epoch == 37);
    CHECK(empirical_loss(r.params, d, t.loss) == doctest::Approx(r.val_trace.back()).epsilon(1e-13));
}

TEST_CASE("divergence aborts with the epoch index") {
    Dataset d = tanh_data(20, 2, 1, 3);
    d.Y *= 1e120;
    TrainConfig t = small_config({2, 3, 1}, LossSpec::least_squares());
    t.loss.ls_reduction = Reduction::sum;
    t.eta = 1.0;
    try {
        fit(d, d, t);
        FAIL("expected a numeric abort");
    } catch (const NumericError& e) {
        CHECK(e.where() >= 1);
    }
}

TEST_CASE("config validation") {
    TrainConfig t = small_config({2, 3, 1}, LossSpec::least_squares());
    t.eta = 0.0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t.eta = 1.5;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t.eta = 0.1;
    t.patience = 0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    t.patience = 1;
    t.max_epochs = 0;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    const Dataset d = tanh_data(10, 3, 1, 1);
    t.max_epochs = 5;
    CHECK_THROWS_AS(fit(d, d, t), ShapeError);
}

TEST_CASE("independent baseline") {
    const Dataset train = tanh_data(30, 2, 3, 11);
    const Dataset val = tanh_data(30, 2, 3, 12);
    TrainConfig t = small_config({2, 4, 3}, LossSpec::least_squares());
    const auto reports = fit_independent(train, val, t);
    REQUIRE(reports.size() == 3);

    // q = 1 is the joint fit.
    TrainConfig single = t;
    single.network.layer_widths.back() = 1;
    const FitReport joint = fit(train.response_column(0), val.response_column(0), single);
    const auto one = fit_independent(train.response_column(0), val.response_column(0), single);
    CHECK(one[0].params == joint.params);

    // Permuting responses permutes the reports.
    Dataset ptrain = train, pval = val;
    ptrain.Y.col(0) = train.Y.col(2);
    ptrain.Y.col(2) = train.Y.col(0);
    pval.Y.col(0) = val.Y.col(2);
    pval.Y.col(2) = val.Y.col(0);
    const auto permuted = fit_independent(ptrain, pval, t);
    CHECK(permuted[0].params == reports[2].params);
    CHECK(permuted[2].params == reports[0].params);
    CHECK(permuted[1].params == reports[1].params);

    const Matrix pred = predict_independent(reports, val.X);
    CHECK(pred.cols() == 3);
    CHECK(pred.col(1) == predict_batch(reports[1].params, val.X).col(0));
    CHECK_THROWS_AS(fit_independent(train, val, small_config({2, 4, 3}, LossSpec::least_distance())),
                    ConfigError);
}

TEST_CASE("LD resists a gross response outlier better than LS") {
    double ld_total = 0.0, ls_total = 0.0;
    int ld_wins = 0;
    for (int s = 0; s < 20; ++s) {
        const Dataset train = toy_curve(60, 100 + s, 0.1, 8.0);
        TrainConfig t = small_config({1, 6, 1}, LossSpec::least_distance());
        t.early_stopping = false;
        t.max_epochs = 1500;
        t.eta = 0.3;
        t.seed = s;
        const FitReport ld = fit(train, train, t);
        t.loss = LossSpec::least_squares();
        t.eta = 0.1;
        const FitReport ls = fit(train, train, t);
        const double e_ld = mean_sq_error(predict_batch(ld.params, train.X), *train.true_mean);
        const double e_ls = mean_sq_error(predict_batch(ls.params, train.X), *train.true_mean);
        ld_total += e_ld;
        ls_total += e_ls;
        ld_wins += e_ld < e_ls;
    }
    CHECK(ld_total < ls_total);
    CHECK(ld_wins >= 15);
}

TEST_CASE("lambda search") {
    const Dataset train = tanh_data(40, 3, 2, 21);
    const Dataset val = tanh_data(40, 3, 2, 22);
    TrainConfig t = small_config({3, 4, 2}, LossSpec::least_distance());
    t.penalty = PenaltySpec::group_lasso(0.0);

    const LambdaSearch zero = tune_lambda(train, val, {0.0}, t);
    CHECK(zero.best_lambda == 0.0);
    REQUIRE(zero.reports.size() == 1);
    TrainConfig plain = t;
    plain.penalty = PenaltySpec::none();
    CHECK(zero.reports[0].params == fit(train, val, plain).params);

    const LambdaSearch a = tune_lambda(train, val, {1e-3, 1e-2, 1e-3, 1e-1}, t);
    const LambdaSearch b = tune_lambda(train, val, {1e-3, 1e-2, 1e-1}, t);
    CHECK(a.grid == b.grid);
    CHECK(a.best_lambda == b.best_lambda);
    CHECK(a.scores == b.scores);
    const auto best = std::min_element(b.scores.begin(), b.scores.end()) - b.scores.begin();
    CHECK(b.best_lambda == b.grid[best]);

    // Lambdas too small to change any weight tie; the larger one wins.
    const LambdaSearch tie = tune_lambda(train, val, {1e-300, 2e-300}, t);
    CHECK(tie.scores[0] == tie.scores[1]);
    CHECK(tie.best_lambda == 2e-300);
    CHECK_THROWS_AS(tune_lambda(train, val, {}, t), ConfigError);
}

TEST_CASE("adaptive pipeline weights come from the pilot") {
    const Dataset train = tanh_data(40, 3, 2, 31);
    const Dataset val = tanh_data(40, 3, 2, 32);
    TrainConfig t = small_config({3, 4, 2}, LossSpec::least_distance());
    const AdaptiveFit af = fit_adaptive(train, val, {1e-3, 1e-2}, t);
    const FitReport& chosen = af.search.best();
    REQUIRE(chosen.config_echo.penalty.pilot_norms.has_value());
    CHECK(*chosen.config_echo.penalty.pilot_norms == group_norms(af.pilot.params.first_layer()));
    CHECK(chosen.config_echo.penalty.kind == PenaltyKind::adaptive_group_lasso);
}

TEST_CASE("k-fold partition") {
    const auto folds = kfold_indices(23, 5, 4);
    REQUIRE(folds.size() == 5);
    std::set<int> seen;
    for (const auto& f : folds) {
        CHECK((f.size() == 4 || f.size() == 5));
        seen.insert(f.begin(), f.end());
    }
    CHECK(seen.size() == 23);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 22);
    CHECK(kfold_indices(23, 5, 4) == folds);
    CHECK_THROWS_AS(kfold_indices(3, 5, 1), ConfigError);
    CHECK_THROWS_AS(kfold_indices(10, 1, 1), ConfigError);
}

TEST_CASE("cross-validated lambda search") {
    const Dataset d = tanh_data(50, 3, 2, 41);
    TrainConfig t = small_config({3, 4, 2}, LossSpec::least_distance());
    t.penalty = PenaltySpec::group_lasso(0.0);
    t.max_epochs = 100;
    const CvLambdaSearch cv = tune_lambda_cv(d, 3, {0.0, 1e-2, 1e-2}, t, 9);
    CHECK(cv.grid.size() == 2);
    CHECK(cv.mean_scores.size() == 2);
    const auto best = std::min_element(cv.mean_scores.begin(), cv.mean_scores.end()) - cv.mean_scores.begin();
    CHECK(cv.best_lambda == cv.grid[best]);
    for (double e : cv.mean_best_epoch) CHECK(e <= 100.0);

    t.penalty.kind = PenaltyKind::adaptive_group_lasso;
    const CvLambdaSearch acv = tune_lambda_cv(d, 3, {1e-2}, t, 9);
    CHECK(std::isfinite(acv.mean_scores[0]));
}

TEST_CASE("learning-rate grid keeps the best validation loss") {
    const Dataset train = tanh_data(40, 2, 2, 51);
    const Dataset val = tanh_data(40, 2, 2, 52);
    const TrainConfig t = small_config({2, 4, 2}, LossSpec::least_distance());
    const std::vector<double> grid{0.01, 0.1, 0.5};
    const FitReport best = fit_eta_grid(train, val, t, grid);
    double oracle = std::numeric_limits<double>::infinity();
    double oracle_eta = 0.0;
    for (double eta : grid) {
        TrainConfig c = t;
        c.eta = eta;
        const double v = fit(train, val, c).best_val_loss();
        if (v < oracle) {
            oracle = v;
            oracle_eta = eta;
        }
    }
    CHECK(best.best_val_loss() == oracle);
    CHECK(best.config_echo.eta == oracle_eta);
    CHECK(select_eta(train, val, t, grid) == oracle_eta);
}


TEST_CASE("adaptive search on the sparse design picks a positive lambda") {
    ErrorSpec err;
    err.kind = ErrorKind::mv_normal;
    int positive = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Dataset train = gen_example3(100, err, 100 + s);
        const Dataset val = gen_example3(100, err, 200 + s);
        TrainConfig t;
        t.network.layer_widths = {10, 6, 3};
        t.loss = LossSpec::least_distance();
        t.eta = 0.01;
        t.max_epochs = 8000;
        t.patience = 800;
        t.init_scale = 1.0;
        t.seed = 7 + s;
        const AdaptiveFit af = fit_adaptive(train, val, {0.0, 0.01, 0.03, 0.1, 0.3, 1.0}, t);
        positive += af.search.best_lambda > 0.0;
    }
    CHECK(positive >= 4);
}

}
