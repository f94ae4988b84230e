#include <doctest.h>

#include <cmath>
#include <random>

#include "ldnet/datagen.hpp"
#include "ldnet/errors.hpp"
#include "ldnet/metrics.hpp"
#include "ldnet/trainer.hpp"

using namespace ldnet;

namespace {

// O(n^2) double-centering written out with explicit loops.
double brute_dcor(const Matrix& u, const Matrix& v) {
    const int n = static_cast<int>(u.rows());
    auto centered = [n](const Matrix& s) {
        std::vector<std::vector<double>> d(n, std::vector<double>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d[i][j] = (s.row(i) - s.row(j)).norm();
        std::vector<double> row(n, 0.0);
        double all = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) row[i] += d[i][j];
            all += row[i];
            row[i] /= n;
        }
        all /= double(n) * n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d[i][j] = d[i][j] - row[i] - row[j] + all;
        return d;
    };
    const auto a = centered(u);
    const auto b = centered(v);
    double xy = 0, xx = 0, yy = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            xy += a[i][j] * b[i][j];
            xx += a[i][j] * a[i][j];
            yy += b[i][j] * b[i][j];
        }
    }
    if (xx <= 0 || yy <= 0) return 0.0;
    return std::sqrt(std::max(0.0, xy) / std::sqrt(xx * yy));
}

Matrix randn(int r, int c, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(gen);
    return m;
}

}  // namespace

TEST_SUITE("selection-metrics") {

TEST_CASE("threshold rule") {
    NetworkParams p = zero_params(NetworkConfig{{3, 2, 1}});
    SelectionResult s = select_variables(p, kSelectionThreshold);
    CHECK(s.selected == Mask{false, false, false});
    p.first_layer().col(0) << 10.0, 10.0;  // bias never counts
    p.first_layer().col(1) << 0.1, 0.0;
    p.first_layer().col(2) << 0.02, 0.02;
    p.first_layer().col(3) << std::sqrt(1e-3), 0.0;
    s = select_variables(p, kSelectionThreshold);
    CHECK(s.group_sq_norms.size() == 3);
    CHECK(s.group_sq_norms[0] == doctest::Approx(0.01));
    CHECK(s.selected == Mask{true, false, false});
    CHECK(s.threshold == 1e-3);
}

TEST_CASE("raising the threshold never adds variables") {
    const NetworkParams p = init_params(NetworkConfig{{8, 4, 2}}, 3, 0.05);
    Mask prev(8, true);
    for (double t = 1e-6; t < 1.0; t *= 3.0) {
        const Mask cur = select_variables(p, t).selected;
        for (int j = 0; j < 8; ++j) CHECK((!cur[j] || prev[j]));
        prev = cur;
    }
}

TEST_CASE("selection counts") {
    Mask truth(10, false);
    truth[0] = truth[1] = truth[2] = true;
    auto c = selection_counts(truth, truth);
    CHECK(c.nc == 3);
    CHECK(c.nic == 0);
    CHECK(c.exact_match);
    c = selection_counts(Mask(10, true), truth);
    CHECK(c.nc == 3);
    CHECK(c.nic == 7);
    CHECK_FALSE(c.exact_match);
    c = selection_counts(Mask(10, false), truth);
    CHECK(c.nc == 0);
    CHECK(c.nic == 0);
    CHECK_FALSE(c.exact_match);
    CHECK_THROWS_AS(selection_counts(Mask(3, false), truth), ShapeError);

    std::mt19937 gen(2);
    for (int t = 0; t < 50; ++t) {
        Mask sel(10);
        int count = 0;
        for (int j = 0; j < 10; ++j) count += (sel[j] = gen() % 2);
        const auto r = selection_counts(sel, truth);
        CHECK(r.nc + r.nic == count);
        if (r.exact_match) CHECK((r.nc == 3 && r.nic == 0));
    }
}

TEST_CASE("Frobenius distances") {
    const Matrix a = randn(7, 3, 1);
    const Matrix b = randn(7, 3, 2);
    CHECK(frobenius_norm_diff(a, a) == 0.0);
    CHECK(frobenius_norm_diff(Matrix::Identity(2, 2), Matrix::Zero(2, 2)) == doctest::Approx(std::sqrt(2.0)));
    double s = 0;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 3; ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    CHECK(frobenius_norm_diff(a, b) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
    CHECK_THROWS_AS(frobenius_norm_diff(a, Matrix::Zero(3, 7)), ShapeError);

    NetworkParams p = zero_params(NetworkConfig{{3, 2, 1}});
    const Mask truth{true, false, true};
    p.first_layer().col(1) << 1.0, 1.0;
    CHECK(irrelevant_weight_frobenius(p, truth) == 0.0);
    p.first_layer().col(2) << 3.0, 4.0;
    CHECK(irrelevant_weight_frobenius(p, truth) == doctest::Approx(5.0));
}

TEST_CASE("error metrics") {
    const Matrix m = randn(20, 3, 3);
    CHECK(mean_squared(m, m) == 0.0);
    CHECK(mean_squared(Matrix::Ones(5, 2), Matrix::Zero(5, 2)) == 1.0);
    Matrix one(1, 1);
    one << 2.0;
    CHECK(mean_squared(one, Matrix::Zero(1, 1)) == 4.0);
    CHECK(mean_squared(m, Matrix::Zero(20, 3)) > 0.0);
    CHECK_THROWS_AS(mean_squared(m, Matrix::Zero(20, 2)), ShapeError);

    const NetworkParams p = init_params(NetworkConfig{{2, 3, 2}}, 5);
    const Matrix X = randn(30, 2, 4);
    const Matrix f = randn(30, 2, 5);
    CHECK(model_error_mse(p, X, f) == mspe(p, X, f));
    CHECK(mspe(p, X, predict_batch(p, X)) == 0.0);
}

TEST_CASE("distance correlation properties") {
    const Matrix x = randn(60, 2, 6);
    CHECK(distance_correlation(x, x) == 1.0);
    Matrix affine = 3.5 * x;
    affine.rowwise() += Eigen::RowVector2d(1.0, -2.0);
    CHECK(distance_correlation(x, affine) == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix y = randn(60, 3, 7);
    const double d = distance_correlation(x, y);
    CHECK(d == doctest::Approx(distance_correlation(y, x)).epsilon(1e-14));
    CHECK(d == doctest::Approx(brute_dcor(x, y)).epsilon(1e-12));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);

    // Orthogonal rotation of one argument.
    const double th = 0.7;
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Matrix xr = x * rot.transpose();
    CHECK(distance_correlation(xr, y) == doctest::Approx(d).epsilon(1e-10));

    CHECK(distance_correlation(Matrix::Ones(10, 1), randn(10, 1, 1)) == 0.0);
    CHECK_THROWS_AS(distance_correlation(Matrix::Ones(1, 1), Matrix::Ones(1, 1)), ShapeError);
    CHECK_THROWS_AS(distance_correlation(randn(5, 1, 1), randn(6, 1, 1)), ShapeError);
}

TEST_CASE("dcor randomized against the brute-force oracle") {
    for (int t = 0; t < 30; ++t) {
        const int n = 2 + t * 3;
        const Matrix u = randn(n, 1 + t % 3, 100 + t);
        Matrix v = randn(n, 1 + (t + 1) % 2, 200 + t);
        v.col(0) += u.col(0).array().square().matrix();
        const double d = distance_correlation(u, v);
        CHECK(d == doctest::Approx(brute_dcor(u, v)).epsilon(1e-10));
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("dcor matrix") {
    const Matrix y = randn(40, 4, 8);
    const Matrix d = dcor_matrix(y);
    CHECK(d.rows() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(d(i, i) == 1.0);
        for (int j = 0; j < 4; ++j) {
            CHECK(d(i, j) == d(j, i));
            if (i != j) CHECK(d(i, j) == doctest::Approx(brute_dcor(y.col(i), y.col(j))).epsilon(1e-12));
        }
    }
}


TEST_CASE("irrelevant block shrinks as lambda grows") {
    ErrorSpec err;
    err.kind = ErrorKind::mv_normal;
    const Dataset train = gen_example3(100, err, 102);
    TrainConfig t;
    t.network.layer_widths = {10, 6, 3};
    t.loss = LossSpec::least_distance();
    t.eta = 0.01;
    t.max_epochs = 8000;
    t.early_stopping = false;
    t.init_scale = 1.0;
    t.seed = 9;
    std::vector<double> frob;
    for (double lambda : {0.0, 0.01, 0.03, 0.1, 0.3, 1.0}) {
        t.penalty = PenaltySpec::group_lasso(lambda);
        frob.push_back(irrelevant_weight_frobenius(fit(train, train, t).params, *train.relevant_mask));
    }
    int inversions = 0;
    for (std::size_t i = 1; i < frob.size(); ++i) inversions += frob[i] > frob[i - 1];
    CHECK(inversions <= 1);
    CHECK(frob.back() < 0.05 * frob.front());
}

}
