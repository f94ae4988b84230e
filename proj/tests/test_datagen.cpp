#include <doctest.h>

#include <cmath>

#include "ldnet/datagen.hpp"
#include "ldnet/errors.hpp"

using namespace ldnet;

TEST_SUITE("datagen") {

TEST_CASE("example 1 surfaces at hand-picked points") {
    const Vector zero = Vector::Zero(1);
    const Matrix c1 = example1_mean(1, 9, zero);
    CHECK(c1(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c1(0, 8) == doctest::Approx(4.5 + 1.0).epsilon(1e-15));
    const Matrix c2 = example1_mean(2, 3, zero);
    CHECK(c2(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(c2(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

    Vector x(1);
    x << 2.0;
    const Matrix a = example1_mean(1, 2, x);
    CHECK(a(0, 1) == doctest::Approx(1.0 + 2 * std::sin(2.0) + std::exp(-0.2)).epsilon(1e-15));
    const Matrix b = example1_mean(2, 2, x);
    // k = 1 uses +x, k = 2 uses -x.
    CHECK(b(0, 0) == doctest::Approx(2.0 / 8.0 + 0.5 * std::sin(1.0)).epsilon(1e-15));
    CHECK(b(0, 1) == doctest::Approx(3.0 / 4.0 + 0.5 * std::sin(-1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(example1_mean(3, 2, x), ConfigError);
}

TEST_CASE("example 1 generator") {
    const Dataset d = gen_example1(1, 3, 500, ErrorSpec{}, 42);
    CHECK(d.p() == 1);
    CHECK(d.q() == 3);
    REQUIRE(d.true_mean.has_value());
    REQUIRE(d.relevant_mask.has_value());
    CHECK(*d.relevant_mask == Mask{true});
    CHECK(d.X.minCoeff() >= -5.0);
    CHECK(d.X.maxCoeff() <= 5.0);
    CHECK((example1_mean(1, 3, d.X.col(0)) - *d.true_mean).cwiseAbs().maxCoeff() == 0.0);
    const Dataset again = gen_example1(1, 3, 500, ErrorSpec{}, 42);
    CHECK(again.X == d.X);
    CHECK(again.Y == d.Y);
    // Residuals are the sampled errors: roughly standard normal here.
    const Matrix e = d.Y - *d.true_mean;
    CHECK(std::abs(e.mean()) < 0.1);
    CHECK(std::abs(e.squaredNorm() / e.size() - 1.0) < 0.15);
}

TEST_CASE("example 3 surfaces and generator") {
    Matrix x = Matrix::Zero(2, 10);
    x(1, 0) = 1.0;
    const Matrix m = example3_mean(x);
    CHECK(m(0, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(m(1, 0) == doctest::Approx(1.2).epsilon(1e-15));
    for (int k = 1; k < 3; ++k) CHECK(m(1, k) - m(1, 0) == doctest::Approx(0.1 * k).epsilon(1e-12));

    const Dataset d = gen_example3(300, ErrorSpec{ErrorKind::mv_normal}, 7);
    CHECK(d.p() == 10);
    CHECK(d.q() == 3);
    CHECK(*d.relevant_mask == Mask{true, true, true, false, false, false, false, false, false, false});
    CHECK(d.X.cwiseAbs().maxCoeff() <= 3.0);
    const Matrix& tm = *d.true_mean;
    CHECK((tm.col(1) - tm.col(0)).cwiseAbs().maxCoeff() == doctest::Approx(0.1));
    CHECK((example3_mean(d.X) - tm).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("contamination") {
    const Dataset d = gen_example1(1, 3, 200, ErrorSpec{}, 3);
    const Dataset same = contaminate(d, 0.0, 7.0, 1);
    CHECK(same.Y == d.Y);
    REQUIRE(same.outlier_mask.has_value());
    CHECK(std::count(same.outlier_mask->begin(), same.outlier_mask->end(), true) == 0);

    const Dataset c = contaminate(d, 0.2, 7.0, 1);
    const Mask& mask = *c.outlier_mask;
    CHECK(std::count(mask.begin(), mask.end(), true) == 40);
    CHECK(c.X == d.X);
    CHECK(*c.true_mean == *d.true_mean);
    for (int i = 0; i < d.n(); ++i) {
        const double s = mask[i] ? 7.0 : 0.0;
        CHECK(c.Y(i, 0) - d.Y(i, 0) == doctest::Approx(s));
        CHECK(c.Y(i, 1) - d.Y(i, 1) == doctest::Approx(-s));
        CHECK(c.Y(i, 2) - d.Y(i, 2) == doctest::Approx(s));
    }
    CHECK(*contaminate(d, 0.2, 7.0, 1).outlier_mask == mask);

    Dataset zero;
    zero.X = Matrix::Zero(1, 1);
    zero.Y = Matrix::Zero(1, 3);
    const Dataset z = contaminate(zero, 1.0, 7.0, 5);
    CHECK(z.Y(0, 0) == 7.0);
    CHECK(z.Y(0, 1) == -7.0);
    CHECK(z.Y(0, 2) == 7.0);
    CHECK_THROWS_AS(contaminate(d, 1.5, 7.0, 1), ConfigError);

    const Dataset u = contaminate_uniform(zero, 1.0, 5.0, 5);
    CHECK(u.Y == Matrix::Constant(1, 3, 5.0));
}

TEST_CASE("error samplers") {
    const Matrix a = sample_errors(ErrorSpec{ErrorKind::t3_iid}, 50, 3, 9);
    CHECK(a == sample_errors(ErrorSpec{ErrorKind::t3_iid}, 50, 3, 9));

    const Matrix mv = sample_errors(ErrorSpec{ErrorKind::mv_normal}, 100000, 3, 11);
    const Matrix centered = mv.rowwise() - mv.colwise().mean();
    const Matrix cov = centered.transpose() * centered / (mv.rows() - 1.0);
    CHECK((cov - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);

    ErrorSpec corr{ErrorKind::mv_normal};
    Matrix sigma(2, 2);
    sigma << 1.0, 0.6, 0.6, 2.0;
    corr.sigma = sigma;
    const Matrix c = sample_errors(corr, 100000, 2, 12);
    const Matrix cc = c.rowwise() - c.colwise().mean();
    CHECK(((cc.transpose() * cc / (c.rows() - 1.0)) - sigma).cwiseAbs().maxCoeff() < 0.05);

    const Matrix t = sample_errors(ErrorSpec{ErrorKind::t3_iid}, 100000, 1, 13);
    const double mean = t.mean();
    const double m2 = (t.array() - mean).square().mean();
    const double m4 = (t.array() - mean).pow(4).mean();
    CHECK(m4 / (m2 * m2) > 6.0);

    const Matrix n = sample_errors(ErrorSpec{}, 100000, 1, 14);
    const double nm2 = (n.array() - n.mean()).square().mean();
    const double nm4 = (n.array() - n.mean()).pow(4).mean();
    CHECK(std::abs(nm4 / (nm2 * nm2) - 3.0) < 0.1);

    // Multivariate t: variance df / (df - 2) = 3 per coordinate; heavier tails than normal.
    const Matrix mt = sample_errors(ErrorSpec{ErrorKind::mv_t3}, 200000, 2, 15);
    const double med = [&] {
        std::vector<double> v(mt.data(), mt.data() + mt.size());
        for (double& x : v) x = std::abs(x);
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    }();
    CHECK(med == doctest::Approx(0.7649).epsilon(0.02));  // median |t_3|
}

TEST_CASE("invalid error specs") {
    ErrorSpec bad{ErrorKind::mv_normal};
    Matrix s(2, 2);
    s << 1.0, 2.0, 2.0, 1.0;
    bad.sigma = s;
    CHECK_THROWS_AS(bad.validate(2), ConfigError);
    CHECK_THROWS_AS(sample_errors(bad, 10, 2, 1), ConfigError);
    ErrorSpec wrong{ErrorKind::mv_normal};
    wrong.sigma = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(wrong.validate(2), ConfigError);
    ErrorSpec df{ErrorKind::t3_iid};
    df.df = 0.0;
    CHECK_THROWS_AS(df.validate(1), ConfigError);
}

}
