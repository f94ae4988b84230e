#include "ldnet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ldnet/errors.hpp"
#include "ldnet/rng.hpp"

namespace ldnet {

namespace {

constexpr std::uint64_t kPredictorStream = 1;
constexpr std::uint64_t kErrorStream = 2;

Matrix cholesky_factor(const ErrorSpec& spec, int q) {
    if (!spec.sigma) return Matrix::Identity(q, q);
    Eigen::LLT<Matrix> llt(*spec.sigma);
    if (llt.info() != Eigen::Success) throw ConfigError("error covariance is not positive definite");
    return llt.matrixL();
}

std::vector<int> pick_rows(int n, double alpha, std::uint64_t seed) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("outlier fraction must lie in [0, 1]");
    const int count = std::min(n, static_cast<int>(std::ceil(alpha * n - 1e-9)));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(seed);
    std::shuffle(order.begin(), order.end(), gen);
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace

void ErrorSpec::validate(int q) const {
    if ((kind == ErrorKind::t3_iid || kind == ErrorKind::mv_t3) && !(df > 0.0)) {
        throw ConfigError("t degrees of freedom must be > 0");
    }
    if (sigma) {
        if (sigma->rows() != q || sigma->cols() != q) {
            throw ConfigError("error covariance must be " + std::to_string(q) + "x" +
                              std::to_string(q));
        }
        if (!sigma->isApprox(sigma->transpose(), 1e-12)) {
            throw ConfigError("error covariance must be symmetric");
        }
        cholesky_factor(*this, q);
    }
}

Matrix sample_errors(const ErrorSpec& spec, int n, int q, std::uint64_t seed) {
    spec.validate(q);
    std::mt19937_64 gen(seed);
    Matrix e(n, q);
    switch (spec.kind) {
        case ErrorKind::std_normal_iid: {
            std::normal_distribution<double> normal;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < q; ++k) e(i, k) = normal(gen);
            break;
        }
        case ErrorKind::t3_iid: {
            std::student_t_distribution<double> t(spec.df);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < q; ++k) e(i, k) = t(gen);
            break;
        }
        case ErrorKind::mv_normal:
        case ErrorKind::mv_t3: {
            const Matrix chol = cholesky_factor(spec, q);
            std::normal_distribution<double> normal;
            std::chi_squared_distribution<double> chi2(spec.df);
            Vector z(q);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < q; ++k) z[k] = normal(gen);
                Vector row = chol * z;
                if (spec.kind == ErrorKind::mv_t3) row /= std::sqrt(chi2(gen) / spec.df);
                e.row(i) = row.transpose();
            }
            break;
        }
    }
    return e;
}

Matrix example1_mean(int case_id, int q, const Vector& x) {
    if (case_id != 1 && case_id != 2) throw ConfigError("example 1 has cases 1 and 2 only");
    if (q < 1) throw ConfigError("q must be >= 1");
    Matrix m(x.size(), q);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double x1 = x[i];
        for (int k = 1; k <= q; ++k) {
            if (case_id == 1) {
                m(i, k - 1) = k / 2.0 + 2.0 * std::sin(x1) + std::exp(-0.1 * x1);
            } else {
                const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // (-1)^(k+1)
                m(i, k - 1) = (k + 1.0) / (sign * x1 + 6.0) + 0.5 * std::sin(sign * x1 / 2.0);
            }
        }
    }
    return m;
}

Dataset gen_example1(int case_id, int q, int n, const ErrorSpec& error, std::uint64_t seed) {
    if (n < 0) throw ConfigError("sample size must be >= 0");
    Dataset d;
    d.X.resize(n, 1);
    std::mt19937_64 gen(derive_seed(seed, kPredictorStream));
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (int i = 0; i < n; ++i) d.X(i, 0) = unif(gen);
    d.true_mean = example1_mean(case_id, q, d.X.col(0));
    d.Y = *d.true_mean + sample_errors(error, n, q, derive_seed(seed, kErrorStream));
    d.relevant_mask = Mask{true};
    return d;
}

Matrix example3_mean(const Matrix& X) {
    if (X.cols() < 3) throw ShapeError("the sparse design needs at least three predictors");
    Matrix m(X.rows(), 3);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double x1 = X(i, 0), x2 = X(i, 1), x3 = X(i, 2);
        const double shared = 0.1 * x1 * x1 * x1 + 0.5 * x2 * x2 + x1 + x2 + x3;
        for (int k = 1; k <= 3; ++k) m(i, k - 1) = 0.1 * k + shared;
    }
    return m;
}

Dataset gen_example3(int n, const ErrorSpec& error, std::uint64_t seed) {
    if (n < 0) throw ConfigError("sample size must be >= 0");
    constexpr int p = 10;
    Dataset d;
    d.X.resize(n, p);
    std::mt19937_64 gen(derive_seed(seed, kPredictorStream));
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) d.X(i, j) = unif(gen);
    d.true_mean = example3_mean(d.X);
    d.Y = *d.true_mean + sample_errors(error, n, 3, derive_seed(seed, kErrorStream));
    Mask relevant(p, false);
    relevant[0] = relevant[1] = relevant[2] = true;
    d.relevant_mask = relevant;
    return d;
}

Dataset contaminate(const Dataset& data, double alpha, double shift, std::uint64_t seed) {
    Dataset out = data;
    Mask flags = data.outlier_mask.value_or(Mask(data.n(), false));
    for (int i : pick_rows(data.n(), alpha, seed)) {
        for (int k = 0; k < data.q(); ++k) out.Y(i, k) += (k % 2 == 0) ? shift : -shift;
        flags[i] = true;
    }
    out.outlier_mask = flags;
    return out;
}

Dataset contaminate_uniform(const Dataset& data, double alpha, double shift, std::uint64_t seed) {
    Dataset out = data;
    Mask flags = data.outlier_mask.value_or(Mask(data.n(), false));
    for (int i : pick_rows(data.n(), alpha, seed)) {
        out.Y.row(i).array() += shift;
        flags[i] = true;
    }
    out.outlier_mask = flags;
    return out;
}

}  // namespace ldnet
