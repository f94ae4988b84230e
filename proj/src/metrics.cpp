#include "ldnet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ldnet/errors.hpp"

namespace ldnet {

SelectionResult select_variables(const NetworkParams& params, double threshold) {
    if (params.weights.empty()) throw ShapeError("network has no layers");
    const Matrix& w1 = params.first_layer();
    SelectionResult out;
    out.threshold = threshold;
    out.group_sq_norms = w1.rightCols(w1.cols() - 1).colwise().squaredNorm().transpose();
    out.selected.resize(out.group_sq_norms.size());
    for (Eigen::Index j = 0; j < out.group_sq_norms.size(); ++j) {
        out.selected[j] = out.group_sq_norms[j] > threshold;
    }
    return out;
}

SelectionCounts selection_counts(const Mask& selected, const Mask& truth) {
    if (selected.size() != truth.size()) {
        throw ShapeError("selection mask and truth mask differ in length");
    }
    SelectionCounts c;
    for (std::size_t j = 0; j < selected.size(); ++j) {
        if (!selected[j]) continue;
        if (truth[j]) {
            ++c.nc;
        } else {
            ++c.nic;
        }
    }
    c.exact_match = selected == truth;
    return c;
}

double frobenius_norm_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("Frobenius difference needs equal shapes");
    }
    return (a - b).norm();
}

double irrelevant_weight_frobenius(const NetworkParams& params, const Mask& truth) {
    if (params.weights.empty()) throw ShapeError("network has no layers");
    const Matrix& w1 = params.first_layer();
    if (static_cast<Eigen::Index>(truth.size()) != w1.cols() - 1) {
        throw ShapeError("truth mask length must equal the number of predictors");
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (!truth[j]) sq += w1.col(static_cast<Eigen::Index>(j) + 1).squaredNorm();
    }
    return std::sqrt(sq);
}

double mean_squared(const Matrix& truth, const Matrix& prediction) {
    if (truth.rows() != prediction.rows() || truth.cols() != prediction.cols()) {
        throw ShapeError("metric operands differ in shape");
    }
    if (truth.size() == 0) throw ShapeError("metric of an empty matrix is undefined");
    return (truth - prediction).squaredNorm() / static_cast<double>(truth.size());
}

double model_error_mse(const NetworkParams& params, const Matrix& X_test, const Matrix& true_mean) {
    return mean_squared(true_mean, predict_batch(params, X_test));
}

double mspe(const NetworkParams& params, const Matrix& X_test, const Matrix& Y_test) {
    return mean_squared(Y_test, predict_batch(params, X_test));
}

namespace {

// Pairwise Euclidean distances between rows, double-centered.
Matrix double_centered_distances(const Matrix& s) {
    const Eigen::Index n = s.rows();
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (s.row(i) - s.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    const Vector row_mean = d.rowwise().mean();
    const double grand = row_mean.mean();
    // d is symmetric, so column means equal row means.
    d.colwise() -= row_mean;
    d.rowwise() -= row_mean.transpose();
    d.array() += grand;
    return d;
}

}  // namespace

double distance_correlation(const Matrix& u, const Matrix& v) {
    if (u.rows() != v.rows()) throw ShapeError("dcor samples must have equal row counts");
    if (u.rows() < 2) throw ShapeError("dcor needs at least two observations");
    const Matrix a = double_centered_distances(u);
    const Matrix b = double_centered_distances(v);
    const double cov2 = (a.array() * b.array()).mean();
    const double var_u = (a.array() * a.array()).mean();
    const double var_v = (b.array() * b.array()).mean();
    if (var_u <= 0.0 || var_v <= 0.0) return 0.0;
    const double r2 = cov2 / std::sqrt(var_u * var_v);
    return std::sqrt(std::clamp(r2, 0.0, 1.0));
}

Matrix dcor_matrix(const Matrix& columns) {
    const Eigen::Index q = columns.cols();
    Matrix out = Matrix::Identity(q, q);
    for (Eigen::Index a = 0; a < q; ++a) {
        for (Eigen::Index b = a + 1; b < q; ++b) {
            const double v = distance_correlation(columns.col(a), columns.col(b));
            out(a, b) = v;
            out(b, a) = v;
        }
    }
    return out;
}

}  // namespace ldnet
