#include "ldnet/dataset.hpp"

#include <string>

#include "ldnet/errors.hpp"

namespace ldnet {

void Dataset::validate() const {
    if (Y.rows() != X.rows()) {
        throw ShapeError("X has " + std::to_string(X.rows()) + " rows but Y has " +
                         std::to_string(Y.rows()));
    }
    if (true_mean && (true_mean->rows() != Y.rows() || true_mean->cols() != Y.cols())) {
        throw ShapeError("true_mean must have the same shape as Y");
    }
    if (relevant_mask && static_cast<int>(relevant_mask->size()) != p()) {
        throw ShapeError("relevant_mask length must equal the number of predictors");
    }
    if (outlier_mask && static_cast<int>(outlier_mask->size()) != n()) {
        throw ShapeError("outlier_mask length must equal the number of rows");
    }
}

Dataset Dataset::rows(const std::vector<int>& index) const {
    const auto m = static_cast<Eigen::Index>(index.size());
    Dataset out;
    out.X.resize(m, X.cols());
    out.Y.resize(m, Y.cols());
    if (true_mean) out.true_mean = Matrix(m, Y.cols());
    if (outlier_mask) out.outlier_mask = Mask(index.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        const int src = index[i];
        if (src < 0 || src >= n()) {
            throw ShapeError("row index " + std::to_string(src) + " out of range");
        }
        out.X.row(i) = X.row(src);
        out.Y.row(i) = Y.row(src);
        if (true_mean) out.true_mean->row(i) = true_mean->row(src);
        if (outlier_mask) (*out.outlier_mask)[i] = (*outlier_mask)[src];
    }
    out.relevant_mask = relevant_mask;
    return out;
}

Dataset Dataset::response_column(int k) const {
    if (k < 0 || k >= q()) {
        throw ShapeError("response column " + std::to_string(k) + " out of range");
    }
    Dataset out = *this;
    out.Y = Y.col(k);
    if (true_mean) out.true_mean = Matrix(true_mean->col(k));
    return out;
}

}  // namespace ldnet
