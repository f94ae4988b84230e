#pragma once

#include "ldnet/network.hpp"

namespace ldnet {

inline constexpr double kSelectionThreshold = 1e-3;

struct SelectionResult {
    Vector group_sq_norms;  // length p, bias group excluded
    Mask selected;
    double threshold = kSelectionThreshold;
};

/// A predictor is kept when the squared norm of its first-layer column exceeds the threshold.
SelectionResult select_variables(const NetworkParams& params,
                                 double threshold = kSelectionThreshold);

struct SelectionCounts {
    int nc = 0;   // selected and truly relevant
    int nic = 0;  // selected but truly irrelevant
    bool exact_match = false;
};

SelectionCounts selection_counts(const Mask& selected, const Mask& truth);

double frobenius_norm_diff(const Matrix& a, const Matrix& b);

/// Frobenius norm of the first-layer columns belonging to truly irrelevant predictors.
double irrelevant_weight_frobenius(const NetworkParams& params, const Mask& truth);

/// Mean over samples and responses of (truth - prediction)^2.
double mean_squared(const Matrix& truth, const Matrix& prediction);

double model_error_mse(const NetworkParams& params, const Matrix& X_test, const Matrix& true_mean);

double mspe(const NetworkParams& params, const Matrix& X_test, const Matrix& Y_test);

/// Biased (V-statistic) distance correlation between the rows of u and v.
double distance_correlation(const Matrix& u, const Matrix& v);

/// Pairwise dcor between single columns; symmetric with unit diagonal.
Matrix dcor_matrix(const Matrix& columns);

}  // namespace ldnet
