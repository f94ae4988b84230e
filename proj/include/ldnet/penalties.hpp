#pragma once

#include <optional>

#include "ldnet/losses.hpp"
#include "ldnet/network.hpp"

namespace ldnet {

enum class PenaltyKind { none, group_lasso, adaptive_group_lasso };

/// Penalty on the column groups of the first weight matrix. Group j collects
/// every weight leaving input node j (j = 0 is the bias node).
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::none;
    double lambda = 0.0;
    double gamma = 1.0;
    std::optional<Vector> pilot_norms;  // length p + 1, adaptive only
    double tau1 = 1e-5;
    bool penalize_bias = false;
    double pilot_floor = 1e-6;
    GradientVariant variant = GradientVariant::corrected;

    static PenaltySpec none() { return {}; }
    static PenaltySpec group_lasso(double lambda, double tau1 = 1e-5);
    static PenaltySpec adaptive(double lambda, Vector pilot_norms, double gamma = 1.0,
                                double tau1 = 1e-5);

    /// Throws ConfigError. `groups` is p + 1 when known, or -1 to skip the length check.
    void validate(int groups = -1) const;

    /// Per-group multipliers lambda_j (length groups); unpenalized groups get 0.
    Vector group_weights(int groups) const;
};

/// Euclidean norm of each column of the first-layer matrix.
Vector group_norms(const Matrix& first_layer);

double penalty_value(const Matrix& first_layer, const PenaltySpec& spec);

/// Gradient of penalty_value with respect to the first-layer matrix.
Matrix penalty_gradient(const Matrix& first_layer, const PenaltySpec& spec);

/// lambda * max(||w_(j)||, floor)^(-gamma) from a pilot network's first layer.
Vector adaptive_weights(const NetworkParams& pilot, double lambda, double gamma,
                        double pilot_floor = 1e-6);

}  // namespace ldnet
