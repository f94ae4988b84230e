#pragma once

#include "ldnet/dataset.hpp"
#include "ldnet/network.hpp"

namespace ldnet {

struct PenaltySpec;

enum class LossKind { ls, ld };

/// Inner-branch gradient of the smoothed norm. `corrected` is the exact
/// derivative of the quadratic branch (z / tau); `paper_literal` is
/// ||z|| z / tau, as printed in the original backpropagation listing.
enum class GradientVariant { corrected, paper_literal };

/// How per-sample LS losses are combined. LD always averages.
enum class Reduction { mean, sum };

struct LossSpec {
    LossKind kind = LossKind::ld;
    double tau2 = 1e-3;
    GradientVariant variant = GradientVariant::corrected;
    Reduction ls_reduction = Reduction::mean;

    static LossSpec least_squares() { return LossSpec{LossKind::ls, 1e-3}; }
    static LossSpec least_distance(double tau2 = 1e-3,
                                   GradientVariant variant = GradientVariant::corrected) {
        return LossSpec{LossKind::ld, tau2, variant};
    }

    void validate() const;
};

/// Quadratic smoothing of a norm value: t if t >= tau, t^2/(2 tau) + tau/2 otherwise.
double smooth_norm(double norm, double tau);

/// Derivative scale s such that d/dz smooth(||z||) = s * z under `variant`.
double smooth_norm_gradient_scale(double norm, double tau, GradientVariant variant);

double smoothed_ld(const Eigen::Ref<const Vector>& residual, double tau2);

/// dLoss/dyhat for the smoothed LD loss, with r = y - yhat.
Vector ld_output_delta(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat,
                       double tau2, GradientVariant variant = GradientVariant::corrected);

double ls_loss(const Eigen::Ref<const Vector>& residual);

Vector ls_output_delta(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat);

/// Per-sample loss and output delta dispatched on the LossSpec.
double sample_loss(const LossSpec& loss, const Eigen::Ref<const Vector>& residual);
Vector output_delta(const LossSpec& loss, const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Vector>& yhat);

/// Data term of the objective from a prediction matrix (n x q).
double data_loss(const LossSpec& loss, const Matrix& Y, const Matrix& Yhat);

/// Reduced data loss plus the first-layer penalty.
double empirical_objective(const NetworkParams& params, const Dataset& data, const LossSpec& loss,
                           const PenaltySpec& penalty);

/// Unpenalized variant of empirical_objective.
double empirical_loss(const NetworkParams& params, const Dataset& data, const LossSpec& loss);

}  // namespace ldnet
