#include "ldnet/losses.hpp"

#include <cmath>

#include "ldnet/errors.hpp"
#include "ldnet/penalties.hpp"

namespace ldnet {

namespace {

void require_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ConfigError("smoothing radius must be positive and finite");
    }
}

}  // namespace

void LossSpec::validate() const {
    if (kind == LossKind::ld) require_tau(tau2);
}

double smooth_norm(double norm, double tau) {
    require_tau(tau);
    if (norm >= tau) return norm;
    return norm * norm / (2.0 * tau) + tau / 2.0;
}

double smooth_norm_gradient_scale(double norm, double tau, GradientVariant variant) {
    require_tau(tau);
    if (norm >= tau) return 1.0 / norm;
    return variant == GradientVariant::corrected ? 1.0 / tau : norm / tau;
}

double smoothed_ld(const Eigen::Ref<const Vector>& residual, double tau2) {
    return smooth_norm(residual.norm(), tau2);
}

Vector ld_output_delta(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat,
                       double tau2, GradientVariant variant) {
    if (y.size() != yhat.size()) throw ShapeError("response and prediction lengths differ");
    const Vector r = y - yhat;
    return -smooth_norm_gradient_scale(r.norm(), tau2, variant) * r;
}

double ls_loss(const Eigen::Ref<const Vector>& residual) { return residual.squaredNorm(); }

Vector ls_output_delta(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat) {
    if (y.size() != yhat.size()) throw ShapeError("response and prediction lengths differ");
    return -2.0 * (y - yhat);
}

double sample_loss(const LossSpec& loss, const Eigen::Ref<const Vector>& residual) {
    return loss.kind == LossKind::ls ? ls_loss(residual) : smoothed_ld(residual, loss.tau2);
}

Vector output_delta(const LossSpec& loss, const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Vector>& yhat) {
    return loss.kind == LossKind::ls ? ls_output_delta(y, yhat)
                                     : ld_output_delta(y, yhat, loss.tau2, loss.variant);
}

double data_loss(const LossSpec& loss, const Matrix& Y, const Matrix& Yhat) {
    if (Y.rows() == 0) throw ShapeError("objective of an empty dataset is undefined");
    if (Y.rows() != Yhat.rows() || Y.cols() != Yhat.cols()) {
        throw ShapeError("response and prediction matrices differ in shape");
    }
    loss.validate();
    double total = 0.0;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        total += sample_loss(loss, (Y.row(i) - Yhat.row(i)).transpose());
    }
    const bool summed = loss.kind == LossKind::ls && loss.ls_reduction == Reduction::sum;
    return summed ? total : total / static_cast<double>(Y.rows());
}

double empirical_loss(const NetworkParams& params, const Dataset& data, const LossSpec& loss) {
    if (data.n() == 0) throw ShapeError("objective of an empty dataset is undefined");
    return data_loss(loss, data.Y, predict_batch(params, data.X));
}

double empirical_objective(const NetworkParams& params, const Dataset& data, const LossSpec& loss,
                           const PenaltySpec& penalty) {
    return empirical_loss(params, data, loss) + penalty_value(params.first_layer(), penalty);
}

}  // namespace ldnet
