#include "ldnet/penalties.hpp"

#include <algorithm>
#include <cmath>

#include "ldnet/errors.hpp"

namespace ldnet {

PenaltySpec PenaltySpec::group_lasso(double lambda, double tau1) {
    PenaltySpec spec;
    spec.kind = PenaltyKind::group_lasso;
    spec.lambda = lambda;
    spec.tau1 = tau1;
    return spec;
}

PenaltySpec PenaltySpec::adaptive(double lambda, Vector pilot_norms, double gamma, double tau1) {
    PenaltySpec spec;
    spec.kind = PenaltyKind::adaptive_group_lasso;
    spec.lambda = lambda;
    spec.gamma = gamma;
    spec.pilot_norms = std::move(pilot_norms);
    spec.tau1 = tau1;
    return spec;
}

void PenaltySpec::validate(int groups) const {
    if (kind == PenaltyKind::none) return;
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(tau1 > 0.0) || !std::isfinite(tau1)) throw ConfigError("tau1 must be > 0");
    if (kind == PenaltyKind::adaptive_group_lasso) {
        if (!pilot_norms) throw ConfigError("adaptive group lasso requires pilot norms");
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
        if (!(pilot_floor > 0.0)) throw ConfigError("pilot_floor must be > 0");
        if (groups >= 0 && pilot_norms->size() != groups) {
            throw ShapeError("pilot norms have length " + std::to_string(pilot_norms->size()) +
                             ", expected " + std::to_string(groups));
        }
        if ((pilot_norms->array() < 0.0).any() || !pilot_norms->allFinite()) {
            throw ConfigError("pilot norms must be finite and nonnegative");
        }
    }
}

Vector PenaltySpec::group_weights(int groups) const {
    validate(groups);
    Vector weights = Vector::Zero(groups);
    if (kind == PenaltyKind::none) return weights;
    for (int j = penalize_bias ? 0 : 1; j < groups; ++j) {
        if (kind == PenaltyKind::group_lasso) {
            weights[j] = lambda;
        } else {
            weights[j] = lambda * std::pow(std::max((*pilot_norms)[j], pilot_floor), -gamma);
        }
    }
    return weights;
}

Vector group_norms(const Matrix& first_layer) { return first_layer.colwise().norm().transpose(); }

double penalty_value(const Matrix& first_layer, const PenaltySpec& spec) {
    if (spec.kind == PenaltyKind::none) return 0.0;
    const int groups = static_cast<int>(first_layer.cols());
    const Vector weights = spec.group_weights(groups);
    const Vector norms = group_norms(first_layer);
    double total = 0.0;
    for (int j = 0; j < groups; ++j) {
        if (weights[j] != 0.0) total += weights[j] * smooth_norm(norms[j], spec.tau1);
    }
    return total;
}

Matrix penalty_gradient(const Matrix& first_layer, const PenaltySpec& spec) {
    Matrix grad = Matrix::Zero(first_layer.rows(), first_layer.cols());
    if (spec.kind == PenaltyKind::none) return grad;
    const int groups = static_cast<int>(first_layer.cols());
    const Vector weights = spec.group_weights(groups);
    for (int j = 0; j < groups; ++j) {
        if (weights[j] == 0.0) continue;
        const double norm = first_layer.col(j).norm();
        if (norm == 0.0) continue;
        grad.col(j) = weights[j] * smooth_norm_gradient_scale(norm, spec.tau1, spec.variant) *
                      first_layer.col(j);
    }
    return grad;
}

Vector adaptive_weights(const NetworkParams& pilot, double lambda, double gamma,
                        double pilot_floor) {
    PenaltySpec spec = PenaltySpec::adaptive(lambda, group_norms(pilot.first_layer()), gamma);
    spec.pilot_floor = pilot_floor;
    spec.penalize_bias = true;
    return spec.group_weights(static_cast<int>(pilot.first_layer().cols()));
}

}  // namespace ldnet
