#include "ldnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ldnet/errors.hpp"
#include "ldnet/rng.hpp"
#include "ldnet/trainer.hpp"

namespace ldnet {

namespace {

constexpr double kSeamMargin = 1e-4;

bool near_seams(const NetworkParams& params, const Vector& x, const Vector& y,
                const LossSpec& loss, const PenaltySpec& penalty) {
    if (loss.kind == LossKind::ld) {
        const double r = (y - forward(params, x).prediction).norm();
        if (std::abs(r - loss.tau2) < kSeamMargin) return true;
    }
    if (penalty.kind != PenaltyKind::none) {
        const Vector norms = group_norms(params.first_layer());
        for (Eigen::Index j = 0; j < norms.size(); ++j) {
            if (std::abs(norms[j] - penalty.tau1) < kSeamMargin) return true;
        }
    }
    return false;
}

}  // namespace

GradCheckSummary audit_gradients(int configs, std::uint64_t seed, double step) {
    if (configs < 1) throw ConfigError("gradient audit needs at least one configuration");
    const std::vector<std::vector<int>> shapes{{1, 3, 2}, {2, 10, 10, 3}};
    const char* losses[] = {"ls", "ld"};
    const char* penalties[] = {"none", "group", "adaptive"};

    GradCheckSummary out;
    std::mt19937_64 gen(derive_seed(seed, 0));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> lambda_dist(1e-3, 1e-1);
    std::uniform_real_distribution<double> pilot_dist(0.1, 2.0);

    for (int c = 0; c < configs; ++c) {
        GradCheckCase cs;
        cs.layer_widths = shapes[c % 2];
        cs.loss = losses[(c / 2) % 2];
        cs.penalty = penalties[(c / 4) % 3];
        NetworkConfig net{cs.layer_widths, Activation::sigmoid};
        const int p = cs.layer_widths.front();
        const int q = cs.layer_widths.back();

        const LossSpec loss = cs.loss == "ls" ? LossSpec::least_squares()
                                              : LossSpec::least_distance(1e-3, GradientVariant::corrected);
        PenaltySpec penalty = PenaltySpec::none();
        if (cs.penalty == "group") {
            penalty = PenaltySpec::group_lasso(lambda_dist(gen), 1e-5);
        } else if (cs.penalty == "adaptive") {
            Vector norms(p + 1);
            for (Eigen::Index j = 0; j < norms.size(); ++j) norms[j] = pilot_dist(gen);
            penalty = PenaltySpec::adaptive(lambda_dist(gen), norms, 1.0, 1e-5);
        }

        NetworkParams params;
        Vector x(p), y(q);
        for (;;) {
            params = init_params(net, gen(), 1.0);
            for (int j = 0; j < p; ++j) x[j] = 2.0 * unit(gen);
            for (int k = 0; k < q; ++k) y[k] = 2.0 * unit(gen);
            if (!near_seams(params, x, y, loss, penalty)) break;
            ++out.resampled;
        }
        const Gradients bp = backprop(params, x, y, loss, penalty);
        const Gradients fd = finite_diff_gradient(params, x, y, loss, penalty, step);
        for (std::size_t l = 0; l < bp.layers.size(); ++l) {
            const Matrix& a = bp.layers[l];
            const Matrix& b = fd.layers[l];
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const double err = std::abs(a.data()[i] - b.data()[i]) /
                                   std::max(1.0, std::abs(a.data()[i]));
                cs.max_rel_error = std::max(cs.max_rel_error, err);
            }
        }
        out.max_rel_error = std::max(out.max_rel_error, cs.max_rel_error);
        out.cases.push_back(std::move(cs));
    }
    return out;
}

}  // namespace ldnet
