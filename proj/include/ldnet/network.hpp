#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ldnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = std::vector<bool>;

enum class Activation { sigmoid };

/// Layer widths [K0 = p, K1, ..., KL = q]; bias nodes are implicit.
/// Hidden layers use `hidden_activation`, the output layer is always identity.
struct NetworkConfig {
    std::vector<int> layer_widths;
    Activation hidden_activation = Activation::sigmoid;

    int inputs() const { return layer_widths.front(); }
    int outputs() const { return layer_widths.back(); }
    int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }

    /// Throws ConfigError if fewer than two layers or any width < 1.
    void validate() const;
};

/// The full learnable state. weights[l] has shape K_{l+1} x (K_l + 1);
/// column 0 holds the bias weights.
struct NetworkParams {
    std::vector<int> layer_widths;
    std::vector<Matrix> weights;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int inputs() const { return layer_widths.front(); }
    int outputs() const { return layer_widths.back(); }

    const Matrix& first_layer() const { return weights.front(); }
    Matrix& first_layer() { return weights.front(); }

    /// Shape chain and finiteness check; throws ShapeError / NumericError.
    void validate() const;

    bool operator==(const NetworkParams& other) const;
};

/// Intermediate values of one forward pass. activations[l] is h^(l) without
/// the bias entry; activations[0] is the input itself.
struct ForwardTrace {
    std::vector<Vector> pre_activations;  // z^(1) .. z^(L)
    std::vector<Vector> activations;      // h^(0) .. h^(L)
    Vector prediction;
};

double sigmoid(double z);
double sigmoid_derivative_from_value(double h);

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed, double scale = 0.5);

NetworkParams zero_params(const NetworkConfig& config);

ForwardTrace forward(const NetworkParams& params, const Eigen::Ref<const Vector>& x);

/// Row i of the result equals forward(params, X.row(i)).prediction.
Matrix predict_batch(const NetworkParams& params, const Matrix& X);

/// Batched forward pass over the rows of X. Each entry is a K_l x n matrix
/// whose columns are per-sample activations (without the bias row).
struct BatchTrace {
    std::vector<Matrix> activations;  // h^(0) .. h^(L), column-per-sample
};

BatchTrace forward_batch(const NetworkParams& params, const Matrix& X);

std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);

}  // namespace ldnet
