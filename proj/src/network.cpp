#include "ldnet/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ldnet/errors.hpp"

namespace ldnet {

void NetworkConfig::validate() const {
    if (layer_widths.size() < 2) {
        throw ConfigError("network needs at least an input and an output layer");
    }
    for (std::size_t l = 0; l < layer_widths.size(); ++l) {
        if (layer_widths[l] < 1) {
            throw ConfigError("layer " + std::to_string(l) + " has width " +
                              std::to_string(layer_widths[l]) + "; widths must be >= 1");
        }
    }
}

void NetworkParams::validate() const {
    if (layer_widths.size() != weights.size() + 1 || weights.empty()) {
        throw ShapeError("layer_widths and weights disagree on the number of layers");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        if (w.rows() != layer_widths[l + 1] || w.cols() != layer_widths[l] + 1) {
            std::ostringstream msg;
            msg << "weight matrix " << l + 1 << " is " << w.rows() << "x" << w.cols()
                << ", expected " << layer_widths[l + 1] << "x" << layer_widths[l] + 1;
            throw ShapeError(msg.str());
        }
        if (!w.allFinite()) {
            throw NumericError("weight matrix " + std::to_string(l + 1) + " has non-finite entries",
                               static_cast<int>(l + 1));
        }
    }
}

bool NetworkParams::operator==(const NetworkParams& other) const {
    if (layer_widths != other.layer_widths || weights.size() != other.weights.size()) {
        return false;
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != other.weights[l].rows() ||
            weights[l].cols() != other.weights[l].cols() || weights[l] != other.weights[l]) {
            return false;
        }
    }
    return true;
}

double sigmoid(double z) {
    // Split on sign so exp never overflows.
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double sigmoid_derivative_from_value(double h) { return h * (1.0 - h); }

NetworkParams zero_params(const NetworkConfig& config) {
    config.validate();
    NetworkParams params;
    params.layer_widths = config.layer_widths;
    for (int l = 1; l < static_cast<int>(config.layer_widths.size()); ++l) {
        params.weights.push_back(
            Matrix::Zero(config.layer_widths[l], config.layer_widths[l - 1] + 1));
    }
    return params;
}

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed, double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw ConfigError("init scale must be a finite nonnegative number");
    }
    NetworkParams params = zero_params(config);
    if (scale == 0.0) {
        return params;
    }
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif(-scale, scale);
    for (auto& w : params.weights) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = unif(gen);
            }
        }
    }
    return params;
}

ForwardTrace forward(const NetworkParams& params, const Eigen::Ref<const Vector>& x) {
    if (x.size() != params.inputs()) {
        throw ShapeError("input has length " + std::to_string(x.size()) + ", network expects " +
                         std::to_string(params.inputs()));
    }
    ForwardTrace trace;
    trace.activations.push_back(x);
    const int L = params.num_layers();
    for (int l = 0; l < L; ++l) {
        const Matrix& w = params.weights[l];
        const Vector& h = trace.activations.back();
        Vector z = w.col(0) + w.rightCols(w.cols() - 1) * h;
        trace.pre_activations.push_back(z);
        if (l + 1 < L) {
            trace.activations.push_back(z.unaryExpr([](double v) { return sigmoid(v); }));
        } else {
            trace.activations.push_back(z);
        }
    }
    trace.prediction = trace.activations.back();
    return trace;
}

BatchTrace forward_batch(const NetworkParams& params, const Matrix& X) {
    if (X.cols() != params.inputs()) {
        throw ShapeError("predictor matrix has " + std::to_string(X.cols()) +
                         " columns, network expects " + std::to_string(params.inputs()));
    }
    BatchTrace trace;
    trace.activations.reserve(params.weights.size() + 1);
    trace.activations.push_back(X.transpose());
    const int L = params.num_layers();
    for (int l = 0; l < L; ++l) {
        const Matrix& w = params.weights[l];
        Matrix z = w.rightCols(w.cols() - 1) * trace.activations.back();
        z.colwise() += w.col(0);
        if (l + 1 < L) {
            z = z.unaryExpr([](double v) { return sigmoid(v); });
        }
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

Matrix predict_batch(const NetworkParams& params, const Matrix& X) {
    if (X.rows() == 0) {
        if (X.cols() != params.inputs()) {
            throw ShapeError("predictor matrix has the wrong number of columns");
        }
        return Matrix(0, params.outputs());
    }
    return forward_batch(params, X).activations.back().transpose();
}

std::string params_to_json(const NetworkParams& params) {
    nlohmann::json doc;
    doc["layer_widths"] = params.layer_widths;
    auto layers = nlohmann::json::array();
    for (const auto& w : params.weights) {
        auto rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            std::vector<double> row(w.cols());
            for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = w(r, c);
            rows.push_back(row);
        }
        layers.push_back(rows);
    }
    doc["weights"] = layers;
    return doc.dump();
}

NetworkParams params_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed network JSON: ") + e.what());
    }
    NetworkParams params;
    try {
        params.layer_widths = doc.at("layer_widths").get<std::vector<int>>();
        for (const auto& layer : doc.at("weights")) {
            const auto rows = layer.get<std::vector<std::vector<double>>>();
            const Eigen::Index ncols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
            Matrix w(static_cast<Eigen::Index>(rows.size()), ncols);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (static_cast<Eigen::Index>(rows[r].size()) != ncols) {
                    throw ShapeError("ragged weight matrix in network JSON");
                }
                for (Eigen::Index c = 0; c < ncols; ++c) w(r, c) = rows[r][c];
            }
            params.weights.push_back(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("network JSON is missing fields: ") + e.what());
    }
    params.validate();
    return params;
}

}  // namespace ldnet
