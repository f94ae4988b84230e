#pragma once

#include <optional>
#include <vector>

#include "ldnet/network.hpp"

namespace ldnet {

/// Predictors X (n x p) and responses Y (n x q). Simulated data also carries
/// the noiseless regression surface and the truly relevant predictors.
struct Dataset {
    Matrix X;
    Matrix Y;
    std::optional<Matrix> true_mean;
    std::optional<Mask> relevant_mask;
    std::optional<Mask> outlier_mask;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
    int q() const { return static_cast<int>(Y.cols()); }

    /// Row counts agree across all present fields; throws ShapeError.
    void validate() const;

    /// Subset of rows, in the given order. Optional fields follow along.
    Dataset rows(const std::vector<int>& index) const;

    /// Single-response view used by the per-response baseline.
    Dataset response_column(int k) const;
};

}  // namespace ldnet
