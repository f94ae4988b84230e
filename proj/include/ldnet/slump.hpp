#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldnet/dataset.hpp"

namespace ldnet {

/// Raw concrete-slump table: every numeric mixture column as a predictor
/// (the row id column excluded) and Flow, Slump, Compressive strength as responses.
struct SlumpData {
    Dataset data;
    std::vector<std::string> predictor_names;
    Mask signal_mask;  // the six named mixture signals
};

/// Column lookup is case-insensitive on name prefixes; throws IoError on schema mismatch.
SlumpData load_slump_csv(const std::string& path);

struct SlumpOptions {
    double train_fraction = 0.7;
    int noise_columns = 2;
    bool standardize = true;
    double outlier_fraction = 0.0;
    double outlier_shift = 5.0;
};

struct SlumpSplit {
    Dataset train;
    Dataset test;
    Mask noise_mask;  // true for the injected U(-1, 1) columns
};

/// Appends U(-1, 1) noise predictors, splits floor(fraction * n) rows into the
/// training part, standardizes with training statistics, then optionally
/// shifts every response of a random subset of training rows.
SlumpSplit prepare_slump(const SlumpData& raw, const SlumpOptions& options, std::uint64_t seed);

}  // namespace ldnet
