#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ldnet {

struct GradCheckCase {
    std::vector<int> layer_widths;
    std::string loss;     // "ls" or "ld"
    std::string penalty;  // "none", "group" or "adaptive"
    double max_rel_error = 0.0;
};

struct GradCheckSummary {
    std::vector<GradCheckCase> cases;
    int resampled = 0;  // draws rejected for sitting near a smoothing seam
    double max_rel_error = 0.0;
};

/// Random single-sample configurations over layer shapes {[1,3,2], [2,10,10,3]},
/// LS / corrected LD and the three penalties, cycling through the combinations.
/// The error of an entry is |bp - fd| / max(1, |bp|).
GradCheckSummary audit_gradients(int configs, std::uint64_t seed, double step = 1e-6);

}  // namespace ldnet
