#pragma once

#include <cstdint>
#include <optional>

#include "ldnet/dataset.hpp"

namespace ldnet {

enum class ErrorKind { std_normal_iid, t3_iid, mv_normal, mv_t3 };

struct ErrorSpec {
    ErrorKind kind = ErrorKind::std_normal_iid;
    double df = 3.0;
    std::optional<Matrix> sigma;  // q x q, identity when absent

    /// Throws ConfigError for bad df or a sigma that is not symmetric positive definite.
    void validate(int q) const;
};

/// n x q error matrix; rows are independent draws.
Matrix sample_errors(const ErrorSpec& spec, int n, int q, std::uint64_t seed);

/// Noiseless surface of the single-predictor designs (case 1 or 2) at each x.
Matrix example1_mean(int case_id, int q, const Vector& x);

/// x ~ U(-5, 5), y = f(x) + error, p = 1.
Dataset gen_example1(int case_id, int q, int n, const ErrorSpec& error, std::uint64_t seed);

/// Noiseless sparse surface: 0.1k + 0.1 x1^3 + 0.5 x2^2 + x1 + x2 + x3 for k = 1..3.
Matrix example3_mean(const Matrix& X);

/// Ten U(-3, 3) predictors, three of them relevant, q = 3.
Dataset gen_example3(int n, const ErrorSpec& error, std::uint64_t seed);

/// Shifts ceil(alpha n) random rows: +shift on responses 1, 3, 5, ... and
/// -shift on responses 2, 4, ... (1-based).
Dataset contaminate(const Dataset& data, double alpha, double shift, std::uint64_t seed);

/// Adds `shift` to every response of ceil(alpha n) random rows.
Dataset contaminate_uniform(const Dataset& data, double alpha, double shift, std::uint64_t seed);

}  // namespace ldnet
