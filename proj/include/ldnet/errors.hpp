#pragma once

#include <stdexcept>
#include <string>

namespace ldnet {

// Invalid hyperparameters, malformed config files, unknown options.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operands whose dimensions do not chain.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite value during backprop or training.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, int where)
        : std::runtime_error(what), where_(where) {}

    /// Layer index (backprop) or epoch index (fit) where the failure occurred.
    int where() const noexcept { return where_; }

private:
    int where_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ldnet
