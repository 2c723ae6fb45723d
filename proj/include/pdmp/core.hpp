#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace pdmp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ModeId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A point (x, i) of the hybrid state space R^d x E.
struct HybridState {
    Vec x;
    ModeId mode = 0;
};

// Error kinds. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A modelling assumption (irreducibility, dissipativity, moment range...) does not hold.
class InvalidAssumption : public Error {
public:
    using Error::Error;
};

class IntegrationDiverged : public Error {
public:
    using Error::Error;
};

/// A sampled jump rate exceeded the declared thinning bound.
class BoundViolation : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// Closed-form constant evaluated exactly at a degenerate (double-root) configuration.
class BoundaryError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace pdmp
