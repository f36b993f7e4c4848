#pragma once

#include <stdexcept>
#include <string>

namespace ptsa {

enum class ErrorCode {
    invalid_argument,
    io,
    parse,
    numerical,
    unsupported,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Thrown by the power-flow solver when Newton-Raphson fails; carries the
/// final mismatch so callers can decide whether the scenario is infeasible.
class PowerFlowDiverged : public Error {
public:
    PowerFlowDiverged(double max_mismatch, int iterations)
        : Error(ErrorCode::numerical,
                "power flow did not converge (max mismatch " +
                    std::to_string(max_mismatch) + " pu after " +
                    std::to_string(iterations) + " iterations)"),
          max_mismatch_(max_mismatch),
          iterations_(iterations) {}

    double max_mismatch() const noexcept { return max_mismatch_; }
    int iterations() const noexcept { return iterations_; }

private:
    double max_mismatch_;
    int iterations_;
};

}  // namespace ptsa
