#pragma once

#include <stdexcept>
#include <string>

namespace wof {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not settle within its refinement budget.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Probability of the conditioning outcome is too small to invert.
class ImprobableOutcome : public Error {
public:
    ImprobableOutcome(const std::string& what, double probability)
        : Error(what), probability_(probability) {}
    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

/// Optimizer ran out of budget; carries the best point seen.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_x0, double best_x1, double best_value)
        : Error(what), best_{best_x0, best_x1}, best_value_(best_value) {}
    double best_x0() const noexcept { return best_[0]; }
    double best_x1() const noexcept { return best_[1]; }
    double best_value() const noexcept { return best_value_; }

private:
    double best_[2];
    double best_value_;
};

namespace detail {
inline void require(bool condition, const char* message) {
    if (!condition) throw InvalidArgument(message);
}
} // namespace detail

} // namespace wof
