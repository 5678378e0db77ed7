#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace nuctk {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the caller's input was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Reading or writing an external file failed or the file was malformed.
class IoError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a valid result.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The dense code path was asked to densify a block above the configured cap.
class BlockTooLarge : public NumericalError {
public:
    BlockTooLarge(std::ptrdiff_t dim, std::ptrdiff_t cap)
        : NumericalError("block too large for dense path (dim " + std::to_string(dim) + " > cap " +
                         std::to_string(cap) + ")"),
          dim_(dim), cap_(cap) {}

    std::ptrdiff_t dim() const noexcept { return dim_; }
    std::ptrdiff_t cap() const noexcept { return cap_; }

private:
    std::ptrdiff_t dim_;
    std::ptrdiff_t cap_;
};

/// The shifted operator of shift-invert Lanczos is (numerically) singular.
class ShiftHitEigenvalue : public NumericalError {
public:
    explicit ShiftHitEigenvalue(double shift)
        : NumericalError("shift " + std::to_string(shift) +
                         " hit an eigenvalue, retry with new offset"),
          shift_(shift) {}

    double shift() const noexcept { return shift_; }

private:
    double shift_;
};

/// An iterative method stopped before convergence. Carries whatever partial
/// result was available (e.g. the null vectors already locked).
class NotConverged : public NumericalError {
public:
    NotConverged(const std::string& what, std::ptrdiff_t partial_count, std::ptrdiff_t iterations,
                 Eigen::MatrixXd partial = {})
        : NumericalError(what + " (partial count " + std::to_string(partial_count) + " after " +
                         std::to_string(iterations) + " iterations)"),
          partial_count_(partial_count), iterations_(iterations), partial_(std::move(partial)) {}

    std::ptrdiff_t partial_count() const noexcept { return partial_count_; }
    std::ptrdiff_t iterations() const noexcept { return iterations_; }
    const Eigen::MatrixXd& partial() const noexcept { return partial_; }

private:
    std::ptrdiff_t partial_count_;
    std::ptrdiff_t iterations_;
    Eigen::MatrixXd partial_;
};

/// The requested total angular momentum has no states in the model space.
class NoStatesWithJ : public NumericalError {
public:
    NoStatesWithJ() : NumericalError("no states with requested J") {}
};

/// A user-supplied black-box evaluator threw; the offending point is attached.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, Eigen::VectorXd x)
        : Error("evaluator failure: " + what), x_(std::move(x)) {}

    const Eigen::VectorXd& x() const noexcept { return x_; }

private:
    Eigen::VectorXd x_;
};

}  // namespace nuctk
