#pragma once

#include <optional>

#include "nuctk/linalg.hpp"
#include "nuctk/spectral/operator_block.hpp"

namespace nuctk::spectral {

/// Chebyshev filter polynomial p with p(lambda) = 1 and |p| < 1 on the
/// unwanted part of the spectrum.
///
/// If lambda sits at one end of the spectrum the filter is a Chebyshev
/// polynomial in omega on the single unwanted interval. If lambda is interior,
/// the unwanted set is two intervals [lo, lambda-gap] and [lambda+gap, hi]; the
/// filter is then a Chebyshev polynomial in t = (omega - lambda)^2 on
/// [gap^2, tmax], which covers both. Evaluation always uses the normalized
/// three-term recurrence, never monomial coefficients.
class SpectralFilter {
public:
    enum class Variable { Omega, ShiftedSquare };

    /// `lo`/`hi` bound the spectrum, `gap` is the distance from lambda to the
    /// nearest unwanted eigenvalue.
    static SpectralFilter build(double lambda, double lo, double hi, double gap, int degree);

    double lambda() const noexcept { return lambda_; }
    int degree() const noexcept { return degree_; }
    Variable variable() const noexcept { return variable_; }

    /// Unwanted intervals in omega. The second one is set only for the
    /// two-sided (interior lambda) filter.
    std::pair<double, double> unwanted_interval() const noexcept { return unwanted_; }
    std::optional<std::pair<double, double>> second_unwanted_interval() const noexcept {
        return unwanted2_;
    }

    /// Coefficients in the Chebyshev basis T_0..T_d of the mapped variable.
    Vector chebyshev_coefficients() const;

    /// Upper bound of |p| on the unwanted set: 1 / |T_d(tau)|.
    double damping() const noexcept { return damping_; }

    double operator()(double omega) const;

    /// Y = p(A) X
    Matrix apply(const SymmetricOperatorBlock& a, const Matrix& x) const;

private:
    double mapped(double omega) const noexcept;

    double lambda_ = 0.0;
    int degree_ = 0;
    Variable variable_ = Variable::Omega;
    double center_ = 0.0;     // interval midpoint in the filter variable
    double halfwidth_ = 1.0;  // interval half-width in the filter variable
    double tau_ = 1.0;        // mapped position of lambda (|tau| > 1)
    double damping_ = 0.0;
    std::pair<double, double> unwanted_{0.0, 0.0};
    std::optional<std::pair<double, double>> unwanted2_;
};

}  // namespace nuctk::spectral
