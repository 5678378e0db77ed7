#pragma once

#include <functional>

#include "nuctk/linalg.hpp"

namespace nuctk::dfo {

/// Black-box simulator: parameters x -> observables s(theta_i; x), i = 1..o.
using Evaluator = std::function<Vector(const Vector&)>;

/// Weighted least-squares fit: minimize sum_i ((d_i - s_i(x)) / sigma_i)^2
/// subject to lower <= x <= upper.
struct ResidualProblem {
    Index n = 0;
    Index o = 0;
    Evaluator evaluator;
    Vector d;
    Vector sigma;
    Vector lower;  // -inf allowed
    Vector upper;  // +inf allowed

    /// Throws InvalidArgument unless shapes agree, lower <= upper and sigma > 0.
    void validate() const;
    /// Componentwise clamp into [lower, upper].
    Vector project(const Vector& x) const;
    bool feasible(const Vector& x) const;
};

struct EvaluationRecord {
    Index index = 0;
    Vector x;
    Vector r;
    double f = 0.0;  // sum of r_i^2
};

struct Chi2 {
    Vector r;
    double f = 0.0;
};

/// One evaluator call. r_i = (d_i - s_i(x)) / sigma_i. Evaluator exceptions and
/// non-finite or misshaped outputs are reported as EvaluationError carrying x.
Chi2 chi2(const ResidualProblem& problem, const Vector& x);

}  // namespace nuctk::dfo
