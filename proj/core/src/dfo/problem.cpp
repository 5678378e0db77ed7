#include "nuctk/dfo/problem.hpp"

#include <exception>

#include "nuctk/error.hpp"

namespace nuctk::dfo {

void ResidualProblem::validate() const {
    if (n < 1 || o < 1) throw InvalidArgument("problem needs n >= 1 and o >= 1");
    if (!evaluator) throw InvalidArgument("problem has no evaluator");
    if (d.size() != o || sigma.size() != o)
        throw InvalidArgument("data and weights must have o entries");
    if (lower.size() != n || upper.size() != n)
        throw InvalidArgument("bounds must have n entries");
    if ((sigma.array() <= 0.0).any() || !sigma.allFinite())
        throw InvalidArgument("weights sigma must be positive and finite");
    for (Index j = 0; j < n; ++j)
        if (!(lower(j) <= upper(j))) throw InvalidArgument("bounds need lower <= upper");
}

Vector ResidualProblem::project(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

bool ResidualProblem::feasible(const Vector& x) const {
    return x.size() == n && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Chi2 chi2(const ResidualProblem& problem, const Vector& x) {
    Vector s;
    try {
        s = problem.evaluator(x);
    } catch (const EvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw EvaluationError(e.what(), x);
    }
    if (s.size() != problem.o) throw EvaluationError("evaluator returned wrong length", x);
    if (!s.allFinite()) throw EvaluationError("evaluator returned non-finite values", x);
    Chi2 out;
    out.r = (problem.d - s).cwiseQuotient(problem.sigma);
    out.f = out.r.squaredNorm();
    return out;
}

}  // namespace nuctk::dfo
