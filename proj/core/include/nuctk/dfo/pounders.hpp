#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nuctk/dfo/problem.hpp"
#include "nuctk/linalg.hpp"

namespace nuctk::dfo {

struct SolverOptions {
    /// Initial trust-region radius; 0 selects 0.1 * max(1, ||x0||_inf).
    double delta0 = 0.0;
    /// Stop once the radius drops below this; 0 selects 1e-8 * max(1, ||x0||).
    double delta_min = 0.0;
    /// Radius cap; 0 selects 1e3 * delta0.
    double delta_max = 0.0;
    Index max_evals = 500;
    double eta_accept = 0.0;
    double gamma_shrink = 0.5;
    double gamma_grow = 2.0;
    /// Predicted decreases at or below this are treated as zero.
    double noise_floor = 0.0;
    /// Radius factors for affine points (0: sqrt(n)) and for extra points
    /// (0: max(10, sqrt(n))), in units of the trust-region radius.
    double c1 = 0.0;
    double c2 = 0.0;
    /// Minimum projection of a scaled displacement onto the uncovered directions.
    double pivot_tol = 1e-3;
    /// Extra points are added while the scaled KKT matrix stays below this condition number.
    double kkt_cond_max = 1e6;
};

enum class Termination { SmallRadius, BudgetExhausted, EvaluatorFailure };

std::string to_string(Termination t);

/// m(s) = c + g^T s + s^T H s / 2 around the current center.
struct QuadraticModel {
    double c = 0.0;
    Vector g;
    Matrix h;
    double operator()(const Vector& s) const { return c + g.dot(s) + 0.5 * s.dot(h * s); }
};

/// State exposed to an observer after each model build.
struct IterationSnapshot {
    Index iteration = 0;
    Vector center;
    double delta = 0.0;
    bool model_valid = false;
    std::vector<Vector> displacements;  // interpolation points minus center
    std::vector<Vector> values;         // modeled values at those points
    std::vector<QuadraticModel> models;  // one per residual, or one for f
    QuadraticModel master;               // model of f
};

struct FitResult {
    Vector best_x;
    Vector best_r;
    double best_f = 0.0;
    std::vector<EvaluationRecord> trace;  // new evaluations only, indices from 0
    Termination reason = Termination::SmallRadius;
    std::string message;
    Index iterations = 0;
    /// New evaluations made before the first iteration that settled on an
    /// accepted center (a successful step, or a center the valid model cannot
    /// improve). A center seeded from history counts as accepted.
    Index new_evals_before_first_accept = 0;
    /// Largest relative interpolation error seen over all model builds.
    double max_interpolation_error = 0.0;
};

/// Prior evaluations used to seed the solver. Records are deduplicated by x.
struct WarmStart {
    std::vector<EvaluationRecord> records;
};

/// Validates record shapes against (n, o), drops duplicate x, renumbers.
WarmStart warm_start(const std::vector<EvaluationRecord>& history, Index n, Index o);

using Observer = std::function<void(const IterationSnapshot&)>;

/// Model-based trust-region least squares on the individual residuals: one
/// quadratic model per residual, master model gradient 2 G^T r and Hessian
/// 2 (G^T G + sum_i r_i H_i).
FitResult pounders_minimize(const ResidualProblem& problem, const Vector& x0,
                            const SolverOptions& opts = {}, const WarmStart& warm = {},
                            const Observer& observer = {});

/// The same framework with a single quadratic model of f.
FitResult pounder_minimize(const ResidualProblem& problem, const Vector& x0,
                           const SolverOptions& opts = {}, const WarmStart& warm = {},
                           const Observer& observer = {});

/// Bound-constrained quadratic minimization min g^T s + s^T H s / 2 over
/// lo <= s <= hi (lo <= 0 <= hi) by projected gradient plus CG on the free
/// variables. Variables that stop on a bound are set to it exactly.
Vector solve_box_qp(const Vector& g, const Matrix& h, const Vector& lo, const Vector& hi);

}  // namespace nuctk::dfo
