#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nuctk/dfo/problem.hpp"

namespace nuctk::dfo {

/// Built-in synthetic problems.
///   linear       r = b - A x, A (o x n) and b Gaussian; unbounded.
///   rosenbrock   n/2 chained pairs r = (10 (x2 - x1^2), 1 - x1); o = n.
///   bounded      n = o = 1, s(x) = x, d = 2, x <= 1; optimum x = 1, f = 1.
///   quadratic    o = 1, s(x) = sum x_j^2, d = 0; the noise-estimation base.
///   exponential  s(theta; x) = sum_k a_k exp(-b_k theta) with n/2 (a, b)
///                pairs and o abscissae on [0, 4], data drawn from a hidden
///                parameter vector plus Gaussian noise of size data_noise,
///                sigma = data_noise, bounds [0, 4]^n.
/// `noise` adds deterministic computational noise of that standard deviation
/// to every observable, derived from a hash of (seed, x, i).
struct ProblemSpec {
    std::string family = "linear";
    Index n = 0;  // 0 selects the family default
    Index o = 0;
    std::uint64_t seed = 0;
    double noise = 0.0;
    double data_noise = 0.01;
};

struct ProblemInstance {
    ResidualProblem problem;
    Vector x0;
    std::optional<Vector> x_star;  // known minimizer, when there is one
};

ProblemInstance make_problem(const ProblemSpec& spec);

std::vector<std::string> family_names();

/// Hash-based noise in [-sqrt(3), sqrt(3)] (unit variance), a pure function of its inputs.
double hash_noise(std::uint64_t seed, const Vector& x, Index component);

}  // namespace nuctk::dfo
