#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nuctk/linalg.hpp"

namespace nuctk::noise {

using ScalarFunction = std::function<double(const Vector&)>;

/// T[k] holds the k-th forward differences, T[0] being the input and
/// T[k][i] = T[k-1][i+1] - T[k-1][i]. Column k has size(values) - k entries.
using DifferenceTable = std::vector<std::vector<double>>;

DifferenceTable difference_table(const std::vector<double>& values);

/// (k!)^2 / (2k)!, the variance factor for k-th differences of i.i.d. noise.
double gamma(int k);

struct NoiseEstimate {
    double sigma_abs = 0.0;
    std::optional<double> sigma_rel;  // empty when f(x) == 0
    int order = 0;                    // selected difference order, 0 if none
    bool reliable = false;
    std::string advisory;  // why the estimate is unreliable, empty otherwise
    double f0 = 0.0;
    std::vector<double> samples;
};

/// Estimate from m+1 samples taken at equally spaced points along a line.
NoiseEstimate ecnoise_from_samples(const std::vector<double>& samples);

/// Samples f(x + i h dir) for i = 0..m (exactly m+1 calls) and estimates the
/// noise level. dir is normalized internally. Requires m >= 4 and h > 0.
NoiseEstimate ecnoise(const ScalarFunction& f, const Vector& x, const Vector& dir, double h,
                      int m = 8);

/// h = 1e-4 max(1, |x|)
double default_step(const Vector& x);

struct NoiseMapRow {
    Index point = 0;
    NoiseEstimate estimate;
    std::string error;  // nonempty when the point failed
};

struct NoiseMapOptions {
    double h = 0.0;  // 0 selects default_step per point
    int m = 8;
    std::uint64_t seed = 0;
    unsigned workers = 1;  // 0 uses hardware concurrency
};

/// One ecnoise call per point along a unit direction drawn from a stream
/// seeded by (seed, point index). f must be safe to call concurrently when
/// workers > 1. Failures are recorded per row and the map continues.
std::vector<NoiseMapRow> noise_map(const ScalarFunction& f, const std::vector<Vector>& points,
                                   const NoiseMapOptions& opts = {});

}  // namespace nuctk::noise
