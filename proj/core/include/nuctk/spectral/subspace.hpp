#pragma once

#include <vector>

#include "nuctk/linalg.hpp"
#include "nuctk/spectral/nullspace.hpp"

namespace nuctk::spectral {

/// Principal angles between span(b1) and span(b2), in radians, descending.
/// min(r1, r2) angles are returned. Small angles are taken from the sines
/// (arcsin of the singular values of the projection residual) so that angles
/// far below 1e-8 are still resolved; large angles come from arccos of the
/// singular values of b1^T b2.
std::vector<double> principal_angles(const Matrix& b1, const Matrix& b2);
std::vector<double> principal_angles(const NullSpaceBasis& b1, const NullSpaceBasis& b2);

/// ||V^T V - I||_max
double orthonormality_error(const Matrix& v);

}  // namespace nuctk::spectral
