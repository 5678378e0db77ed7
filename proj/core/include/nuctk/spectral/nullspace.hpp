#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "nuctk/linalg.hpp"
#include "nuctk/spectral/operator_block.hpp"

namespace nuctk::spectral {

/// Orthonormal basis of the null space of (A - lambda I) for one block.
struct NullSpaceBasis {
    std::string block_label;
    Matrix vectors;              // dim x r, column-orthonormal
    double residual_norm = 0.0;  // max_j ||(A - lambda I) v_j||_2

    Index rank() const noexcept { return vectors.cols(); }
    Index dim() const noexcept { return vectors.rows(); }
};

inline constexpr Index kDefaultDenseCap = 4096;

struct RqrOptions {
    /// Relative cut on |R_ii| against the largest |R_ii|. Zero selects the
    /// absolute default dim * eps * ||A - lambda I||_F.
    double rank_tol = 0.0;
    /// Number of sketch columns before oversampling. Zero means dim.
    Index sketch_width = 0;
    Index oversampling = 8;
    std::uint64_t seed = 0;
    Index dense_cap = kDefaultDenseCap;
};

struct SilOptions {
    double shift_offset = 0.5;
    /// Upper bound on the number of null vectors extracted. Zero means dim.
    Index k_max = 0;
    /// Relative residual tolerance against ||A||_F.
    double tol = 1e-12;
    Index block_size = 8;
    /// Krylov blocks per restart round.
    Index max_steps = 60;
    std::uint64_t seed = 0;
};

struct PasiOptions {
    /// Spectrum enclosure; Gershgorin discs when unset.
    std::optional<std::pair<double, double>> spectrum_bounds;
    /// Distance from lambda to the nearest unwanted eigenvalue. The default
    /// suits J^2 spectra, whose eigenvalues S(S+1) are at least 2 apart
    /// (3 apart around S = 1/2).
    double gap = 1.0;
    int degree = 50;
    Index block_size = 8;
    Index max_iters = 500;
    /// Relative residual tolerance against ||A||_F.
    double tol = 1e-12;
    std::uint64_t seed = 0;
};

/// Randomized rank-revealing QR: densify (A - lambda I), mix it with a random
/// orthogonal matrix and read the numerical null space off an unpivoted QR.
NullSpaceBasis rqr_nullspace(const SymmetricOperatorBlock& a, double lambda,
                             const RqrOptions& opts = {});

/// Shift-invert block Lanczos with full reorthogonalization and locking.
/// Throws ShiftHitEigenvalue if lambda + shift_offset is an eigenvalue and
/// NotConverged if the cluster cannot be resolved within the limits.
NullSpaceBasis sil_nullspace(const SymmetricOperatorBlock& a, double lambda,
                             const SilOptions& opts = {});

/// Polynomial-accelerated subspace iteration with an adaptive block.
NullSpaceBasis pasi_nullspace(const SymmetricOperatorBlock& a, double lambda,
                              const PasiOptions& opts = {});

/// Reference oracle: full dense eigendecomposition, keep |mu - lambda| <= tol.
NullSpaceBasis dense_null_oracle(const SymmetricOperatorBlock& a, double lambda, double tol,
                                 Index dense_cap = kDefaultDenseCap);

/// max_j ||(A - lambda I) v_j||_2
double null_residual(const SymmetricOperatorBlock& a, double lambda, const Matrix& v);

}  // namespace nuctk::spectral
