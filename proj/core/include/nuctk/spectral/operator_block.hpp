#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nuctk/linalg.hpp"

namespace nuctk::spectral {

/// One stored entry of a symmetric block. Stored with row <= col.
struct Entry {
    Index row = 0;
    Index col = 0;
    double value = 0.0;
};

/// One diagonal block of a sparse symmetric operator (a J^2 or Hamiltonian block).
///
/// Only the upper triangle is stored; entries supplied below the diagonal are
/// mirrored into the upper triangle on construction. Construction rejects
/// out-of-range indices and duplicate (i,j) pairs (after mirroring), so every
/// instance satisfies the block invariants.
class SymmetricOperatorBlock {
public:
    SymmetricOperatorBlock() = default;
    SymmetricOperatorBlock(Index dim, std::vector<Entry> entries, std::string label = {});

    Index dim() const noexcept { return dim_; }
    const std::string& label() const noexcept { return label_; }
    std::span<const Entry> entries() const noexcept { return entries_; }

    /// y = A x
    Vector apply(const Vector& x) const;
    /// Y = A X, column by column
    Matrix apply(const Matrix& x) const;

    /// Full symmetric sparse matrix (both triangles).
    const SparseMatrix& sparse() const noexcept { return full_; }
    Matrix to_dense() const;

    double frobenius_norm() const noexcept { return frobenius_; }

    /// Interval [lo, hi] containing the spectrum, from Gershgorin discs.
    std::pair<double, double> gershgorin_bounds() const;

private:
    Index dim_ = 0;
    std::vector<Entry> entries_;
    std::string label_;
    SparseMatrix full_;
    double frobenius_ = 0.0;
};

}  // namespace nuctk::spectral
