#pragma once

#include <functional>

#include "nuctk/linalg.hpp"

namespace nuctk::detail {

/// Removes span(locked) from the columns of x (two passes) and orthonormalizes
/// what remains with twice-iterated Gram-Schmidt. Columns whose remaining norm
/// falls below drop_tol times their incoming norm are discarded.
Matrix orthonormalize_against(Matrix x, const Matrix& locked, double drop_tol = 1e-10);

/// Block Krylov basis with full reorthogonalization, restricted to the
/// orthogonal complement of a set of locked vectors.
///
/// The projected matrix H = Q^T Op Q is accumulated as blocks are appended, and
/// Ritz residual norms come from the block-Lanczos relation
/// Op Q = Q H + W E^T, i.e. ||W y_last||.
class BlockKrylov {
public:
    using Operator = std::function<Matrix(const Matrix&)>;

    BlockKrylov(Operator op, const Matrix& locked, Index max_columns);

    /// Seeds the basis with x0 (orthonormalized against the locked vectors).
    /// Returns false if nothing independent is left.
    bool start(const Matrix& x0);

    /// Appends the next block. Returns false if the Krylov space is exhausted
    /// or the column budget is used up.
    bool expand();

    struct Ritz {
        Vector values;     // ascending
        Matrix coeffs;     // size() x size()
        Vector residuals;  // estimated ||Op z - theta z||
    };
    Ritz ritz() const;

    Matrix vectors(const Matrix& coeffs) const { return basis_.leftCols(size_) * coeffs; }
    Index size() const noexcept { return size_; }
    bool exhausted() const noexcept { return next_.cols() == 0; }

private:
    void absorb_block(Index begin, Index width);

    Operator op_;
    const Matrix& locked_;
    Index max_columns_;
    Matrix basis_;   // dim x capacity
    Matrix h_;       // capacity x capacity
    Index size_ = 0;
    Index last_begin_ = 0;
    Index last_width_ = 0;
    Matrix next_;    // orthonormal next block
    Matrix coupling_;  // next_^T W, so that W = next_ * coupling_
};

}  // namespace nuctk::detail
