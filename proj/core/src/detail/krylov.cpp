#include "nuctk/detail/krylov.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace nuctk::detail {

Matrix orthonormalize_against(Matrix x, const Matrix& locked, double drop_tol) {
    const Index dim = x.rows();
    Matrix out(dim, x.cols());
    Index kept = 0;
    for (Index j = 0; j < x.cols(); ++j) {
        Vector v = x.col(j);
        const double ref = v.norm();
        if (ref == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            if (locked.cols() > 0) v -= locked * (locked.transpose() * v);
            if (kept > 0) v -= out.leftCols(kept) * (out.leftCols(kept).transpose() * v);
        }
        const double nrm = v.norm();
        if (nrm <= drop_tol * ref) continue;
        out.col(kept++) = v / nrm;
    }
    return out.leftCols(kept);
}

BlockKrylov::BlockKrylov(Operator op, const Matrix& locked, Index max_columns)
    : op_(std::move(op)), locked_(locked), max_columns_(max_columns) {}

bool BlockKrylov::start(const Matrix& x0) {
    const Index dim = x0.rows();
    const Index cap = std::min(max_columns_, dim - locked_.cols());
    basis_.resize(dim, std::max<Index>(cap, 0));
    h_.setZero(std::max<Index>(cap, 0), std::max<Index>(cap, 0));
    size_ = 0;
    Matrix q = orthonormalize_against(x0, locked_);
    if (q.cols() == 0 || cap <= 0) {
        next_.resize(dim, 0);
        return false;
    }
    if (q.cols() > cap) q.conservativeResize(Eigen::NoChange, cap);
    basis_.leftCols(q.cols()) = q;
    absorb_block(0, q.cols());
    return true;
}

bool BlockKrylov::expand() {
    if (next_.cols() == 0) return false;
    const Index room = basis_.cols() - size_;
    if (room <= 0) return false;
    const Index width = std::min(room, next_.cols());
    const Index begin = size_;
    basis_.middleCols(begin, width) = next_.leftCols(width);
    absorb_block(begin, width);
    return true;
}

void BlockKrylov::absorb_block(Index begin, Index width) {
    const auto block = basis_.middleCols(begin, width);
    Matrix w = op_(Matrix(block));
    const Index total = begin + width;
    const auto q = basis_.leftCols(total);

    // H[:, new] = Q^T Op Q_new, symmetric fill
    const Matrix hcol = q.transpose() * w;
    h_.block(0, begin, total, width) = hcol;
    h_.block(begin, 0, width, total) = hcol.transpose();
    h_.block(begin, begin, width, width) =
        0.5 * (hcol.bottomRows(width) + hcol.bottomRows(width).transpose());

    size_ = total;
    last_begin_ = begin;
    last_width_ = width;

    // residual block W = (I - QQ^T)(I - LL^T) Op Q_new, reorthogonalized
    Matrix resid = w - q * hcol;
    for (int pass = 0; pass < 2; ++pass) {
        if (locked_.cols() > 0) resid -= locked_ * (locked_.transpose() * resid);
        resid -= q * (q.transpose() * resid);
    }
    const double scale = std::max(w.norm(), 1e-300);
    Matrix fresh = orthonormalize_against(resid, locked_, 0.0);
    // drop directions that are only rounding noise relative to the block image
    Index kept = 0;
    Matrix filtered(fresh.rows(), fresh.cols());
    for (Index j = 0; j < fresh.cols(); ++j) {
        Vector v = fresh.col(j);
        v -= q * (q.transpose() * v);
        if (kept > 0) v -= filtered.leftCols(kept) * (filtered.leftCols(kept).transpose() * v);
        const double nrm = v.norm();
        if (nrm < 0.5) continue;
        const double weight = (v.transpose() * resid).norm();
        if (weight <= 1e-14 * scale) continue;
        filtered.col(kept++) = v / nrm;
    }
    next_ = filtered.leftCols(kept);
    coupling_ = next_.transpose() * resid;
}

BlockKrylov::Ritz BlockKrylov::ritz() const {
    Ritz out;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h_.topLeftCorner(size_, size_));
    out.values = eig.eigenvalues();
    out.coeffs = eig.eigenvectors();
    out.residuals = Vector::Zero(size_);
    if (next_.cols() > 0) {
        const Matrix tail = coupling_ * out.coeffs.middleRows(last_begin_, last_width_);
        out.residuals = tail.colwise().norm().transpose();
    }
    return out;
}

}  // namespace nuctk::detail
