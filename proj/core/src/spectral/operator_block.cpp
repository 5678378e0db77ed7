#include "nuctk/spectral/operator_block.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nuctk/error.hpp"

namespace nuctk::spectral {

SymmetricOperatorBlock::SymmetricOperatorBlock(Index dim, std::vector<Entry> entries,
                                               std::string label)
    : dim_(dim), entries_(std::move(entries)), label_(std::move(label)) {
    if (dim_ < 1) throw InvalidArgument("operator block dimension must be positive");

    for (auto& e : entries_) {
        if (e.row < 0 || e.col < 0 || e.row >= dim_ || e.col >= dim_)
            throw InvalidArgument("operator block entry (" + std::to_string(e.row) + "," +
                                  std::to_string(e.col) + ") outside [0," + std::to_string(dim_) +
                                  ")");
        if (!std::isfinite(e.value)) throw InvalidArgument("operator block entry is not finite");
        if (e.row > e.col) std::swap(e.row, e.col);
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t k = 1; k < entries_.size(); ++k) {
        if (entries_[k].row == entries_[k - 1].row && entries_[k].col == entries_[k - 1].col)
            throw InvalidArgument("duplicate operator block entry (" +
                                  std::to_string(entries_[k].row) + "," +
                                  std::to_string(entries_[k].col) + ")");
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * entries_.size());
    double fro2 = 0.0;
    for (const auto& e : entries_) {
        triplets.emplace_back(e.row, e.col, e.value);
        if (e.row != e.col) {
            triplets.emplace_back(e.col, e.row, e.value);
            fro2 += 2.0 * e.value * e.value;
        } else {
            fro2 += e.value * e.value;
        }
    }
    full_.resize(dim_, dim_);
    full_.setFromTriplets(triplets.begin(), triplets.end());
    full_.makeCompressed();
    frobenius_ = std::sqrt(fro2);
}

Vector SymmetricOperatorBlock::apply(const Vector& x) const {
    if (x.size() != dim_) throw InvalidArgument("operator block apply: dimension mismatch");
    return full_ * x;
}

Matrix SymmetricOperatorBlock::apply(const Matrix& x) const {
    if (x.rows() != dim_) throw InvalidArgument("operator block apply: dimension mismatch");
    return full_ * x;
}

Matrix SymmetricOperatorBlock::to_dense() const { return Matrix(full_); }

std::pair<double, double> SymmetricOperatorBlock::gershgorin_bounds() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < full_.outerSize(); ++j) {
        double diag = 0.0;
        double radius = 0.0;
        for (SparseMatrix::InnerIterator it(full_, j); it; ++it) {
            if (it.row() == j)
                diag = it.value();
            else
                radius += std::abs(it.value());
        }
        lo = std::min(lo, diag - radius);
        hi = std::max(hi, diag + radius);
    }
    return {lo, hi};
}

}  // namespace nuctk::spectral
