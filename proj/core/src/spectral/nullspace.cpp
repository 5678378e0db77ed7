#include "nuctk/spectral/nullspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseLU>

#include "nuctk/detail/krylov.hpp"
#include "nuctk/error.hpp"
#include "nuctk/random.hpp"
#include "nuctk/spectral/filter.hpp"

namespace nuctk::spectral {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Matrix shifted_dense(const SymmetricOperatorBlock& a, double lambda, Index cap) {
    if (a.dim() > cap) throw BlockTooLarge(a.dim(), cap);
    Matrix b = a.to_dense();
    b.diagonal().array() -= lambda;
    return b;
}

NullSpaceBasis make_basis(const SymmetricOperatorBlock& a, double lambda, Matrix v) {
    NullSpaceBasis out;
    out.block_label = a.label();
    out.residual_norm = null_residual(a, lambda, v);
    out.vectors = std::move(v);
    return out;
}

NullSpaceBasis empty_basis(const SymmetricOperatorBlock& a) {
    NullSpaceBasis out;
    out.block_label = a.label();
    out.vectors.resize(a.dim(), 0);
    return out;
}

// thin Q of an unpivoted Householder QR
Matrix thin_q(const Matrix& x) {
    Eigen::HouseholderQR<Matrix> qr(x);
    return qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
}

}  // namespace

double null_residual(const SymmetricOperatorBlock& a, double lambda, const Matrix& v) {
    if (v.cols() == 0) return 0.0;
    Matrix r = a.apply(v);
    r -= lambda * v;
    return r.colwise().norm().maxCoeff();
}

// ---------------------------------------------------------------------------
// RQR

NullSpaceBasis rqr_nullspace(const SymmetricOperatorBlock& a, double lambda,
                             const RqrOptions& opts) {
    if (opts.rank_tol < 0.0) throw InvalidArgument("rqr_nullspace: rank_tol must be positive");
    const Index n = a.dim();
    const Matrix b = shifted_dense(a, lambda, opts.dense_cap);
    const double fro = b.norm();
    if (fro == 0.0) {
        return make_basis(a, lambda, Matrix::Identity(n, n));
    }

    const Index width = opts.sketch_width > 0 ? opts.sketch_width : n;
    const Index cols = std::min(n, width + (width < n ? opts.oversampling : 0));

    // first QR: random orthogonal mixing from a Gaussian sketch
    Rng rng = make_rng(opts.seed);
    const Matrix mixing = thin_q(gaussian_matrix(n, cols, rng));

    // second QR: unpivoted factorization of the mixed operator
    Eigen::HouseholderQR<Matrix> qr(b * mixing);
    const Matrix& packed = qr.matrixQR();
    const Index diag_len = std::min(n, cols);
    double rmax = 0.0;
    for (Index i = 0; i < diag_len; ++i) rmax = std::max(rmax, std::abs(packed(i, i)));

    const double cut =
        opts.rank_tol > 0.0 ? opts.rank_tol * rmax : static_cast<double>(n) * kEps * fro;
    // random mixing puts the independent columns first; rank = leading run above the cut
    Index rank = 0;
    while (rank < diag_len && std::abs(packed(rank, rank)) > cut) ++rank;

    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix null_basis = q.rightCols(n - rank);
    return make_basis(a, lambda, std::move(null_basis));
}

// ---------------------------------------------------------------------------
// SIL

NullSpaceBasis sil_nullspace(const SymmetricOperatorBlock& a, double lambda,
                             const SilOptions& opts) {
    if (opts.shift_offset == 0.0) throw InvalidArgument("sil_nullspace: zero shift offset");
    if (opts.block_size < 1) throw InvalidArgument("sil_nullspace: block size must be positive");
    const Index n = a.dim();
    const Index k_max = opts.k_max > 0 ? std::min(opts.k_max, n) : n;
    const double sigma = lambda + opts.shift_offset;

    SparseMatrix shifted = a.sparse();
    {
        SparseMatrix id(n, n);
        id.setIdentity();
        shifted -= sigma * id;
    }
    shifted.makeCompressed();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(shifted);
    lu.factorize(shifted);
    if (lu.info() != Eigen::Success) throw ShiftHitEigenvalue(sigma);

    const double shifted_norm = std::max(shifted.norm(), 1e-300);
    Rng rng = make_rng(opts.seed);
    {
        // a (numerically) singular shift shows up as a huge solution
        const Vector probe = gaussian_matrix(n, 1, rng).col(0);
        const Vector sol = lu.solve(probe);
        if (!sol.allFinite() || sol.norm() * shifted_norm > probe.norm() / std::sqrt(kEps))
            throw ShiftHitEigenvalue(sigma);
    }

    const double norm_a = std::max(a.frobenius_norm(), 1e-300);
    const double accept = opts.tol * norm_a;
    const double target = -1.0 / opts.shift_offset;
    // ||(A - lambda I) z|| <= |offset| ||A - sigma I|| ||T z - theta z||
    const double inner_tol = accept / (std::abs(opts.shift_offset) * shifted_norm);
    const double class_tol = 1e-8 * std::max(1.0, norm_a);

    auto solve = [&](const Matrix& x) -> Matrix {
        Matrix y(x.rows(), x.cols());
        for (Index j = 0; j < x.cols(); ++j) y.col(j) = lu.solve(Vector(x.col(j)));
        return y;
    };

    Matrix locked(n, 0);
    Index rounds = 0;
    while (locked.cols() < n) {
        ++rounds;
        const Index width = std::min(opts.block_size, n - locked.cols());
        const Index capacity = std::min(n - locked.cols(), width * opts.max_steps);
        detail::BlockKrylov krylov(solve, locked, capacity);
        if (!krylov.start(gaussian_matrix(n, width, rng))) break;

        std::vector<Index> targets;
        bool settled = false;
        for (Index step = 0; step < opts.max_steps && !settled; ++step) {
            const auto ritz = krylov.ritz();
            // the target cluster is dominant in |theta|; scan from the largest magnitude
            std::vector<Index> order(static_cast<std::size_t>(ritz.values.size()));
            std::iota(order.begin(), order.end(), Index{0});
            std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
                return std::abs(ritz.values(i)) > std::abs(ritz.values(j));
            });
            targets.clear();
            Index first_other = -1;
            for (Index idx : order) {
                const double theta = ritz.values(idx);
                const bool converged = ritz.residuals(idx) <= inner_tol * std::max(1.0, std::abs(theta));
                const double mu = theta != 0.0 ? sigma + 1.0 / theta
                                               : std::numeric_limits<double>::infinity();
                if (converged && std::abs(mu - lambda) <= class_tol) {
                    targets.push_back(idx);
                } else if (converged && std::abs(theta) > std::abs(target)) {
                    continue;  // eigenvalue closer to the shift than lambda; not ours
                } else {
                    first_other = idx;
                    break;
                }
            }
            const bool full = static_cast<Index>(targets.size()) >= width;
            // the cluster is resolved once the next Ritz value is provably not a target
            const bool other_settled =
                first_other < 0 ||
                (ritz.residuals(first_other) <= 1e-6 * std::max(1.0, std::abs(ritz.values(first_other))) &&
                 std::abs(ritz.values(first_other) - target) > 1e-3 * std::abs(target));
            settled = full || other_settled || krylov.exhausted();
            if (settled) {
                Matrix coeffs(ritz.coeffs.rows(), static_cast<Index>(targets.size()));
                for (std::size_t t = 0; t < targets.size(); ++t)
                    coeffs.col(static_cast<Index>(t)) = ritz.coeffs.col(targets[t]);
                Matrix z = krylov.vectors(coeffs);
                // one inverse-iteration polish, then re-orthonormalize against locked
                z = detail::orthonormalize_against(solve(z), locked);
                for (Index j = 0; j < z.cols(); ++j) {
                    Vector r = a.apply(Vector(z.col(j)));
                    r -= lambda * z.col(j);
                    if (r.norm() > accept)
                        throw NotConverged("shift-invert Lanczos: polished vector misses tolerance",
                                           locked.cols(), rounds, locked);
                }
                if (locked.cols() + z.cols() > k_max)
                    throw NotConverged("shift-invert Lanczos: more null vectors than k_max",
                                       locked.cols(), rounds, locked);
                Matrix grown(n, locked.cols() + z.cols());
                grown << locked, z;
                locked = std::move(grown);
            } else if (!krylov.expand() && !krylov.exhausted()) {
                throw NotConverged("shift-invert Lanczos: Krylov budget exhausted", locked.cols(),
                                   rounds, locked);
            }
        }
        if (!settled)
            throw NotConverged("shift-invert Lanczos: cluster not resolved", locked.cols(), rounds,
                               locked);
        if (static_cast<Index>(targets.size()) < width) break;
        if (locked.cols() >= k_max && locked.cols() < n) {
            throw NotConverged("shift-invert Lanczos: k_max reached with cluster unresolved",
                               locked.cols(), rounds, locked);
        }
    }
    if (locked.cols() == 0) return empty_basis(a);
    return make_basis(a, lambda, std::move(locked));
}

// ---------------------------------------------------------------------------
// PASI

NullSpaceBasis pasi_nullspace(const SymmetricOperatorBlock& a, double lambda,
                              const PasiOptions& opts) {
    if (opts.block_size < 1) throw InvalidArgument("pasi_nullspace: block size must be positive");
    const Index n = a.dim();
    const auto [lo, hi] = opts.spectrum_bounds ? *opts.spectrum_bounds : a.gershgorin_bounds();
    // the bounds enclose the spectrum, so lambda outside them has no null vectors
    if (lambda < lo || lambda > hi) {
        NullSpaceBasis out;
        out.block_label = a.label();
        out.vectors = Matrix(n, 0);
        return out;
    }

    const SpectralFilter filter = SpectralFilter::build(lambda, lo, hi, opts.gap, opts.degree);
    const double norm_a = a.frobenius_norm();
    const double accept = opts.tol * norm_a;

    // iterations needed before a random start has shed its unwanted part
    Index min_iters = 1;
    if (filter.damping() > 0.0 && filter.damping() < 1.0) {
        const double needed = std::log(opts.tol * 1e-2) / std::log(filter.damping());
        min_iters = std::max<Index>(1, static_cast<Index>(std::ceil(needed)));
    }

    Rng rng = make_rng(opts.seed);
    Matrix locked(n, 0);
    Index total = std::min(opts.block_size, n);
    Index iters = 0;

    while (locked.cols() < n) {
        const Index active_cols = std::min(total, n) - locked.cols();
        if (active_cols <= 0) break;
        Matrix x = detail::orthonormalize_against(gaussian_matrix(n, active_cols, rng), locked);
        Index stage_iters = 0;
        bool stage_done = false;
        bool finished = false;
        while (!stage_done) {
            if (iters >= opts.max_iters)
                throw NotConverged("subspace iteration: max_iters reached", locked.cols(), iters,
                                   locked);
            x = filter.apply(a, x);
            if (locked.cols() > 0) {
                x -= locked * (locked.transpose() * x);
                x -= locked * (locked.transpose() * x);
            }
            x = thin_q(x);
            x = thin_q(x);
            ++iters;
            ++stage_iters;
            if (stage_iters < min_iters) continue;

            // Rayleigh-Ritz on A - lambda I, ordered by |mu| ascending
            Matrix w = a.apply(x);
            w -= lambda * x;
            Matrix h = x.transpose() * w;
            h = 0.5 * (h + h.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
            const Index m = h.rows();
            std::vector<Index> order(static_cast<std::size_t>(m));
            std::iota(order.begin(), order.end(), Index{0});
            std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
                return std::abs(eig.eigenvalues()(i)) < std::abs(eig.eigenvalues()(j));
            });
            Matrix rot(m, m);
            for (Index j = 0; j < m; ++j) rot.col(j) = eig.eigenvectors().col(order[static_cast<std::size_t>(j)]);
            x = x * rot;
            w = w * rot;
            Vector res(m);
            for (Index j = 0; j < m; ++j) res(j) = w.col(j).norm();
            Index null_count = 0;
            while (null_count < m && res(null_count) <= accept) ++null_count;

            if (null_count == m) {
                // every active vector is a null vector: lock them and double the block
                Matrix grown(n, locked.cols() + m);
                grown << locked, x;
                locked = std::move(grown);
                total = 2 * total;
                stage_done = true;
            } else if (res(null_count) >= 0.5 * opts.gap) {
                Matrix grown(n, locked.cols() + null_count);
                grown << locked, x.leftCols(null_count);
                locked = std::move(grown);
                stage_done = true;
                finished = true;
            }
        }
        if (finished) break;
    }
    if (locked.cols() == 0) return empty_basis(a);
    // restore orthonormality lost to accumulated projections
    Matrix v = thin_q(locked);
    return make_basis(a, lambda, std::move(v));
}

// ---------------------------------------------------------------------------
// dense oracle

NullSpaceBasis dense_null_oracle(const SymmetricOperatorBlock& a, double lambda, double tol,
                                 Index dense_cap) {
    if (a.dim() > dense_cap) throw BlockTooLarge(a.dim(), dense_cap);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.to_dense());
    if (eig.info() != Eigen::Success)
        throw NumericalError("dense_null_oracle: eigendecomposition failed");
    std::vector<Index> keep;
    for (Index i = 0; i < eig.eigenvalues().size(); ++i)
        if (std::abs(eig.eigenvalues()(i) - lambda) <= tol) keep.push_back(i);
    Matrix v(a.dim(), static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        v.col(static_cast<Index>(k)) = eig.eigenvectors().col(keep[k]);
    if (v.cols() == 0) return empty_basis(a);
    return make_basis(a, lambda, std::move(v));
}

}  // namespace nuctk::spectral
