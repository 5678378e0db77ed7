#include "nuctk/fixedj/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Eigenvalues>

#include "nuctk/detail/krylov.hpp"
#include "nuctk/error.hpp"
#include "nuctk/random.hpp"

namespace nuctk::fixedj {

namespace {

// rethrow a block failure with the block label attached, keeping its category
[[noreturn]] void rethrow_labelled(std::exception_ptr e, const std::string& label) {
    try {
        std::rethrow_exception(e);
    } catch (const InvalidArgument& err) {
        throw InvalidArgument("block " + label + ": " + err.what());
    } catch (const NotConverged& err) {
        throw NotConverged("block " + label + ": " + err.what(), err.partial_count(),
                           err.iterations(), err.partial());
    } catch (const NumericalError& err) {
        throw NumericalError("block " + label + ": " + err.what());
    }
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

Index max_abs_twice_m(const spin::BlockedOperator& op) {
    Index m = 0;
    for (const auto& b : op.blocks) m = std::max<Index>(m, std::abs(b.twice_m));
    return m;
}

spectral::NullSpaceBasis run_block(const spin::BlockedOperator::Block& block, int twice_j,
                                   int twice_j_max, std::uint64_t seed,
                                   const ProjectorOptions& opts) {
    const auto& a = block.op;
    const double lambda = lambda_for(twice_j);
    if (opts.angular_momentum_structure && std::abs(block.twice_m) > twice_j) {
        spectral::NullSpaceBasis empty;
        empty.block_label = a.label();
        empty.vectors.resize(a.dim(), 0);
        return empty;
    }
    switch (opts.algo) {
        case Algorithm::Rqr: {
            auto o = opts.rqr;
            o.seed = seed;
            return spectral::rqr_nullspace(a, lambda, o);
        }
        case Algorithm::Sil: {
            auto o = opts.sil;
            o.seed = seed;
            o.tol = opts.tol;
            return spectral::sil_nullspace(a, lambda, o);
        }
        case Algorithm::Pasi: {
            auto o = opts.pasi;
            o.seed = seed;
            o.tol = opts.tol;
            if (opts.angular_momentum_structure) {
                o.spectrum_bounds = std::make_pair(spin::casimir(std::abs(block.twice_m)),
                                                   spin::casimir(twice_j_max));
                // J(J+1) - (J-1)J = 2J below, (J+1)(J+2) - J(J+1) = 2J + 2 above
                o.gap = twice_j >= 2 ? static_cast<double>(twice_j)
                                     : static_cast<double>(twice_j + 2);
            }
            return spectral::pasi_nullspace(a, lambda, o);
        }
    }
    throw InvalidArgument("unknown algorithm");
}

// full-basis offsets of each M block
std::vector<Index> block_offsets(const spin::BlockedOperator& op) {
    std::vector<Index> off(op.blocks.size() + 1, 0);
    for (std::size_t b = 0; b < op.blocks.size(); ++b) off[b + 1] = off[b] + op.blocks[b].op.dim();
    return off;
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Rqr: return "rqr";
        case Algorithm::Sil: return "sil";
        case Algorithm::Pasi: return "pasi";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "rqr") return Algorithm::Rqr;
    if (name == "sil") return Algorithm::Sil;
    if (name == "pasi") return Algorithm::Pasi;
    throw InvalidArgument("unknown null-space algorithm '" + name + "'");
}

double lambda_for(int twice_j) {
    if (twice_j < 0) throw InvalidArgument("J must be nonnegative");
    return spin::casimir(twice_j);
}

std::vector<spectral::NullSpaceBasis> build_projector(const spin::BlockedOperator& jsq, int twice_j,
                                                      const ProjectorOptions& opts,
                                                      const sched::Assignment& assignment) {
    lambda_for(twice_j);
    const std::size_t count = jsq.blocks.size();
    const int workers = resolve_workers(opts.workers);
    if (!assignment.procs.empty() && assignment.procs.size() != count)
        throw InvalidArgument("assignment does not cover every block");

    // owner worker of every block
    std::vector<int> owner(count);
    for (std::size_t k = 0; k < count; ++k) {
        int proc = static_cast<int>(k);
        if (!assignment.procs.empty()) {
            if (assignment.procs[k].empty())
                throw InvalidArgument("block " + jsq.blocks[k].op.label() + " is not assigned");
            proc = assignment.procs[k].front();
        }
        owner[k] = proc % workers;
    }

    const int twice_j_max = static_cast<int>(max_abs_twice_m(jsq));
    std::vector<spectral::NullSpaceBasis> out(count);
    std::vector<std::exception_ptr> errors(count);
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = 0; k < count; ++k) {
                    if (owner[k] != w) continue;
                    try {
                        out[k] = run_block(jsq.blocks[k], twice_j, twice_j_max, mix_seed(opts.seed, k),
                                           opts);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
    }
    for (std::size_t k = 0; k < count; ++k)
        if (errors[k]) rethrow_labelled(errors[k], jsq.blocks[k].op.label());
    return out;
}

ProjectedHamiltonian project_hamiltonian(const spin::BlockedOperator& h,
                                         const std::vector<spectral::NullSpaceBasis>& z) {
    if (h.blocks.size() != z.size())
        throw InvalidArgument("project_hamiltonian: block count mismatch");
    ProjectedHamiltonian out;
    Index total = 0;
    for (std::size_t b = 0; b < z.size(); ++b) {
        if (z[b].dim() != h.blocks[b].op.dim())
            throw InvalidArgument("project_hamiltonian: dimension mismatch in block " +
                                  h.blocks[b].op.label());
        out.block_ranks.push_back(z[b].rank());
        out.block_labels.push_back(h.blocks[b].op.label());
        total += z[b].rank();
    }
    out.hp = Matrix::Zero(total, total);
    Index at = 0;
    for (std::size_t b = 0; b < z.size(); ++b) {
        const Index r = z[b].rank();
        if (r == 0) continue;
        const Matrix& v = z[b].vectors;
        out.hp.block(at, at, r, r) = v.transpose() * h.blocks[b].op.apply(v);
        at += r;
    }
    out.hp = 0.5 * (out.hp + out.hp.transpose()).eval();
    return out;
}

Eigenpairs lanczos_lowest(const Matrix& hp, Index k, double tol, std::uint64_t seed) {
    const Index n = hp.rows();
    if (hp.cols() != n) throw InvalidArgument("lanczos_lowest: matrix must be square");
    if (k < 1 || k > n) throw InvalidArgument("lanczos_lowest: k must be in [1, dim]");
    const double norm = std::max(hp.norm(), std::numeric_limits<double>::min());
    const double accept = tol * norm;
    const Index width = std::max<Index>(2, std::min<Index>(k, 8));
    constexpr Index kMaxRounds = 1000;

    Rng rng = make_rng(seed);
    auto op = [&hp](const Matrix& x) -> Matrix { return hp * x; };
    Matrix locked(n, 0);
    std::vector<double> locked_values;
    Index iterations = 0;

    // k-th lowest locked value, or +inf while fewer than k are locked
    auto kth = [&] {
        if (static_cast<Index>(locked_values.size()) < k) return std::numeric_limits<double>::infinity();
        std::vector<double> v = locked_values;
        std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
        return v[static_cast<std::size_t>(k - 1)];
    };

    for (Index round = 0; round < kMaxRounds && locked.cols() < n; ++round) {
        const Index w = std::min(width, n - locked.cols());
        detail::BlockKrylov krylov(op, locked, n - locked.cols());
        if (!krylov.start(gaussian_matrix(n, w, rng))) break;
        // how many of the lowest Ritz pairs must converge before locking
        const Index need = std::min(w, k > static_cast<Index>(locked_values.size())
                                           ? k - static_cast<Index>(locked_values.size())
                                           : Index{1});
        detail::BlockKrylov::Ritz ritz;
        Index conv = 0;
        while (true) {
            ++iterations;
            ritz = krylov.ritz();
            conv = 0;
            while (conv < ritz.values.size() && ritz.residuals(conv) <= accept) ++conv;
            if (conv >= std::min(need, ritz.values.size()) || krylov.exhausted()) break;
            if (!krylov.expand()) break;
        }
        if (conv == 0)
            throw NotConverged("lanczos_lowest: no Ritz pair converged", static_cast<Index>(locked.cols()),
                               iterations);
        // lock the converged pairs that can still belong to the k lowest
        const double bound = kth();
        Index take = 0;
        while (take < conv && ritz.values(take) < bound - accept) ++take;
        if (take == 0) break;  // a fresh start found nothing lower: done
        Matrix coeffs = ritz.coeffs.leftCols(take);
        Matrix z = detail::orthonormalize_against(krylov.vectors(coeffs), locked);
        Matrix grown(n, locked.cols() + z.cols());
        grown << locked, z;
        locked = std::move(grown);
        for (Index j = 0; j < take; ++j) locked_values.push_back(ritz.values(j));
    }
    if (locked.cols() < k)
        throw NotConverged("lanczos_lowest: fewer than k pairs", locked.cols(), iterations);

    // final Rayleigh-Ritz on the locked span cleans up values and vectors
    Matrix small = locked.transpose() * hp * locked;
    small = 0.5 * (small + small.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(small);
    Eigenpairs out;
    out.values = eig.eigenvalues().head(k);
    out.vectors = locked * eig.eigenvectors().leftCols(k);
    out.iterations = iterations;
    return out;
}

Vector backtransform(const std::vector<spectral::NullSpaceBasis>& z, const Vector& y) {
    Index total_rank = 0;
    Index total_dim = 0;
    for (const auto& b : z) {
        total_rank += b.rank();
        total_dim += b.dim();
    }
    if (y.size() != total_rank) throw InvalidArgument("backtransform: dimension mismatch");
    Vector v = Vector::Zero(total_dim);
    Index row = 0;
    Index col = 0;
    for (const auto& b : z) {
        if (b.rank() > 0) v.segment(row, b.dim()) = b.vectors * y.segment(col, b.rank());
        row += b.dim();
        col += b.rank();
    }
    return v;
}

void fill_residuals(SpectrumResult& s, const spin::BlockedOperator& h,
                    const spin::BlockedOperator& jsq) {
    const auto off = block_offsets(h);
    const Index count = s.wave_functions.cols();
    const double lambda = lambda_for(s.twice_j);
    s.h_residuals.resize(count);
    s.jsq_residuals.resize(count);
    for (Index c = 0; c < count; ++c) {
        const Vector v = s.wave_functions.col(c);
        double hr2 = 0.0;
        double jexp = 0.0;
        for (std::size_t b = 0; b < h.blocks.size(); ++b) {
            const Index d = h.blocks[b].op.dim();
            const Vector vb = v.segment(off[b], d);
            if (vb.squaredNorm() == 0.0) continue;
            const Vector r = h.blocks[b].op.apply(vb) - s.energies(c) * vb;
            hr2 += r.squaredNorm();
            jexp += vb.dot(jsq.blocks[b].op.apply(vb));
        }
        s.h_residuals(c) = std::sqrt(hr2);
        s.jsq_residuals(c) = std::abs(jexp - lambda);
    }
}

SpectrumResult brute_force_filter(const spin::BlockedOperator& h, const spin::BlockedOperator& jsq,
                                  int twice_j, Index k_many, double tol, Index dense_cap) {
    if (h.blocks.size() != jsq.blocks.size())
        throw InvalidArgument("brute_force_filter: block count mismatch");
    const Index total = h.total_dim();
    if (total > dense_cap) throw BlockTooLarge(total, dense_cap);
    const double lambda = lambda_for(twice_j);
    const auto off = block_offsets(h);

    struct State {
        double energy;
        std::size_t block;
        Vector v;
    };
    std::vector<State> kept;
    for (std::size_t b = 0; b < h.blocks.size(); ++b) {
        const auto& hb = h.blocks[b].op;
        const auto& jb = jsq.blocks[b].op;
        if (hb.dim() != jb.dim()) throw InvalidArgument("brute_force_filter: dimension mismatch");
        Eigen::SelfAdjointEigenSolver<Matrix> eig(hb.to_dense());
        const Vector& e = eig.eigenvalues();
        const Matrix& u = eig.eigenvectors();
        const Matrix jd = jb.to_dense();
        const double deg_tol = 1e-9 * std::max(1.0, e.cwiseAbs().maxCoeff());
        // rotate each degenerate level into the J^2 eigenbasis
        for (Index start = 0; start < e.size();) {
            Index stop = start + 1;
            while (stop < e.size() && e(stop) - e(stop - 1) <= deg_tol) ++stop;
            const Matrix g = u.middleCols(start, stop - start);
            Matrix jg = g.transpose() * jd * g;
            jg = 0.5 * (jg + jg.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Matrix> jeig(jg);
            const Matrix rotated = g * jeig.eigenvectors();
            for (Index c = 0; c < rotated.cols(); ++c) {
                if (std::abs(jeig.eigenvalues()(c) - lambda) > tol) continue;
                const Vector v = rotated.col(c);
                kept.push_back({v.dot(hb.apply(v)), b, v});
            }
            start = stop;
        }
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const State& a, const State& b) { return a.energy < b.energy; });
    if (k_many > 0 && static_cast<Index>(kept.size()) > k_many) kept.resize(static_cast<std::size_t>(k_many));

    SpectrumResult s;
    s.twice_j = twice_j;
    s.energies.resize(static_cast<Index>(kept.size()));
    s.wave_functions = Matrix::Zero(total, static_cast<Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        s.energies(static_cast<Index>(i)) = kept[i].energy;
        s.wave_functions.col(static_cast<Index>(i)).segment(off[kept[i].block], kept[i].v.size()) = kept[i].v;
    }
    fill_residuals(s, h, jsq);
    return s;
}

FixedJResult solve_fixed_j(const spin::BlockedOperator& h, const spin::BlockedOperator& jsq,
                           int twice_j, Index k, const ProjectorOptions& opts,
                           const sched::Assignment& assignment) {
    if (h.blocks.size() != jsq.blocks.size())
        throw InvalidArgument("Hamiltonian and J^2 have different block structure");
    FixedJResult out;
    out.bases = build_projector(jsq, twice_j, opts, assignment);
    out.projected = project_hamiltonian(h, out.bases);
    if (out.projected.dim() == 0) throw NoStatesWithJ();
    const Index kk = std::min(k, out.projected.dim());
    const auto pairs = lanczos_lowest(out.projected.hp, kk, 1e-10, mix_seed(opts.seed, 0x1a2c05));

    auto& s = out.spectrum;
    s.twice_j = twice_j;
    s.energies = pairs.values;
    s.projected = pairs.vectors;
    s.wave_functions.resize(h.total_dim(), kk);
    for (Index c = 0; c < kk; ++c) s.wave_functions.col(c) = backtransform(out.bases, pairs.vectors.col(c));
    fill_residuals(s, h, jsq);
    return out;
}

}  // namespace nuctk::fixedj
