#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nuctk/linalg.hpp"
#include "nuctk/sched/scheduler.hpp"
#include "nuctk/spectral/nullspace.hpp"
#include "nuctk/spin/model.hpp"

namespace nuctk::fixedj {

enum class Algorithm { Rqr, Sil, Pasi };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ProjectorOptions {
    Algorithm algo = Algorithm::Pasi;
    std::uint64_t seed = 0;
    /// Relative residual tolerance handed to the iterative algorithms.
    double tol = 1e-12;
    /// Worker threads; 0 means std::thread::hardware_concurrency().
    int workers = 0;
    /// Treat the operator as M-scheme J^2 with blocks labelled by 2M: blocks
    /// with |M| > J are skipped, and PASI gets the exact spectrum enclosure
    /// [|M|(|M|+1), Jmax(Jmax+1)] with Jmax = max |M| and the distance to the
    /// neighbouring J(J+1) values as its gap.
    bool angular_momentum_structure = true;
    spectral::RqrOptions rqr;
    spectral::SilOptions sil;
    spectral::PasiOptions pasi;
};

/// lambda = J(J+1) from 2J.
double lambda_for(int twice_j);

/// One null-space basis per block of `jsq`, computed by a worker pool. Block k
/// runs on the worker that owns processor assignment.procs[k][0]; processor p
/// belongs to worker p mod workers. An empty assignment means cyclic over the
/// workers. Each block uses the seed mix_seed(opts.seed, k), so the result
/// does not depend on the worker count.
std::vector<spectral::NullSpaceBasis> build_projector(const spin::BlockedOperator& jsq, int twice_j,
                                                      const ProjectorOptions& opts,
                                                      const sched::Assignment& assignment = {});

struct ProjectedHamiltonian {
    Matrix hp;  // block diagonal over M, symmetric
    std::vector<Index> block_ranks;
    std::vector<std::string> block_labels;
    Index dim() const noexcept { return hp.rows(); }
};

ProjectedHamiltonian project_hamiltonian(const spin::BlockedOperator& h,
                                         const std::vector<spectral::NullSpaceBasis>& z);

struct Eigenpairs {
    Vector values;   // ascending
    Matrix vectors;  // columns
    Index iterations = 0;
};

/// The k lowest eigenpairs of a symmetric matrix by block Lanczos with full
/// reorthogonalization. Converged pairs are locked and the search restarts in
/// their complement until a fresh start finds nothing lower, which also
/// captures degenerate levels.
Eigenpairs lanczos_lowest(const Matrix& hp, Index k, double tol = 1e-10, std::uint64_t seed = 0);

/// v = Z y in the full (all-M) basis.
Vector backtransform(const std::vector<spectral::NullSpaceBasis>& z, const Vector& y);

struct SpectrumResult {
    int twice_j = 0;
    Vector energies;         // ascending
    Matrix projected;        // eigenvectors in the projected space (empty for the oracle)
    Matrix wave_functions;   // full-basis states as columns
    Vector h_residuals;      // ||H v - E v||
    Vector jsq_residuals;    // |<v|J^2|v> - J(J+1)|
};

/// Residual checks of a set of full-basis states.
void fill_residuals(SpectrumResult& s, const spin::BlockedOperator& h,
                    const spin::BlockedOperator& jsq);

/// Brute force: diagonalize every H block densely, diagonalize J^2 inside each
/// degenerate level, keep states with |<J^2> - J(J+1)| <= tol. Returns at most
/// k_many states (0 keeps all).
SpectrumResult brute_force_filter(const spin::BlockedOperator& h, const spin::BlockedOperator& jsq,
                                  int twice_j, Index k_many, double tol = 1e-8,
                                  Index dense_cap = spectral::kDefaultDenseCap);

struct FixedJResult {
    std::vector<spectral::NullSpaceBasis> bases;
    ProjectedHamiltonian projected;
    SpectrumResult spectrum;
};

/// build_projector, project_hamiltonian, lanczos_lowest and backtransform in
/// sequence. Throws NoStatesWithJ if every block has an empty null space.
FixedJResult solve_fixed_j(const spin::BlockedOperator& h, const spin::BlockedOperator& jsq,
                           int twice_j, Index k, const ProjectorOptions& opts,
                           const sched::Assignment& assignment = {});

}  // namespace nuctk::fixedj
