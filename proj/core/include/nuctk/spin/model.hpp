#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nuctk/linalg.hpp"
#include "nuctk/spectral/operator_block.hpp"

// Spin-1/2 stand-in for a nuclear M-scheme configuration space. n spins with
// total S^2 play the role of J^2: the operator is block diagonal over the
// z-projection M, its eigenvalues S(S+1) are known in closed form, and block
// dimensions range from 1 (stretched states) to C(n, n/2).
//
// Angular-momentum quantum numbers are carried as twice their value so that
// half-integers stay exact.
namespace nuctk::spin {

using State = std::uint64_t;

struct MSchemeBasis {
    int n = 0;
    int twice_m = 0;
    std::vector<State> states;  // ascending bit patterns, bit i set = spin i up

    Index dim() const noexcept { return static_cast<Index>(states.size()); }
    /// Position of a state in the basis, or -1.
    Index find(State s) const;
};

/// One diagonal block per M value, M strictly increasing.
struct BlockedOperator {
    struct Block {
        int twice_m = 0;
        spectral::SymmetricOperatorBlock op;
    };
    std::vector<Block> blocks;

    Index total_dim() const;
    double frobenius_norm() const;
};

std::uint64_t binomial(int n, int k);

MSchemeBasis build_basis(int n, int twice_m);

/// S^2 restricted to the block: diagonal 3n/4 + (aligned - antialigned)/2,
/// off-diagonal 1 between states related by one up-down transposition.
spectral::SymmetricOperatorBlock build_jsq_block(const MSchemeBasis& basis);

/// H = sum_b J_b s_i . s_j over chain bonds (i, i+1), plus (n-1, 0) when periodic.
/// `couplings` must have n-1 entries (chain) or n entries (ring).
spectral::SymmetricOperatorBlock build_heisenberg(const MSchemeBasis& basis,
                                                  const std::vector<double>& couplings,
                                                  bool periodic);

/// C(n, n/2 - S) - C(n, n/2 - S - 1): the number of spin-S multiplets, which is
/// also the S(S+1) null-space dimension of every block with |M| <= S. Zero for 2S > n.
std::uint64_t multiplicity(int n, int twice_s);

/// All M blocks of S^2 (and of H) for n spins, M = -n/2 .. n/2.
BlockedOperator build_jsq_operator(int n);
BlockedOperator build_heisenberg_operator(int n, const std::vector<double>& couplings,
                                          bool periodic);

std::string block_label(int twice_m);

/// S(S+1) from 2S.
constexpr double casimir(int twice_s) noexcept {
    return 0.25 * static_cast<double>(twice_s) * static_cast<double>(twice_s + 2);
}

}  // namespace nuctk::spin
