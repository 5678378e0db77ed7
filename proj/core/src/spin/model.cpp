#include "nuctk/spin/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "nuctk/error.hpp"

namespace nuctk::spin {

namespace {

constexpr int kMaxSpins = 30;

void check_n(int n) {
    if (n < 1 || n > kMaxSpins)
        throw InvalidArgument("spin count must be in [1, " + std::to_string(kMaxSpins) + "]");
}

}  // namespace

Index MSchemeBasis::find(State s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return -1;
    return static_cast<Index>(it - states.begin());
}

Index BlockedOperator::total_dim() const {
    Index total = 0;
    for (const auto& b : blocks) total += b.op.dim();
    return total;
}

double BlockedOperator::frobenius_norm() const {
    double s = 0.0;
    for (const auto& b : blocks) s += b.op.frobenius_norm() * b.op.frobenius_norm();
    return std::sqrt(s);
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

std::string block_label(int twice_m) {
    if (twice_m % 2 == 0) return "M=" + std::to_string(twice_m / 2);
    return "M=" + std::to_string(twice_m) + "/2";
}

MSchemeBasis build_basis(int n, int twice_m) {
    check_n(n);
    if (std::abs(twice_m) > n || (n + twice_m) % 2 != 0)
        throw InvalidArgument("infeasible M for " + std::to_string(n) + " spins: 2M = " +
                              std::to_string(twice_m));
    const int ups = (n + twice_m) / 2;
    MSchemeBasis basis;
    basis.n = n;
    basis.twice_m = twice_m;
    basis.states.reserve(binomial(n, ups));
    // Gosper's hack enumerates fixed-popcount patterns in ascending order
    if (ups == 0) {
        basis.states.push_back(0);
        return basis;
    }
    const State limit = State{1} << n;
    State s = (State{1} << ups) - 1;
    while (s < limit) {
        basis.states.push_back(s);
        const State c = s & (~s + 1);
        const State r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    return basis;
}

spectral::SymmetricOperatorBlock build_jsq_block(const MSchemeBasis& basis) {
    const int n = basis.n;
    std::vector<spectral::Entry> entries;
    for (Index k = 0; k < basis.dim(); ++k) {
        const State s = basis.states[static_cast<std::size_t>(k)];
        const int ups = std::popcount(s);
        const int downs = n - ups;
        const int aligned = ups * (ups - 1) / 2 + downs * (downs - 1) / 2;
        const int anti = ups * downs;
        entries.push_back({k, k, 0.75 * n + 0.5 * (aligned - anti)});
        // transpose every up/down pair; keep the upper triangle only
        for (int i = 0; i < n; ++i) {
            if (!((s >> i) & 1U)) continue;
            for (int j = 0; j < n; ++j) {
                if ((s >> j) & 1U) continue;
                const State t = s ^ (State{1} << i) ^ (State{1} << j);
                if (t <= s) continue;
                entries.push_back({k, basis.find(t), 1.0});
            }
        }
    }
    return spectral::SymmetricOperatorBlock(basis.dim(), std::move(entries),
                                            block_label(basis.twice_m));
}

spectral::SymmetricOperatorBlock build_heisenberg(const MSchemeBasis& basis,
                                                  const std::vector<double>& couplings,
                                                  bool periodic) {
    const int n = basis.n;
    const std::size_t expected = periodic ? static_cast<std::size_t>(n)
                                          : static_cast<std::size_t>(std::max(n - 1, 0));
    if (couplings.size() != expected)
        throw InvalidArgument("expected " + std::to_string(expected) + " couplings, got " +
                              std::to_string(couplings.size()));

    std::vector<std::pair<int, int>> bonds;
    for (int i = 0; i + 1 < n; ++i) bonds.emplace_back(i, i + 1);
    if (periodic) bonds.emplace_back(n - 1, 0);

    const Index dim = basis.dim();
    std::vector<double> diag(static_cast<std::size_t>(dim), 0.0);
    // off-diagonal amplitudes accumulate per (row, col) pair; rings with n = 2
    // repeat a bond, so merge before building the block
    std::vector<std::vector<std::pair<Index, double>>> upper(static_cast<std::size_t>(dim));
    for (Index k = 0; k < dim; ++k) {
        const State s = basis.states[static_cast<std::size_t>(k)];
        for (std::size_t b = 0; b < bonds.size(); ++b) {
            const auto [i, j] = bonds[b];
            const double jb = couplings[b];
            const bool si = (s >> i) & 1U;
            const bool sj = (s >> j) & 1U;
            diag[static_cast<std::size_t>(k)] += si == sj ? 0.25 * jb : -0.25 * jb;
            if (si != sj) {
                const State t = s ^ (State{1} << i) ^ (State{1} << j);
                if (t > s) upper[static_cast<std::size_t>(k)].emplace_back(basis.find(t), 0.5 * jb);
            }
        }
    }
    std::vector<spectral::Entry> entries;
    for (Index k = 0; k < dim; ++k) {
        if (diag[static_cast<std::size_t>(k)] != 0.0) entries.push_back({k, k, diag[static_cast<std::size_t>(k)]});
        auto& row = upper[static_cast<std::size_t>(k)];
        std::sort(row.begin(), row.end());
        for (std::size_t e = 0; e < row.size();) {
            double v = 0.0;
            const Index col = row[e].first;
            while (e < row.size() && row[e].first == col) v += row[e++].second;
            if (v != 0.0) entries.push_back({k, col, v});
        }
    }
    return spectral::SymmetricOperatorBlock(dim, std::move(entries), block_label(basis.twice_m));
}

std::uint64_t multiplicity(int n, int twice_s) {
    check_n(n);
    if (twice_s < 0 || (n - twice_s) % 2 != 0)
        throw InvalidArgument("invalid total spin 2S = " + std::to_string(twice_s) + " for " +
                              std::to_string(n) + " spins");
    if (twice_s > n) return 0;
    const int k = (n - twice_s) / 2;  // n/2 - S
    return binomial(n, k) - binomial(n, k - 1);
}

BlockedOperator build_jsq_operator(int n) {
    check_n(n);
    BlockedOperator out;
    for (int tm = -n; tm <= n; tm += 2) out.blocks.push_back({tm, build_jsq_block(build_basis(n, tm))});
    return out;
}

BlockedOperator build_heisenberg_operator(int n, const std::vector<double>& couplings,
                                          bool periodic) {
    check_n(n);
    BlockedOperator out;
    for (int tm = -n; tm <= n; tm += 2)
        out.blocks.push_back({tm, build_heisenberg(build_basis(n, tm), couplings, periodic)});
    return out;
}

}  // namespace nuctk::spin
