#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nuctk/linalg.hpp"

namespace nuctk::sched {

struct BlockLoad {
    Index id = 0;
    Index dim = 1;
    double work = 1.0;         // estimated flop count
    double comm_weight = 0.0;  // communication volume per participating processor
};

struct SizeClassThresholds {
    Index small_max_dim = 512;
    Index medium_max_dim = 4096;
};

struct CostModelParams {
    double alpha = 0.05;
};

enum class Policy { Greedy, Cyclic, Optimal };

std::string to_string(Policy p);
Policy parse_policy(const std::string& name);

/// procs[k] lists the processors that execute block k (input order).
struct Assignment {
    std::vector<std::vector<int>> procs;
    int n_procs = 0;
    Policy policy = Policy::Greedy;
};

struct ScheduleMetrics {
    double makespan = 0.0;
    std::vector<double> per_proc_load;
    double imbalance = 1.0;  // max / mean
};

struct Classes {
    std::vector<BlockLoad> small;
    std::vector<BlockLoad> medium;
    std::vector<BlockLoad> large;
};

void validate(const SizeClassThresholds& t);

/// Small: dim <= small_max_dim. Large: dim > medium_max_dim. Medium otherwise.
Classes classify(const std::vector<BlockLoad>& blocks, const SizeClassThresholds& thresholds);

/// t(b, g) = work / g + alpha (g - 1) comm_weight
double block_cost(const BlockLoad& b, int g, const CostModelParams& cost);

/// Subgroup size for a medium block: clamp(round(dim / small_max_dim), 2, n_procs).
int medium_group_size(const BlockLoad& b, int n_procs, const SizeClassThresholds& thresholds);

/// Large blocks on all processors, then medium blocks on contiguous subgroups
/// (window with the least maximum load), then small blocks by LPT. Ties go to
/// the lowest processor index, then the lowest block id.
Assignment greedy_assign(const std::vector<BlockLoad>& blocks, int n_procs,
                         const SizeClassThresholds& thresholds = {},
                         const CostModelParams& cost = {});

/// Block k runs alone on processor k mod n_procs.
Assignment cyclic_assign(const std::vector<BlockLoad>& blocks, int n_procs);

ScheduleMetrics evaluate(const Assignment& assignment, const std::vector<BlockLoad>& blocks,
                         const CostModelParams& cost = {});

/// Exhaustive search over singleton assignments; the lexicographically first
/// optimum wins. Rejects n_procs^count above `max_space`.
Assignment brute_force_assign(const std::vector<BlockLoad>& blocks, int n_procs,
                              const CostModelParams& cost = {}, double max_space = 1e7);

/// Synthetic load profiles:
///   "c12_nmax6_like" or "c12_nmax6_like(count)": heavy-tailed dims from 1 to
///     more than 36000, 1500 blocks by default;
///   "uniform(lo,hi,k)": k dims drawn uniformly from [lo, hi].
/// work = dim^3, comm_weight = dim^2.
std::vector<BlockLoad> synth_loads(const std::string& profile, std::uint64_t seed);

/// work = dim^3, comm_weight = dim^2
BlockLoad load_for_dim(Index id, Index dim);

}  // namespace nuctk::sched
