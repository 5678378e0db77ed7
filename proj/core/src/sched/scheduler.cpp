#include "nuctk/sched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <regex>

#include "nuctk/error.hpp"
#include "nuctk/random.hpp"

namespace nuctk::sched {

namespace {

void check_procs(int n_procs) {
    if (n_procs < 1) throw InvalidArgument("n_procs must be at least 1");
}

// work descending, then id ascending
std::vector<std::size_t> lpt_order(const std::vector<BlockLoad>& blocks,
                                   const std::vector<std::size_t>& subset) {
    std::vector<std::size_t> order = subset;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (blocks[a].work != blocks[b].work) return blocks[a].work > blocks[b].work;
        return blocks[a].id < blocks[b].id;
    });
    return order;
}

}  // namespace

std::string to_string(Policy p) {
    switch (p) {
        case Policy::Greedy: return "greedy";
        case Policy::Cyclic: return "cyclic";
        case Policy::Optimal: return "optimal";
    }
    return "unknown";
}

Policy parse_policy(const std::string& name) {
    if (name == "greedy") return Policy::Greedy;
    if (name == "cyclic") return Policy::Cyclic;
    if (name == "optimal") return Policy::Optimal;
    throw InvalidArgument("unknown policy '" + name + "'");
}

void validate(const SizeClassThresholds& t) {
    if (!(0 < t.small_max_dim && t.small_max_dim < t.medium_max_dim))
        throw InvalidArgument("thresholds need 0 < small_max_dim < medium_max_dim");
}

Classes classify(const std::vector<BlockLoad>& blocks, const SizeClassThresholds& thresholds) {
    validate(thresholds);
    Classes c;
    for (const auto& b : blocks) {
        if (b.dim <= thresholds.small_max_dim)
            c.small.push_back(b);
        else if (b.dim > thresholds.medium_max_dim)
            c.large.push_back(b);
        else
            c.medium.push_back(b);
    }
    return c;
}

double block_cost(const BlockLoad& b, int g, const CostModelParams& cost) {
    return b.work / g + cost.alpha * (g - 1) * b.comm_weight;
}

int medium_group_size(const BlockLoad& b, int n_procs, const SizeClassThresholds& thresholds) {
    const auto ratio = static_cast<long long>(
        std::llround(static_cast<double>(b.dim) / static_cast<double>(thresholds.small_max_dim)));
    return static_cast<int>(std::min<long long>(std::max<long long>(ratio, 2), n_procs));
}

Assignment greedy_assign(const std::vector<BlockLoad>& blocks, int n_procs,
                         const SizeClassThresholds& thresholds, const CostModelParams& cost) {
    check_procs(n_procs);
    validate(thresholds);
    Assignment out;
    out.n_procs = n_procs;
    out.policy = Policy::Greedy;
    out.procs.resize(blocks.size());
    std::vector<double> load(static_cast<std::size_t>(n_procs), 0.0);

    std::vector<std::size_t> small, medium, large;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].dim <= thresholds.small_max_dim)
            small.push_back(k);
        else if (blocks[k].dim > thresholds.medium_max_dim)
            large.push_back(k);
        else
            medium.push_back(k);
    }

    std::vector<int> all(static_cast<std::size_t>(n_procs));
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t k : large) {
        out.procs[k] = all;
        const double t = block_cost(blocks[k], n_procs, cost);
        for (double& l : load) l += t;
    }

    for (std::size_t k : lpt_order(blocks, medium)) {
        const int g = medium_group_size(blocks[k], n_procs, thresholds);
        int best_start = 0;
        double best_peak = std::numeric_limits<double>::infinity();
        for (int s = 0; s + g <= n_procs; ++s) {
            const double peak = *std::max_element(load.begin() + s, load.begin() + s + g);
            if (peak < best_peak) {
                best_peak = peak;
                best_start = s;
            }
        }
        const double t = block_cost(blocks[k], g, cost);
        for (int p = best_start; p < best_start + g; ++p) {
            out.procs[k].push_back(p);
            load[static_cast<std::size_t>(p)] += t;
        }
    }

    for (std::size_t k : lpt_order(blocks, small)) {
        // min_element returns the first minimum, i.e. the lowest index on ties
        const auto it = std::min_element(load.begin(), load.end());
        const int p = static_cast<int>(it - load.begin());
        out.procs[k] = {p};
        *it += block_cost(blocks[k], 1, cost);
    }
    return out;
}

Assignment cyclic_assign(const std::vector<BlockLoad>& blocks, int n_procs) {
    check_procs(n_procs);
    Assignment out;
    out.n_procs = n_procs;
    out.policy = Policy::Cyclic;
    out.procs.resize(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k)
        out.procs[k] = {static_cast<int>(k % static_cast<std::size_t>(n_procs))};
    return out;
}

ScheduleMetrics evaluate(const Assignment& assignment, const std::vector<BlockLoad>& blocks,
                         const CostModelParams& cost) {
    check_procs(assignment.n_procs);
    if (assignment.procs.size() != blocks.size())
        throw InvalidArgument("assignment does not cover every block");
    ScheduleMetrics m;
    m.per_proc_load.assign(static_cast<std::size_t>(assignment.n_procs), 0.0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& procs = assignment.procs[k];
        if (procs.empty())
            throw InvalidArgument("block " + std::to_string(blocks[k].id) + " is not assigned");
        const double t = block_cost(blocks[k], static_cast<int>(procs.size()), cost);
        for (int p : procs) {
            if (p < 0 || p >= assignment.n_procs)
                throw InvalidArgument("processor id out of range");
            m.per_proc_load[static_cast<std::size_t>(p)] += t;
        }
    }
    m.makespan = *std::max_element(m.per_proc_load.begin(), m.per_proc_load.end());
    const double mean = std::accumulate(m.per_proc_load.begin(), m.per_proc_load.end(), 0.0) /
                        static_cast<double>(assignment.n_procs);
    m.imbalance = mean > 0.0 ? m.makespan / mean : 1.0;
    return m;
}

Assignment brute_force_assign(const std::vector<BlockLoad>& blocks, int n_procs,
                              const CostModelParams& cost, double max_space) {
    check_procs(n_procs);
    const double space = std::pow(static_cast<double>(n_procs), static_cast<double>(blocks.size()));
    if (space > max_space)
        throw InvalidArgument("brute force search space " + std::to_string(space) +
                              " exceeds cap " + std::to_string(max_space));
    const std::size_t count = blocks.size();
    std::vector<double> t(count);
    for (std::size_t k = 0; k < count; ++k) t[k] = block_cost(blocks[k], 1, cost);

    std::vector<int> current(count, 0), best(count, 0);
    std::vector<double> load(static_cast<std::size_t>(n_procs), 0.0);
    double best_makespan = std::numeric_limits<double>::infinity();

    // depth-first in lexicographic order; only strict improvements replace the
    // incumbent, so pruning at >= keeps the lexicographically first optimum
    auto dfs = [&](auto&& self, std::size_t k, double peak) -> void {
        if (peak >= best_makespan) return;
        if (k == count) {
            best_makespan = peak;
            best = current;
            return;
        }
        for (int p = 0; p < n_procs; ++p) {
            current[k] = p;
            load[static_cast<std::size_t>(p)] += t[k];
            self(self, k + 1, std::max(peak, load[static_cast<std::size_t>(p)]));
            load[static_cast<std::size_t>(p)] -= t[k];
        }
    };
    dfs(dfs, 0, 0.0);

    Assignment out;
    out.n_procs = n_procs;
    out.policy = Policy::Optimal;
    out.procs.resize(count);
    for (std::size_t k = 0; k < count; ++k) out.procs[k] = {best[k]};
    return out;
}

BlockLoad load_for_dim(Index id, Index dim) {
    const double d = static_cast<double>(dim);
    return {id, dim, d * d * d, d * d};
}

std::vector<BlockLoad> synth_loads(const std::string& profile, std::uint64_t seed) {
    static const std::regex uniform_re(R"(\s*uniform\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*)");
    static const std::regex c12_re(R"(\s*c12_nmax6_like(?:\(\s*(\d+)\s*\))?\s*)");
    Rng rng = make_rng(seed, 0x5c4ed);
    std::smatch m;
    std::vector<BlockLoad> out;
    if (std::regex_match(profile, m, uniform_re)) {
        const long long lo = std::stoll(m[1]);
        const long long hi = std::stoll(m[2]);
        const long long k = std::stoll(m[3]);
        if (lo < 1 || hi < lo) throw InvalidArgument("uniform profile needs 1 <= lo <= hi");
        std::uniform_int_distribution<long long> dist(lo, hi);
        for (long long i = 0; i < k; ++i) out.push_back(load_for_dim(static_cast<Index>(i), dist(rng)));
        return out;
    }
    if (std::regex_match(profile, m, c12_re)) {
        const long long count = m[1].matched ? std::stoll(m[1]) : 1500;
        if (count < 2) throw InvalidArgument("c12_nmax6_like needs at least 2 blocks");
        // log(dim) ~ u^2 log(dmax): many small blocks, a thin tail of huge ones
        constexpr double kMaxDim = 40000.0;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<Index> dims;
        for (long long i = 0; i < count; ++i) {
            const double u = unif(rng);
            dims.push_back(std::max<Index>(1, std::llround(std::exp(u * u * std::log(kMaxDim)))));
        }
        // pin both ends of the range at random positions
        std::uniform_int_distribution<long long> pos(0, count - 1);
        const auto lo_at = static_cast<std::size_t>(pos(rng));
        auto hi_at = static_cast<std::size_t>(pos(rng));
        if (hi_at == lo_at) hi_at = (hi_at + 1) % static_cast<std::size_t>(count);
        std::uniform_int_distribution<Index> top(36001, static_cast<Index>(kMaxDim));
        dims[lo_at] = 1;
        dims[hi_at] = top(rng);
        for (std::size_t i = 0; i < dims.size(); ++i) out.push_back(load_for_dim(static_cast<Index>(i), dims[i]));
        return out;
    }
    throw InvalidArgument("unknown load profile '" + profile + "'");
}

}  // namespace nuctk::sched
