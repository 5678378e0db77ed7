#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "nuctk/error.hpp"
#include "nuctk/sched/scheduler.hpp"
#include "support/oracles.hpp"

using namespace nuctk;
using namespace nuctk::sched;

namespace {

std::vector<BlockLoad> plain(const std::vector<double>& works, Index dim = 10) {
    std::vector<BlockLoad> out;
    for (std::size_t i = 0; i < works.size(); ++i)
        out.push_back({static_cast<Index>(i), dim, works[i], 0.0});
    return out;
}

}  // namespace

TEST(Classify, InclusiveBoundaries) {
    std::vector<BlockLoad> b{load_for_dim(0, 1), load_for_dim(1, 100), load_for_dim(2, 40000),
                             load_for_dim(3, 512), load_for_dim(4, 513), load_for_dim(5, 4096),
                             load_for_dim(6, 4097)};
    const auto c = classify(b, {});
    ASSERT_EQ(c.small.size(), 3u);
    EXPECT_EQ(c.small[2].dim, 512);
    ASSERT_EQ(c.medium.size(), 2u);
    EXPECT_EQ(c.medium[1].dim, 4096);
    ASSERT_EQ(c.large.size(), 2u);
    EXPECT_THROW(validate({100, 50}), InvalidArgument);
}

TEST(Assign, SpecExample) {
    const auto b = plain({4, 3, 3, 2, 2});
    EXPECT_DOUBLE_EQ(evaluate(greedy_assign(b, 2), b).makespan, 8.0);
    EXPECT_DOUBLE_EQ(evaluate(cyclic_assign(b, 2), b).makespan, 9.0);
    EXPECT_DOUBLE_EQ(evaluate(brute_force_assign(b, 2), b).makespan, 7.0);
    EXPECT_DOUBLE_EQ(oracle::brute_makespan({4, 3, 3, 2, 2}, 2), 7.0);
}

TEST(Assign, CostModel) {
    BlockLoad b{0, 10, 10.0, 1.0};
    CostModelParams c;
    c.alpha = 1.0;
    EXPECT_DOUBLE_EQ(block_cost(b, 2, c), 6.0);
}

TEST(Assign, RejectsBadInput) {
    const auto b = plain({1, 2});
    EXPECT_THROW(greedy_assign(b, 0), InvalidArgument);
    EXPECT_THROW(cyclic_assign(b, -1), InvalidArgument);
    EXPECT_THROW(brute_force_assign(plain(std::vector<double>(30, 1.0)), 4), InvalidArgument);
}

TEST(Assign, LptBoundAgainstExhaustiveOracle) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = 2 + trial % 3;
        const std::size_t k = 3 + static_cast<std::size_t>(trial % 6);
        std::vector<double> w(k);
        for (auto& x : w) x = u(rng);
        const auto b = plain(w);
        const double opt = oracle::brute_makespan(w, p);
        EXPECT_NEAR(evaluate(brute_force_assign(b, p), b).makespan, opt, 1e-9 * opt);
        const double g = evaluate(greedy_assign(b, p), b).makespan;
        EXPECT_LE(g, (4.0 / 3.0 - 1.0 / (3.0 * p)) * opt * (1 + 1e-12));
    }
}

TEST(Assign, WorkConservationAndSmallBlocksAlone) {
    const auto blocks = synth_loads("c12_nmax6_like(300)", 5);
    const int p = 64;
    const auto a = greedy_assign(blocks, p);
    ASSERT_EQ(a.procs.size(), blocks.size());
    const auto m = evaluate(a, blocks, {0.0});
    const double total = std::accumulate(blocks.begin(), blocks.end(), 0.0,
                                         [](double s, const BlockLoad& b) { return s + b.work; });
    const double assigned = std::accumulate(m.per_proc_load.begin(), m.per_proc_load.end(), 0.0);
    EXPECT_NEAR(assigned, total, 1e-9 * total);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        EXPECT_FALSE(a.procs[k].empty());
        if (blocks[k].dim <= 512) EXPECT_EQ(a.procs[k].size(), 1u);
        if (blocks[k].dim > 4096) EXPECT_EQ(a.procs[k].size(), static_cast<std::size_t>(p));
    }
}

TEST(Assign, GreedyBeatsCyclicOnAverage) {
    double g = 0.0, c = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto blocks = synth_loads("uniform(1,3000,60)", seed);
        g += evaluate(greedy_assign(blocks, 16), blocks).makespan;
        c += evaluate(cyclic_assign(blocks, 16), blocks).makespan;
    }
    EXPECT_LT(g, c);
}

TEST(Profiles, C12ShapeAndDeterminism) {
    const auto a = synth_loads("c12_nmax6_like", 1);
    EXPECT_EQ(a.size(), 1500u);
    Index lo = a[0].dim, hi = a[0].dim;
    for (const auto& b : a) {
        lo = std::min(lo, b.dim);
        hi = std::max(hi, b.dim);
    }
    EXPECT_EQ(lo, 1);
    EXPECT_GT(hi, 36000);
    const auto again = synth_loads("c12_nmax6_like", 1);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].dim, again[i].dim);
    EXPECT_THROW(synth_loads("nonsense", 1), InvalidArgument);
}

TEST(Policy, RoundTrip) {
    for (auto p : {Policy::Greedy, Policy::Cyclic, Policy::Optimal}) EXPECT_EQ(parse_policy(to_string(p)), p);
    EXPECT_THROW(parse_policy("fifo"), InvalidArgument);
}
