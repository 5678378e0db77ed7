#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <stdexcept>

#include "nuctk/dfo/families.hpp"
#include "nuctk/dfo/pounders.hpp"
#include "nuctk/noise/ecnoise.hpp"
#include "nuctk/sched/scheduler.hpp"
#include "nuctk/spectral/nullspace.hpp"
#include "nuctk/spin/model.hpp"

using namespace nuctk;

namespace {

// J^2 block with M = 0 (or 1/2) for n spins; J is the lowest allowed value.
const spin::BlockedOperator& jsq(int n) {
    static std::map<int, spin::BlockedOperator> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, spin::build_jsq_operator(n)).first;
    return it->second;
}

const spectral::SymmetricOperatorBlock& middle_block(int n) {
    for (const auto& b : jsq(n).blocks)
        if (b.twice_m == n % 2) return b.op;
    throw std::logic_error("no middle block");
}

void BM_Rqr(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto& op = middle_block(n);
    for (auto _ : st) benchmark::DoNotOptimize(spectral::rqr_nullspace(op, spin::casimir(n % 2)));
    st.counters["dim"] = static_cast<double>(op.dim());
}

void BM_Sil(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto& op = middle_block(n);
    for (auto _ : st) benchmark::DoNotOptimize(spectral::sil_nullspace(op, spin::casimir(n % 2)));
    st.counters["dim"] = static_cast<double>(op.dim());
}

void BM_Pasi(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto& op = middle_block(n);
    spectral::PasiOptions o;
    o.spectrum_bounds = std::make_pair(spin::casimir(n % 2), spin::casimir(n));
    o.gap = spin::casimir(n % 2 + 2) - spin::casimir(n % 2);
    for (auto _ : st) benchmark::DoNotOptimize(spectral::pasi_nullspace(op, spin::casimir(n % 2), o));
    st.counters["dim"] = static_cast<double>(op.dim());
}

BENCHMARK(BM_Rqr)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sil)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Pasi)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);

void BM_GreedySchedule(benchmark::State& st) {
    const auto loads = sched::synth_loads("c12_nmax6_like", 1);
    const int p = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(sched::greedy_assign(loads, p));
}
BENCHMARK(BM_GreedySchedule)->Arg(120)->Arg(496);

void BM_PoundersExponential(benchmark::State& st) {
    const auto inst = dfo::make_problem({"exponential", 8, 40, 0, 1e-6});
    dfo::SolverOptions o;
    o.max_evals = 200;
    for (auto _ : st) benchmark::DoNotOptimize(dfo::pounders_minimize(inst.problem, inst.x0, o));
}
BENCHMARK(BM_PoundersExponential)->Unit(benchmark::kMillisecond);

void BM_Ecnoise(benchmark::State& st) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1e-5);
    auto f = [&](const Vector& x) { return x.squaredNorm() + g(rng); };
    const Vector x = Vector::Zero(4);
    const Vector d = Vector::Ones(4) / 2.0;
    for (auto _ : st) benchmark::DoNotOptimize(noise::ecnoise(f, x, d, 1e-4, 8));
}
BENCHMARK(BM_Ecnoise);

}  // namespace
BENCHMARK_MAIN();
