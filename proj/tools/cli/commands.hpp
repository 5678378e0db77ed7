#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "app.hpp"
#include "report.hpp"

namespace nuctk::cli {

struct FixedjConfig {
    std::string model = "spins";
    std::string manifest;  // external Matrix Market blocks instead of the spin model
    int n = 4;
    std::vector<double> couplings;  // one value is broadcast to every bond
    bool periodic = false;
    double j = 0.0;
    std::string algo = "pasi";
    int k = 5;
    int n_procs = 0;  // 0: one per worker
    std::string policy = "greedy";
    bool oracle = false;
    std::uint64_t seed = 0;
    double tol = 1e-12;
    std::string states_out;
};

struct ScheduleConfig {
    std::string profile;
    std::string loads;  // CSV with any of id, dim, work, comm_weight
    int n_procs = 0;
    std::string policy = "greedy";
    bool compare = false;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    long small_max = 512;
    long medium_max = 4096;
    bool emit_assignment = false;
};

struct FitConfig {
    std::string problem;       // JSON problem spec file
    std::string family = "linear";
    int n = 0;
    int o = 0;
    double noise = 0.0;
    double data_noise = 0.01;
    std::string algo = "pounders";
    std::string warm;
    long max_evals = 500;
    std::uint64_t seed = 0;
    bool compare = false;
    double delta0 = 0.0;
    double noise_floor = 0.0;
    std::string trace_out;
    std::string history_out;
};

struct NoiseConfig {
    std::string problem;
    std::string family = "quadratic";
    int n = 0;
    int o = 0;
    double noise = 0.0;
    double data_noise = 0.01;
    int component = 0;
    std::string points;
    double h = 0.0;  // 0: 1e-4 max(1, |x|) per point
    int m = 8;
    std::uint64_t seed = 0;
};

struct BlocksConfig {
    int n = 4;
    std::vector<double> couplings;
    bool periodic = false;
    std::string out_dir;
};

void add_fixedj(CLI::App& app, FixedjConfig& c);
void add_schedule(CLI::App& app, ScheduleConfig& c);
void add_fit(CLI::App& app, FitConfig& c);
void add_noise(CLI::App& app, NoiseConfig& c);
void add_blocks(CLI::App& app, BlocksConfig& c);

/// Each returns the exit code and records its header in `header` as soon as
/// the configuration is resolved, so failures can still be reported with it.
int run_fixedj(const FixedjConfig& c, Context& ctx, Json& header);
int run_schedule(const ScheduleConfig& c, Context& ctx, Json& header);
int run_fit(const FitConfig& c, Context& ctx, Json& header);
int run_noise(const NoiseConfig& c, Context& ctx, Json& header);
int run_blocks(const BlocksConfig& c, Context& ctx, Json& header);

}  // namespace nuctk::cli
