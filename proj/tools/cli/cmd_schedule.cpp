#include <algorithm>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "nuctk/error.hpp"
#include "nuctk/sched/scheduler.hpp"

namespace nuctk::cli {

void add_schedule(CLI::App& app, ScheduleConfig& c) {
    auto* s = app.add_subcommand("schedule", "Assign matrix blocks to processors and compare policies");
    s->fallthrough();
    s->add_option("--profile", c.profile, "Synthetic load profile, e.g. c12_nmax6_like or uniform(1,3000,60)");
    s->add_option("--loads", c.loads, "CSV of block loads with a header naming any of id, dim, work, comm_weight");
    s->add_option("--n-procs", c.n_procs, "Processor count")->required();
    s->add_option("--policy", c.policy, "Policy")->check(CLI::IsMember({"greedy", "cyclic", "optimal"}));
    s->add_flag("--compare", c.compare, "Report greedy and cyclic side by side");
    s->add_option("--seed", c.seed, "Seed of the synthetic profile");
    s->add_option("--alpha", c.alpha, "Communication weight of the cost model")->check(CLI::NonNegativeNumber);
    s->add_option("--small-max", c.small_max, "Largest dimension of a small block");
    s->add_option("--medium-max", c.medium_max, "Largest dimension of a medium block");
    s->add_flag("--emit-assignment", c.emit_assignment, "Include the processor lists of every block");
}

namespace {

std::vector<sched::BlockLoad> read_loads(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
    }
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(std::remove_if(cell.begin(), cell.end(), ::isspace), cell.end());
            cols.push_back(cell);
        }
    }
    auto find = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        return it == cols.end() ? -1 : static_cast<int>(it - cols.begin());
    };
    const int c_id = find("id"), c_dim = find("dim"), c_work = find("work"), c_comm = find("comm_weight");
    if (c_dim < 0 && c_work < 0) throw IoError(path + ": header must name dim or work");

    std::vector<sched::BlockLoad> out;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != cols.size()) throw IoError(path + ": wrong column count");
        auto num = [&](int col) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cells[static_cast<std::size_t>(col)], &used);
                return v;
            } catch (const std::exception&) {
                throw IoError(path + ": bad number '" + cells[static_cast<std::size_t>(col)] + "'");
            }
        };
        const Index id = c_id >= 0 ? static_cast<Index>(num(c_id)) : static_cast<Index>(out.size());
        sched::BlockLoad b;
        if (c_dim >= 0) {
            b = sched::load_for_dim(id, static_cast<Index>(num(c_dim)));
        } else {
            b.id = id;
            b.dim = 1;
        }
        if (c_work >= 0) b.work = num(c_work);
        b.comm_weight = c_comm >= 0 ? num(c_comm) : (c_dim >= 0 ? b.comm_weight : 0.0);
        if (b.dim < 1 || !(b.work >= 0.0) || !(b.comm_weight >= 0.0))
            throw IoError(path + ": loads need dim >= 1 and nonnegative work and comm_weight");
        out.push_back(b);
    }
    if (out.empty()) throw IoError(path + ": no loads");
    return out;
}

sched::Assignment assign(sched::Policy p, const std::vector<sched::BlockLoad>& loads, int n_procs,
                         const sched::SizeClassThresholds& th, const sched::CostModelParams& cost) {
    switch (p) {
        case sched::Policy::Greedy: return sched::greedy_assign(loads, n_procs, th, cost);
        case sched::Policy::Cyclic: return sched::cyclic_assign(loads, n_procs);
        case sched::Policy::Optimal: return sched::brute_force_assign(loads, n_procs, cost);
    }
    throw InvalidArgument("unknown policy");
}

Json metrics_json(const sched::Assignment& a, const std::vector<sched::BlockLoad>& loads,
                  const sched::CostModelParams& cost, bool with_assignment) {
    const auto m = sched::evaluate(a, loads, cost);
    Json j;
    j["makespan"] = m.makespan;
    j["imbalance"] = m.imbalance;
    j["max_load"] = *std::max_element(m.per_proc_load.begin(), m.per_proc_load.end());
    j["min_load"] = *std::min_element(m.per_proc_load.begin(), m.per_proc_load.end());
    if (with_assignment) j["assignment"] = a.procs;
    return j;
}

}  // namespace

int run_schedule(const ScheduleConfig& c, Context& ctx, Json& header) {
    Json cfg;
    if (!c.profile.empty()) cfg["profile"] = c.profile;
    if (!c.loads.empty()) cfg["loads"] = c.loads;
    cfg["n_procs"] = c.n_procs;
    cfg["policy"] = c.policy;
    cfg["compare"] = c.compare;
    cfg["alpha"] = c.alpha;
    cfg["small_max"] = c.small_max;
    cfg["medium_max"] = c.medium_max;
    cfg["emit_assignment"] = c.emit_assignment;
    header = make_header("schedule", c.seed, cfg);

    if (c.profile.empty() == c.loads.empty()) throw InvalidArgument("give exactly one of --profile and --loads");
    if (c.n_procs < 1) throw InvalidArgument("--n-procs must be at least 1");
    const sched::SizeClassThresholds th{c.small_max, c.medium_max};
    sched::validate(th);
    const sched::CostModelParams cost{c.alpha};

    Stopwatch sw(ctx);
    const auto loads = c.profile.empty() ? read_loads(c.loads) : sched::synth_loads(c.profile, c.seed);
    sw.lap("load");

    Json doc;
    doc["header"] = header;
    const auto classes = sched::classify(loads, th);
    double total = 0.0;
    Index lo = loads.front().dim, hi = loads.front().dim;
    for (const auto& b : loads) {
        total += b.work;
        lo = std::min(lo, b.dim);
        hi = std::max(hi, b.dim);
    }
    doc["loads"] = {{"count", loads.size()},
                    {"total_work", total},
                    {"min_dim", lo},
                    {"max_dim", hi},
                    {"small", classes.small.size()},
                    {"medium", classes.medium.size()},
                    {"large", classes.large.size()}};

    Json policies;
    if (c.compare) {
        const auto g = metrics_json(assign(sched::Policy::Greedy, loads, c.n_procs, th, cost), loads, cost,
                                    c.emit_assignment);
        const auto y = metrics_json(assign(sched::Policy::Cyclic, loads, c.n_procs, th, cost), loads, cost,
                                    c.emit_assignment);
        policies["greedy"] = g;
        policies["cyclic"] = y;
        doc["policies"] = policies;
        const double ratio = g["makespan"].get<double>() / y["makespan"].get<double>();
        doc["comparison"] = {{"greedy_over_cyclic", ratio}, {"greedy_better", ratio < 1.0}};
    } else {
        const auto p = sched::parse_policy(c.policy);
        policies[sched::to_string(p)] =
            metrics_json(assign(p, loads, c.n_procs, th, cost), loads, cost, c.emit_assignment);
        doc["policies"] = policies;
    }
    sw.lap("assign");
    emit_json(ctx, doc);
    return kOk;
}

}  // namespace nuctk::cli
