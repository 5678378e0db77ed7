#include <algorithm>
#include <cmath>
#include <filesystem>

#include "commands.hpp"
#include "nuctk/error.hpp"
#include "nuctk/fixedj/pipeline.hpp"
#include "nuctk/io/matrix_market.hpp"
#include "nuctk/sched/scheduler.hpp"

namespace nuctk::cli {

void add_fixedj(CLI::App& app, FixedjConfig& c) {
    auto* s = app.add_subcommand("fixedj", "Lowest states of fixed total angular momentum J");
    s->fallthrough();
    s->add_option("--model", c.model, "Built-in model (spins)")->check(CLI::IsMember({"spins"}));
    s->add_option("--manifest", c.manifest, "Block manifest with Matrix Market J^2 and H blocks");
    s->add_option("--n", c.n, "Number of spins");
    s->add_option("--couplings", c.couplings, "Bond couplings (one value is broadcast)");
    s->add_flag("--periodic", c.periodic, "Close the chain into a ring");
    s->add_option("--j", c.j, "Total angular momentum J (integer or half-integer)")->required();
    s->add_option("--algo", c.algo, "Null-space algorithm")->check(CLI::IsMember({"rqr", "sil", "pasi"}));
    s->add_option("--k", c.k, "Number of states")->check(CLI::PositiveNumber);
    s->add_option("--n-procs", c.n_procs, "Simulated processors for block scheduling (0: one per worker)")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--policy", c.policy, "Block scheduling policy")->check(CLI::IsMember({"greedy", "cyclic"}));
    s->add_flag("--oracle", c.oracle, "Compare with dense diagonalization and J^2 filtering");
    s->add_option("--seed", c.seed, "Random seed");
    s->add_option("--tol", c.tol, "Relative residual tolerance of the null-space solvers")->check(CLI::PositiveNumber);
    s->add_option("--states-out", c.states_out, "Write full-basis states as a dense Matrix Market file");
}

namespace {

struct Model {
    spin::BlockedOperator h;
    spin::BlockedOperator jsq;
};

Model load_manifest(const std::string& path) {
    const auto m = io::read_manifest(path);
    const auto dir = std::filesystem::path(path).parent_path();
    if (m.jsq.size() != m.hamiltonian.size() || m.jsq.empty())
        throw InvalidArgument("manifest needs matching, nonempty jsq and hamiltonian lists");
    Model out;
    for (std::size_t k = 0; k < m.jsq.size(); ++k) {
        const auto& je = m.jsq[k];
        const auto& he = m.hamiltonian[k];
        if (je.twice_m != he.twice_m || je.dim != he.dim)
            throw InvalidArgument("manifest entry " + std::to_string(k) + ": J^2 and H blocks differ");
        auto jb = io::read_block(dir / je.file, je.label);
        auto hb = io::read_block(dir / he.file, he.label);
        if (jb.dim() != je.dim || hb.dim() != he.dim)
            throw InvalidArgument("manifest entry " + std::to_string(k) + ": dimension mismatch");
        out.jsq.blocks.push_back({je.twice_m, std::move(jb)});
        out.h.blocks.push_back({he.twice_m, std::move(hb)});
    }
    return out;
}

std::vector<double> resolve_couplings(const std::vector<double>& given, int n, bool periodic) {
    const std::size_t bonds = static_cast<std::size_t>(periodic ? n : n - 1);
    if (given.empty()) return std::vector<double>(bonds, 1.0);
    if (given.size() == 1) return std::vector<double>(bonds, given.front());
    return given;
}

Json vec_json(const Vector& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace

int run_fixedj(const FixedjConfig& c, Context& ctx, Json& header) {
    const bool external = !c.manifest.empty();
    const auto couplings = external ? std::vector<double>{} : resolve_couplings(c.couplings, c.n, c.periodic);
    const int n_procs = c.n_procs > 0 ? c.n_procs : ctx.workers;

    Json cfg;
    if (external) {
        cfg["manifest"] = c.manifest;
    } else {
        cfg["model"] = c.model;
        cfg["n"] = c.n;
        cfg["couplings"] = couplings;
        cfg["periodic"] = c.periodic;
    }
    cfg["j"] = c.j;
    cfg["algo"] = c.algo;
    cfg["k"] = c.k;
    cfg["n_procs"] = c.n_procs;
    cfg["policy"] = c.policy;
    cfg["oracle"] = c.oracle;
    cfg["tol"] = c.tol;
    if (!c.states_out.empty()) cfg["states_out"] = c.states_out;
    header = make_header("fixedj", c.seed, cfg);

    const double twice = 2.0 * c.j;
    const int twice_j = static_cast<int>(std::lround(twice));
    if (c.j < 0.0 || std::abs(twice - twice_j) > 1e-9)
        throw InvalidArgument("J must be a nonnegative integer or half-integer");

    Stopwatch sw(ctx);
    Model model;
    if (external) {
        model = load_manifest(c.manifest);
    } else {
        model.h = spin::build_heisenberg_operator(c.n, couplings, c.periodic);
        model.jsq = spin::build_jsq_operator(c.n);
    }
    sw.lap("build_model");

    std::vector<sched::BlockLoad> loads;
    for (std::size_t k = 0; k < model.jsq.blocks.size(); ++k)
        loads.push_back(sched::load_for_dim(static_cast<Index>(k), model.jsq.blocks[k].op.dim()));
    const auto assignment = sched::parse_policy(c.policy) == sched::Policy::Greedy
                                ? sched::greedy_assign(loads, n_procs)
                                : sched::cyclic_assign(loads, n_procs);

    fixedj::ProjectorOptions opts;
    opts.algo = fixedj::parse_algorithm(c.algo);
    opts.seed = c.seed;
    opts.tol = c.tol;
    opts.workers = ctx.workers;
    const auto result = fixedj::solve_fixed_j(model.h, model.jsq, twice_j, c.k, opts, assignment);
    sw.lap("solve");

    Json doc;
    doc["header"] = header;
    Json blocks = Json::array();
    for (std::size_t k = 0; k < result.bases.size(); ++k) {
        Json b;
        const auto& label = model.jsq.blocks[k].op.label();
        b["label"] = label.empty() ? spin::block_label(model.jsq.blocks[k].twice_m) : label;
        b["twice_m"] = model.jsq.blocks[k].twice_m;
        b["dim"] = model.jsq.blocks[k].op.dim();
        b["rank"] = result.bases[k].rank();
        b["null_residual"] = result.bases[k].residual_norm;
        blocks.push_back(b);
    }
    Json proj;
    proj["twice_j"] = twice_j;
    proj["lambda"] = fixedj::lambda_for(twice_j);
    proj["projected_dim"] = result.projected.dim();
    if (!external && twice_j <= c.n && (c.n - twice_j) % 2 == 0) {
        proj["expected_rank_per_block"] = spin::multiplicity(c.n, twice_j);
    }
    proj["blocks"] = blocks;
    doc["projector"] = proj;

    // without --n-procs the schedule follows the worker count, so it stays out of the report
    if (c.n_procs > 0) {
        const auto metrics = sched::evaluate(assignment, loads);
        Json sch;
        sch["policy"] = c.policy;
        sch["n_procs"] = n_procs;
        sch["modeled_makespan"] = metrics.makespan;
        doc["schedule"] = sch;
    }

    const auto& sp = result.spectrum;
    Json states = Json::array();
    for (Index i = 0; i < sp.energies.size(); ++i) {
        Json st;
        st["index"] = i;
        st["energy"] = sp.energies(i);
        st["h_residual"] = sp.h_residuals(i);
        st["jsq_residual"] = sp.jsq_residuals(i);
        states.push_back(st);
    }
    doc["states"] = states;
    const double hnorm = model.h.frobenius_norm();
    double worst_h = 0.0, worst_j = 0.0;
    for (Index i = 0; i < sp.energies.size(); ++i) {
        worst_h = std::max(worst_h, sp.h_residuals(i));
        worst_j = std::max(worst_j, sp.jsq_residuals(i));
    }
    doc["checks"] = {{"h_frobenius", hnorm},
                     {"max_h_residual", worst_h},
                     {"max_jsq_residual", worst_j},
                     {"residuals_ok", worst_h <= 1e-8 * hnorm && worst_j <= 1e-8}};

    if (c.oracle) {
        const auto bf = fixedj::brute_force_filter(model.h, model.jsq, twice_j, c.k);
        sw.lap("oracle");
        double diff = 0.0;
        const bool same_count = bf.energies.size() == sp.energies.size();
        if (same_count)
            for (Index i = 0; i < bf.energies.size(); ++i)
                diff = std::max(diff, std::abs(bf.energies(i) - sp.energies(i)));
        doc["oracle"] = {{"method", "dense_filter"},
                         {"energies", vec_json(bf.energies)},
                         {"max_abs_difference", same_count ? Json(diff) : Json(nullptr)},
                         {"agree", same_count && diff <= 1e-8}};
    }

    if (!c.states_out.empty()) io::write_dense(c.states_out, sp.wave_functions);
    emit_json(ctx, doc);
    return kOk;
}

}  // namespace nuctk::cli
