#include <cmath>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "nuctk/dfo/families.hpp"
#include "nuctk/dfo/history.hpp"
#include "nuctk/dfo/pounders.hpp"
#include "nuctk/error.hpp"
#include "problem_spec.hpp"

namespace nuctk::cli {

void apply_problem_file(const std::string& path, dfo::ProblemSpec& spec) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw IoError("malformed problem file " + path + ": " + e.what());
    }
    try {
        if (j.contains("family")) spec.family = j.at("family").get<std::string>();
        if (j.contains("n")) spec.n = j.at("n").get<Index>();
        if (j.contains("o")) spec.o = j.at("o").get<Index>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("noise")) spec.noise = j.at("noise").get<double>();
        if (j.contains("data_noise")) spec.data_noise = j.at("data_noise").get<double>();
    } catch (const std::exception& e) {
        throw IoError("problem file " + path + ": " + e.what());
    }
}

Json problem_json(const dfo::ProblemSpec& spec) {
    return {{"family", spec.family},  {"n", spec.n},         {"o", spec.o},
            {"seed", spec.seed},      {"noise", spec.noise}, {"data_noise", spec.data_noise}};
}

void add_fit(CLI::App& app, FitConfig& c) {
    auto* s = app.add_subcommand("fit", "Derivative-free least-squares fit of a synthetic problem");
    s->fallthrough();
    s->add_option("--problem", c.problem, "JSON problem file; its fields override the flags below");
    s->add_option("--family", c.family, "Problem family")
        ->check(CLI::IsMember({"linear", "rosenbrock", "bounded", "quadratic", "exponential"}));
    s->add_option("--n", c.n, "Parameters (0: family default)");
    s->add_option("--o", c.o, "Observables (0: family default)");
    s->add_option("--noise", c.noise, "Computational noise level")->check(CLI::NonNegativeNumber);
    s->add_option("--data-noise", c.data_noise, "Data noise of the exponential family");
    s->add_option("--algo", c.algo, "pounders (residual models) or pounder (one model of f)");
    s->add_option("--warm", c.warm, "History CSV to warm start from");
    s->add_option("--max-evals", c.max_evals, "Budget of new evaluations");
    s->add_option("--seed", c.seed, "Problem seed");
    s->add_flag("--compare", c.compare, "Run pounders and pounder on the same budget");
    s->add_option("--delta0", c.delta0, "Initial trust-region radius (0: automatic)");
    s->add_option("--noise-floor", c.noise_floor, "Predicted decreases at or below this count as zero");
    s->add_option("--trace-out", c.trace_out, "CSV of (algo, index, f, best_f)");
    s->add_option("--history-out", c.history_out, "History CSV of the first algorithm for warm starts");
}

namespace {

Json vec_json(const Vector& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace

int run_fit(const FitConfig& c, Context& ctx, Json& header) {
    dfo::ProblemSpec spec{c.family, c.n, c.o, c.seed, c.noise, c.data_noise};
    if (!c.problem.empty()) apply_problem_file(c.problem, spec);

    Json cfg;
    cfg["problem"] = problem_json(spec);
    cfg["algo"] = c.algo;
    cfg["compare"] = c.compare;
    if (!c.warm.empty()) cfg["warm"] = c.warm;
    cfg["max_evals"] = c.max_evals;
    cfg["delta0"] = c.delta0;
    cfg["noise_floor"] = c.noise_floor;
    if (!c.trace_out.empty()) cfg["trace_out"] = c.trace_out;
    if (!c.history_out.empty()) cfg["history_out"] = c.history_out;
    header = make_header("fit", spec.seed, cfg);

    if (c.algo != "pounders" && c.algo != "pounder") throw InvalidArgument("unknown algorithm '" + c.algo + "'");
    if (c.max_evals < 1) throw InvalidArgument("--max-evals must be positive");

    Stopwatch sw(ctx);
    const auto inst = dfo::make_problem(spec);
    // record the family defaults actually used
    spec.n = inst.problem.n;
    spec.o = inst.problem.o;
    cfg["problem"] = problem_json(spec);
    header = make_header("fit", spec.seed, cfg);
    const auto& p = inst.problem;
    dfo::WarmStart warm;
    Vector x0 = inst.x0;
    if (!c.warm.empty()) {
        warm = dfo::warm_start(dfo::read_history(c.warm), p.n, p.o);
    }
    dfo::SolverOptions opts;
    opts.max_evals = c.max_evals;
    opts.delta0 = c.delta0;
    opts.noise_floor = c.noise_floor;
    sw.lap("setup");

    std::vector<std::string> algos{c.algo};
    if (c.compare) algos = {"pounders", "pounder"};

    Json doc;
    doc["header"] = header;
    Json runs = Json::array();
    std::ostringstream trace_csv;
    trace_csv << "algo,index,f,best_f\n";
    bool failed = false;
    std::string failure;
    dfo::FitResult first;
    for (std::size_t a = 0; a < algos.size(); ++a) {
        const auto r = algos[a] == "pounders" ? dfo::pounders_minimize(p, x0, opts, warm)
                                              : dfo::pounder_minimize(p, x0, opts, warm);
        sw.lap(algos[a]);
        if (a == 0) first = r;
        Json run;
        run["algo"] = algos[a];
        run["reason"] = dfo::to_string(r.reason);
        run["message"] = r.message;
        run["new_evaluations"] = r.trace.size();
        run["iterations"] = r.iterations;
        run["new_evals_before_first_accept"] = r.new_evals_before_first_accept;
        run["best_f"] = r.best_f;
        run["best_x"] = vec_json(r.best_x);
        run["max_interpolation_error"] = r.max_interpolation_error;
        if (inst.x_star) run["distance_to_known_minimizer"] = (r.best_x - *inst.x_star).norm();
        Json tr = Json::array();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : warm.records) best = std::min(best, w.f);
        for (const auto& rec : r.trace) {
            best = std::min(best, rec.f);
            tr.push_back({rec.index, rec.f, best});
            trace_csv << algos[a] << ',' << rec.index << ',' << fmt(rec.f) << ',' << fmt(best) << '\n';
        }
        run["trace"] = tr;
        runs.push_back(run);
        if (r.reason == dfo::Termination::EvaluatorFailure) {
            failed = true;
            failure = r.message;
        }
    }
    doc["runs"] = runs;
    if (c.compare) {
        const double fs = runs[0]["best_f"].get<double>();
        const double fr = runs[1]["best_f"].get<double>();
        doc["comparison"] = {{"pounders_best_f", fs}, {"pounder_best_f", fr}, {"pounders_better_or_equal", fs <= fr}};
    }
    if (failed) doc["error"] = error_record(kNumericalFailure, "evaluator_failure", failure);

    if (!c.trace_out.empty()) {
        std::ofstream t(c.trace_out, std::ios::binary);
        if (!t) throw IoError("cannot write " + c.trace_out);
        t << "# " << header.dump() << '\n' << trace_csv.str();
    }
    if (!c.history_out.empty()) dfo::write_history(c.history_out, first.trace, p.n, p.o, header.dump());
    emit_json(ctx, doc);
    if (failed) ctx.err << "nuctk: " << failure << '\n';
    return failed ? kNumericalFailure : kOk;
}

}  // namespace nuctk::cli
