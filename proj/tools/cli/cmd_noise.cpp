#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "nuctk/dfo/families.hpp"
#include "nuctk/error.hpp"
#include "nuctk/noise/ecnoise.hpp"
#include "problem_spec.hpp"

namespace nuctk::cli {

void add_noise(CLI::App& app, NoiseConfig& c) {
    auto* s = app.add_subcommand("noise", "Estimate computational noise at a list of points");
    s->set_help_flag("--help", "Print this help message and exit");  // --h is the step
    s->fallthrough();
    s->add_option("--problem", c.problem, "JSON problem file; its fields override the flags below");
    s->add_option("--family", c.family, "Problem family")
        ->check(CLI::IsMember({"linear", "rosenbrock", "bounded", "quadratic", "exponential"}));
    s->add_option("--n", c.n, "Parameters (0: family default)");
    s->add_option("--o", c.o, "Observables (0: family default)");
    s->add_option("--noise", c.noise, "Injected computational noise level")->check(CLI::NonNegativeNumber);
    s->add_option("--data-noise", c.data_noise, "Data noise of the exponential family");
    s->add_option("--component", c.component, "Observable whose noise is estimated")->check(CLI::NonNegativeNumber);
    s->add_option("--points", c.points, "CSV with one point per row")->required();
    s->add_option("--h", c.h, "Step (0: 1e-4 max(1, |x|))")->check(CLI::NonNegativeNumber);
    s->add_option("--m", c.m, "Number of steps; m + 1 evaluations per point");
    s->add_option("--seed", c.seed, "Problem and direction seed");
}

namespace {

std::vector<Vector> read_points(const std::string& path, Index n) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open points file " + path);
    std::vector<Vector> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        std::vector<double> vals;
        bool numeric = true;
        for (const auto& s : cells) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(s, &used));
                if (s.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw IoError(path + ": malformed row '" + line + "'");
        }
        first = false;
        if (static_cast<Index>(vals.size()) != n)
            throw IoError(path + ": expected " + std::to_string(n) + " coordinates per point");
        out.push_back(Eigen::Map<const Vector>(vals.data(), n));
    }
    if (out.empty()) throw IoError(path + ": no points");
    return out;
}

}  // namespace

int run_noise(const NoiseConfig& c, Context& ctx, Json& header) {
    dfo::ProblemSpec spec{c.family, c.n, c.o, c.seed, c.noise, c.data_noise};
    if (!c.problem.empty()) apply_problem_file(c.problem, spec);

    Json cfg;
    cfg["problem"] = problem_json(spec);
    cfg["component"] = c.component;
    cfg["points"] = c.points;
    cfg["h"] = c.h;
    cfg["m"] = c.m;
    header = make_header("noise", spec.seed, cfg);

    if (c.m < 4) throw InvalidArgument("--m must be at least 4");
    Stopwatch sw(ctx);
    const auto inst = dfo::make_problem(spec);
    // record the family defaults actually used
    spec.n = inst.problem.n;
    spec.o = inst.problem.o;
    cfg["problem"] = problem_json(spec);
    header = make_header("noise", spec.seed, cfg);
    if (c.component >= inst.problem.o) throw InvalidArgument("--component out of range");
    const auto points = read_points(c.points, inst.problem.n);
    const auto eval = inst.problem.evaluator;
    const Index comp = c.component;
    const noise::ScalarFunction f = [eval, comp](const Vector& x) { return eval(x)(comp); };
    sw.lap("setup");

    noise::NoiseMapOptions opts;
    opts.h = c.h;
    opts.m = c.m;
    opts.seed = spec.seed;
    opts.workers = static_cast<unsigned>(ctx.workers);
    const auto rows = noise::noise_map(f, points, opts);
    sw.lap("estimate");

    std::ostringstream body;
    body << "point,f,sigma_abs,sigma_rel,order,reliable,error\n";
    std::vector<double> sig;
    int reliable = 0, within = 0;
    for (const auto& r : rows) {
        const auto& e = r.estimate;
        body << r.point << ',';
        if (r.error.empty()) {
            body << fmt(e.f0) << ',' << fmt(e.sigma_abs) << ',' << (e.sigma_rel ? fmt(*e.sigma_rel) : "") << ','
                 << e.order << ',' << (e.reliable ? 1 : 0) << ',';
            std::string adv = e.advisory;
            std::replace(adv.begin(), adv.end(), ',', ';');
            body << adv << '\n';
            sig.push_back(e.sigma_abs);
            if (e.reliable) ++reliable;
            if (spec.noise > 0.0 && e.sigma_abs >= 0.5 * spec.noise && e.sigma_abs <= 2.0 * spec.noise) ++within;
        } else {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            body << ",,,,0," << msg << '\n';
        }
    }
    Json summary;
    summary["points"] = rows.size();
    summary["failed"] = rows.size() - sig.size();
    summary["reliable"] = reliable;
    if (!sig.empty()) {
        std::sort(sig.begin(), sig.end());
        summary["median_sigma_abs"] = sig[sig.size() / 2];
    }
    if (spec.noise > 0.0) {
        summary["injected_sigma"] = spec.noise;
        summary["within_factor_2"] = within;
    }
    body << "# summary " << summary.dump() << '\n';
    emit_text(ctx, header, body.str());
    return kOk;
}

}  // namespace nuctk::cli
