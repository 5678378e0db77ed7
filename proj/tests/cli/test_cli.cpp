#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include <Eigen/QR>

#include "app.hpp"
#include "json.hpp"
#include "nuctk/dfo/families.hpp"
#include "nuctk/dfo/problem.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
    json doc() const { return json::parse(out); }
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = nuctk::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch() {
    const auto d = fs::temp_directory_path() / "nuctk_cli_test";
    fs::create_directories(d);
    return d;
}

std::string write(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void expect_header(const json& h, const std::string& sub) {
    EXPECT_EQ(h.at("schema"), "nuctk." + sub + "/1");
    EXPECT_EQ(h.at("subcommand"), sub);
    EXPECT_TRUE(h.at("version").is_string());
    EXPECT_TRUE(h.at("seed").is_number_unsigned());
    EXPECT_TRUE(h.at("config").is_object());
}

json csv_header(const std::string& text) {
    EXPECT_EQ(text.rfind("# ", 0), 0u);
    return json::parse(text.substr(2, text.find('\n') - 2));
}

}  // namespace

TEST(Fixedj, FourSpinSingletsWithOracle) {
    const auto r = invoke({"fixedj", "--model", "spins", "--n", "4", "--j", "0", "--algo", "pasi", "--k", "2", "--oracle"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    expect_header(d["header"], "fixedj");
    EXPECT_EQ(d["states"].size(), 2u);
    EXPECT_TRUE(d["oracle"]["agree"].get<bool>());
    EXPECT_TRUE(d["checks"]["residuals_ok"].get<bool>());
}

TEST(Fixedj, NoStatesExitsThree) {
    const auto r = invoke({"fixedj", "--n", "4", "--j", "7"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("no states with requested J"), std::string::npos);
    EXPECT_EQ(r.doc()["error"]["exit_code"], 3);
}

TEST(Fixedj, InvalidInputsExitTwo) {
    EXPECT_EQ(invoke({"fixedj", "--manifest", "/nonexistent/manifest.json", "--j", "0"}).code, 2);
    EXPECT_EQ(invoke({"fixedj", "--n", "4", "--j", "0.3"}).code, 2);
    EXPECT_EQ(invoke({"fixedj", "--n", "4", "--j", "0", "--algo", "lapack"}).code, 2);
    EXPECT_EQ(invoke({"fixedj", "--n", "4"}).code, 2);
    EXPECT_EQ(invoke({"nonsense"}).code, 2);
}

TEST(Fixedj, ManifestMatchesBuiltinModel) {
    const auto dir = scratch() / "blocks6";
    const auto b = invoke({"blocks", "--n", "6", "--periodic", "--out-dir", dir.string()});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto ext = invoke({"fixedj", "--manifest", (dir / "manifest.json").string(), "--j", "1", "--k", "3"});
    const auto own = invoke({"fixedj", "--n", "6", "--periodic", "--j", "1", "--k", "3"});
    ASSERT_EQ(ext.code, 0) << ext.err;
    ASSERT_EQ(own.code, 0) << own.err;
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(ext.doc()["states"][i]["energy"].get<double>(), own.doc()["states"][i]["energy"].get<double>(), 1e-12);
}

TEST(Schedule, GreedyBeatsCyclicOnC12Profile) {
    const auto r = invoke({"schedule", "--profile", "c12_nmax6_like", "--n-procs", "496", "--compare", "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    expect_header(d["header"], "schedule");
    EXPECT_LT(d["policies"]["greedy"]["makespan"].get<double>(), d["policies"]["cyclic"]["makespan"].get<double>());
}

TEST(Schedule, LoadsFileExample) {
    const auto loads = write("loads.csv", "work\n4\n3\n3\n2\n2\n");
    const auto r = invoke({"schedule", "--loads", loads, "--n-procs", "2", "--compare"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    EXPECT_EQ(d["policies"]["greedy"]["makespan"].get<double>(), 8.0);
    EXPECT_EQ(d["policies"]["cyclic"]["makespan"].get<double>(), 9.0);
    const auto opt = invoke({"schedule", "--loads", loads, "--n-procs", "2", "--policy", "optimal"});
    EXPECT_EQ(opt.doc()["policies"]["optimal"]["makespan"].get<double>(), 7.0);
}

TEST(Schedule, InvalidInputsExitTwo) {
    EXPECT_EQ(invoke({"schedule", "--profile", "c12_nmax6_like", "--n-procs", "0"}).code, 2);
    EXPECT_EQ(invoke({"schedule", "--loads", write("bad.csv", "dim\nabc\n"), "--n-procs", "2"}).code, 2);
    EXPECT_EQ(invoke({"schedule", "--n-procs", "2"}).code, 2);
}

TEST(Fit, LinearReachesNormalEquationsOptimum) {
    const auto r = invoke({"fit", "--family", "linear", "--n", "3", "--o", "5", "--seed", "4", "--algo", "pounders"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = r.doc();
    expect_header(d["header"], "fit");
    // independent optimum from the same instance
    const auto inst = nuctk::dfo::make_problem({"linear", 3, 5, 4});
    Eigen::MatrixXd a(5, 3);
    const auto s0 = inst.problem.evaluator(Eigen::VectorXd::Zero(3));
    for (int j = 0; j < 3; ++j) a.col(j) = inst.problem.evaluator(Eigen::VectorXd::Unit(3, j)) - s0;
    const Eigen::VectorXd x = a.householderQr().solve(inst.problem.d - s0);
    const double f_star = (inst.problem.d - s0 - a * x).squaredNorm();
    EXPECT_LE(std::abs(d["runs"][0]["best_f"].get<double>() - f_star), 1e-8);
}

TEST(Fit, WarmStartFromOptimalHistory) {
    const auto hist = (scratch() / "hist.csv").string();
    const auto cold = invoke({"fit", "--family", "linear", "--n", "3", "--o", "5", "--seed", "4", "--history-out", hist});
    ASSERT_EQ(cold.code, 0) << cold.err;
    const auto warm = invoke({"fit", "--family", "linear", "--n", "3", "--o", "5", "--seed", "4", "--warm", hist});
    ASSERT_EQ(warm.code, 0) << warm.err;
    EXPECT_EQ(warm.doc()["runs"][0]["new_evals_before_first_accept"], 0);
    EXPECT_EQ(csv_header(slurp(hist))["subcommand"], "fit");
}

TEST(Fit, CompareAndTraceFile) {
    const auto trace = (scratch() / "trace.csv").string();
    const auto r = invoke({"fit", "--family", "rosenbrock", "--compare", "--max-evals", "200", "--trace-out", trace});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["runs"].size(), 2u);
    const auto text = slurp(trace);
    EXPECT_EQ(csv_header(text)["subcommand"], "fit");
    EXPECT_NE(text.find("algo,index,f,best_f\n"), std::string::npos);
}

TEST(Fit, InvalidInputsExitTwo) {
    EXPECT_EQ(invoke({"fit", "--algo", "newuoa"}).code, 2);
    EXPECT_EQ(invoke({"fit", "--warm", "/nonexistent.csv"}).code, 2);
    EXPECT_EQ(invoke({"fit", "--problem", write("p.json", "{\"family\": \"linear\", \"n\": 5, \"o\": 3}")}).code, 2);
}

TEST(Noise, NoiselessQuadratic) {
    const auto pts = write("pts.csv", "x0,x1\n0.1,0.2\n-0.5,0.3\n1,1\n0.7,-0.2\n2,0\n");
    const auto r = invoke({"noise", "--family", "quadratic", "--n", "2", "--points", pts});
    ASSERT_EQ(r.code, 0) << r.err;
    expect_header(csv_header(r.out), "noise");
    std::istringstream in(r.out);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("point", 0) == 0) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        EXPECT_LE(std::stod(cells.at(2)), 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 5);
}

TEST(Noise, SeededNoiseSummary) {
    std::string text = "x0,x1\n";
    for (int i = 0; i < 20; ++i) text += std::to_string(0.1 * i) + "," + std::to_string(1.0 - 0.05 * i) + "\n";
    const auto r = invoke({"noise", "--family", "quadratic", "--n", "2", "--noise", "1e-5", "--points",
                          write("pts20.csv", text), "--seed", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto pos = r.out.find("# summary ");
    ASSERT_NE(pos, std::string::npos);
    const auto s = json::parse(r.out.substr(pos + 10));
    EXPECT_EQ(s["points"], 20);
    EXPECT_GE(s["within_factor_2"].get<int>(), 14);
}

TEST(Noise, EmptyOrMalformedPointsExitTwo) {
    EXPECT_EQ(invoke({"noise", "--points", write("empty.csv", "")}).code, 2);
    EXPECT_EQ(invoke({"noise", "--family", "quadratic", "--n", "2", "--points", write("short.csv", "1\n")}).code, 2);
    EXPECT_EQ(invoke({"noise", "--points", write("one.csv", "1,1\n"), "--m", "3"}).code, 2);
}

TEST(Config, FileValuesAndCommandLineOverride) {
    const auto cfg = write("run.json", R"({"n": 6, "j": 1, "algo": "sil", "k": 3, "periodic": true})");
    const auto r = invoke({"fixedj", "--config", cfg, "--k", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto c = r.doc()["header"]["config"];
    EXPECT_EQ(c["n"], 6);
    EXPECT_EQ(c["algo"], "sil");
    EXPECT_EQ(c["k"], 2);
    EXPECT_EQ(c["periodic"], true);
    EXPECT_EQ(invoke({"fixedj", "--config", write("bad.json", "{oops")}).code, 2);
}

TEST(Output, TimingLivesInSidecar) {
    const auto out = (scratch() / "sched.json").string();
    const auto r = invoke({"schedule", "--profile", "uniform(1,100,20)", "--n-procs", "4", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const auto report = slurp(out);
    EXPECT_EQ(report.find("seconds"), std::string::npos);
    const auto timing = json::parse(slurp(out + ".timing.json"));
    EXPECT_EQ(timing["schema"], "nuctk.timing/1");
}

TEST(Determinism, RepeatedRunsAndWorkerCounts) {
    const auto pts = write("pts_det.csv", "0.5,0.5\n1,2\n-1,0.25\n");
    const std::vector<std::vector<std::string>> cmds{
        {"fixedj", "--n", "8", "--j", "1", "--k", "3", "--algo", "sil", "--seed", "5"},
        {"fixedj", "--n", "8", "--j", "0", "--k", "3", "--algo", "rqr", "--n-procs", "4", "--seed", "5"},
        {"schedule", "--profile", "c12_nmax6_like(400)", "--n-procs", "120", "--compare", "--seed", "3"},
        {"fit", "--family", "exponential", "--noise", "1e-6", "--max-evals", "60", "--seed", "3"},
        {"noise", "--family", "quadratic", "--n", "2", "--noise", "1e-4", "--points", pts, "--seed", "3"},
    };
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    for (const auto& cmd : cmds) {
        std::string ref;
        for (int w : {1, 2, hw, 1, 1}) {
            auto args = cmd;
            args.insert(args.begin(), {"--workers", std::to_string(w)});
            const auto r = invoke(args);
            ASSERT_EQ(r.code, 0) << r.err;
            if (ref.empty()) ref = r.out;
            EXPECT_EQ(r.out, ref) << cmd.front() << " workers=" << w;
        }
    }
}
