#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include <Eigen/QR>

#include "nuctk/dfo/families.hpp"
#include "nuctk/dfo/history.hpp"
#include "nuctk/dfo/pounders.hpp"
#include "nuctk/error.hpp"

using namespace nuctk;
using namespace nuctk::dfo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Checks every model against its interpolation data.
struct InterpolationWatch {
    double worst = 0.0;
    Observer observer() {
        return [this](const IterationSnapshot& s) {
            for (std::size_t p = 0; p < s.displacements.size(); ++p) {
                const Vector& v = s.values[p];
                for (std::size_t i = 0; i < s.models.size(); ++i) {
                    const double m = s.models[i](s.displacements[p]);
                    const double ref = v(static_cast<Index>(i));
                    worst = std::max(worst, std::abs(m - ref) / std::max(1.0, std::abs(ref)));
                }
            }
        };
    }
};

void expect_monotone(const FitResult& r, double f_start) {
    double best = f_start;
    for (const auto& rec : r.trace) best = std::min(best, rec.f);
    EXPECT_LE(r.best_f, best);
}

}  // namespace

TEST(Chi2, Example) {
    ResidualProblem p;
    p.n = 1;
    p.o = 2;
    p.d = Vector::Ones(2);
    p.d(1) = 2.0;
    p.sigma = Vector::Ones(2);
    p.sigma(1) = 2.0;
    p.lower = Vector::Constant(1, -kInf);
    p.upper = Vector::Constant(1, kInf);
    p.evaluator = [](const Vector&) { return Vector::Zero(2); };
    const auto c = chi2(p, Vector::Zero(1));
    EXPECT_DOUBLE_EQ(c.f, 2.0);
}

TEST(Chi2, EvaluatorFailuresCarryPoint) {
    ResidualProblem p;
    p.n = 1;
    p.o = 1;
    p.d = Vector::Zero(1);
    p.sigma = Vector::Ones(1);
    p.lower = Vector::Constant(1, -kInf);
    p.upper = Vector::Constant(1, kInf);
    p.evaluator = [](const Vector&) -> Vector { throw std::runtime_error("boom"); };
    try {
        chi2(p, Vector::Constant(1, 3.0));
        FAIL();
    } catch (const EvaluationError& e) {
        EXPECT_EQ(e.x()(0), 3.0);
    }
    p.evaluator = [](const Vector&) { return Vector::Constant(1, std::nan("")); };
    EXPECT_THROW(chi2(p, Vector::Zero(1)), EvaluationError);
    p.evaluator = [](const Vector&) { return Vector::Zero(2); };
    EXPECT_THROW(chi2(p, Vector::Zero(1)), EvaluationError);
}

TEST(Problem, Validation) {
    auto inst = make_problem({"linear", 3, 5, 1});
    inst.problem.sigma(0) = 0.0;
    EXPECT_THROW(inst.problem.validate(), InvalidArgument);
    EXPECT_THROW(make_problem({"linear", 5, 3, 1}), InvalidArgument);
    EXPECT_THROW(make_problem({"nope"}), InvalidArgument);
}

TEST(Pounders, LinearMatchesNormalEquations) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = make_problem({"linear", 3, 5, seed});
        InterpolationWatch w;
        const auto r = pounders_minimize(inst.problem, inst.x0, {}, {}, w.observer());
        EXPECT_LE((r.best_x - *inst.x_star).norm(), 1e-8) << seed;
        EXPECT_LE(static_cast<Index>(r.trace.size()), 50) << seed;
        EXPECT_LE(w.worst, 1e-10);
    }
}

TEST(Pounders, Rosenbrock) {
    const auto inst = make_problem({"rosenbrock", 2, 2, 0});
    const auto r = pounders_minimize(inst.problem, inst.x0);
    EXPECT_LE((r.best_x - Vector::Ones(2)).norm(), 1e-6);
    EXPECT_LE(r.best_f, 1e-10);
}

TEST(Pounders, ActiveBoundIsExact) {
    const auto inst = make_problem({"bounded"});
    for (bool single : {false, true}) {
        const auto r = single ? pounder_minimize(inst.problem, inst.x0) : pounders_minimize(inst.problem, inst.x0);
        EXPECT_EQ(r.best_x(0), 1.0);
        EXPECT_DOUBLE_EQ(r.best_f, 1.0);
        for (const auto& rec : r.trace) EXPECT_LE(rec.x(0), 1.0);
    }
}

TEST(Pounders, BudgetExhausted) {
    const auto inst = make_problem({"rosenbrock", 2, 2, 0});
    SolverOptions o;
    o.max_evals = 3;
    const auto r = pounders_minimize(inst.problem, inst.x0, o);
    EXPECT_EQ(r.reason, Termination::BudgetExhausted);
    EXPECT_EQ(to_string(r.reason), "budget_exhausted");
    EXPECT_EQ(static_cast<Index>(r.trace.size()), 3);
}

TEST(Pounders, EvaluatorFailureStopsCleanly) {
    auto inst = make_problem({"linear", 3, 5, 0});
    std::atomic<int> calls{0};
    auto base = inst.problem.evaluator;
    inst.problem.evaluator = [&](const Vector& x) {
        if (++calls > 6) throw std::runtime_error("simulator crashed");
        return base(x);
    };
    const auto r = pounders_minimize(inst.problem, inst.x0);
    EXPECT_EQ(r.reason, Termination::EvaluatorFailure);
    EXPECT_EQ(static_cast<Index>(r.trace.size()), 6);
    EXPECT_TRUE(std::isfinite(r.best_f));
}

TEST(Pounders, WarmStartAtOptimum) {
    const auto inst = make_problem({"linear", 3, 5, 2});
    const auto cold = pounders_minimize(inst.problem, inst.x0);
    std::vector<EvaluationRecord> hist = cold.trace;
    hist.push_back(hist.front());  // duplicate is dropped
    const auto ws = warm_start(hist, 3, 5);
    EXPECT_EQ(ws.records.size(), cold.trace.size());
    const auto warm = pounders_minimize(inst.problem, cold.best_x, {}, ws);
    EXPECT_EQ(warm.new_evals_before_first_accept, 0);
    EXPECT_LE(warm.best_f, cold.best_f);
    EXPECT_THROW(warm_start({EvaluationRecord{0, Vector::Zero(2), Vector::Zero(5), 0.0}}, 3, 5),
                 InvalidArgument);
}

TEST(Pounders, ExponentialFamilyInvariants) {
    const auto inst = make_problem({"exponential", 8, 40, 3, 1e-6});
    InterpolationWatch w;
    SolverOptions o;
    o.max_evals = 200;
    const auto r = pounders_minimize(inst.problem, inst.x0, o, {}, w.observer());
    EXPECT_LE(w.worst, 1e-10);
    EXPECT_LE(r.max_interpolation_error, 1e-10);
    for (const auto& rec : r.trace) EXPECT_TRUE(inst.problem.feasible(rec.x));
    expect_monotone(r, chi2(inst.problem, inst.x0).f);
    EXPECT_LT(r.best_f, chi2(inst.problem, inst.x0).f);
}

TEST(Pounder, SolvesLinearLoosely) {
    const auto inst = make_problem({"linear", 3, 5, 1});
    SolverOptions o;
    o.max_evals = 300;
    const auto r = pounder_minimize(inst.problem, inst.x0, o);
    EXPECT_LE((r.best_x - *inst.x_star).norm(), 1e-4);
}

TEST(Families, NoiseIsDeterministicAndScaled) {
    const auto a = make_problem({"quadratic", 2, 1, 4, 1e-3});
    const auto b = make_problem({"quadratic", 2, 1, 4, 1e-3});
    const Vector x = Vector::Constant(2, 0.3);
    EXPECT_EQ(a.problem.evaluator(x), b.problem.evaluator(x));
    EXPECT_LE(std::abs(a.problem.evaluator(x)(0) - x.squaredNorm()), std::sqrt(3.0) * 1e-3);
    const auto e = make_problem({"exponential", 0, 0, 1});
    EXPECT_EQ(e.problem.n, 8);
    EXPECT_EQ(e.problem.o, 40);
}

TEST(BoxQp, ClipsToBounds) {
    Vector g(2);
    g << -4.0, 1.0;
    const Matrix h = Matrix::Identity(2, 2);
    const Vector s = solve_box_qp(g, h, Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
    EXPECT_EQ(s(0), 1.0);
    EXPECT_NEAR(s(1), -1.0, 1e-12);
    const Vector t = solve_box_qp(g, h, Vector::Constant(2, -10.0), Vector::Constant(2, 10.0));
    EXPECT_NEAR(t(0), 4.0, 1e-10);
    EXPECT_NEAR(t(1), -1.0, 1e-10);
}

TEST(History, RoundTripAndValidation) {
    const auto inst = make_problem({"linear", 3, 5, 0});
    SolverOptions o;
    o.max_evals = 10;
    const auto r = pounders_minimize(inst.problem, inst.x0, o);
    const auto p = std::filesystem::temp_directory_path() / "nuctk_hist.csv";
    write_history(p, r.trace, 3, 5);
    const auto back = read_history(p);
    ASSERT_EQ(back.size(), r.trace.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].x, r.trace[i].x);
        EXPECT_EQ(back[i].r, r.trace[i].r);
    }
    { std::ofstream(p) << "x0,r0,f\n1,2,5\n"; }
    EXPECT_THROW(read_history(p), IoError);
    { std::ofstream(p) << "a,b\n"; }
    EXPECT_THROW(read_history(p), IoError);
}
