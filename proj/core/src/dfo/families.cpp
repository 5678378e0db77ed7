#include "nuctk/dfo/families.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>

#include "nuctk/error.hpp"
#include "nuctk/random.hpp"

namespace nuctk::dfo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Evaluator with_noise(Evaluator base, double noise, std::uint64_t seed) {
    if (noise == 0.0) return base;
    return [base = std::move(base), noise, seed](const Vector& x) {
        Vector s = base(x);
        for (Index i = 0; i < s.size(); ++i) s(i) += noise * hash_noise(seed, x, i);
        return s;
    };
}

void finish(ProblemInstance& inst, const ProblemSpec& spec) {
    inst.problem.evaluator = with_noise(inst.problem.evaluator, spec.noise, mix_seed(spec.seed, 0x4015e));
    inst.problem.validate();
}

ProblemInstance linear(const ProblemSpec& spec) {
    const Index n = spec.n > 0 ? spec.n : 3;
    const Index o = spec.o > 0 ? spec.o : 5;
    if (o < n) throw InvalidArgument("linear family needs o >= n");
    Rng rng = make_rng(spec.seed, 1);
    const Matrix a = gaussian_matrix(o, n, rng);
    const Vector b = gaussian_matrix(o, 1, rng).col(0);
    ProblemInstance inst;
    auto& p = inst.problem;
    p.n = n;
    p.o = o;
    p.d = b;
    p.sigma = Vector::Ones(o);
    p.lower = Vector::Constant(n, -kInf);
    p.upper = Vector::Constant(n, kInf);
    p.evaluator = [a](const Vector& x) { return Vector(a * x); };
    inst.x0 = Vector::Zero(n);
    inst.x_star = a.colPivHouseholderQr().solve(b);
    finish(inst, spec);
    return inst;
}

ProblemInstance rosenbrock(const ProblemSpec& spec) {
    const Index n = spec.n > 0 ? spec.n : 2;
    if (n % 2 != 0) throw InvalidArgument("rosenbrock family needs even n");
    if (spec.o != 0 && spec.o != n) throw InvalidArgument("rosenbrock family has o = n");
    ProblemInstance inst;
    auto& p = inst.problem;
    p.n = n;
    p.o = n;
    p.d = Vector::Zero(n);
    p.sigma = Vector::Ones(n);
    p.lower = Vector::Constant(n, -kInf);
    p.upper = Vector::Constant(n, kInf);
    // d = 0, so s = -r
    p.evaluator = [n](const Vector& x) {
        Vector s(n);
        for (Index k = 0; k < n; k += 2) {
            s(k) = -10.0 * (x(k + 1) - x(k) * x(k));
            s(k + 1) = -(1.0 - x(k));
        }
        return s;
    };
    inst.x0 = Vector(n);
    for (Index k = 0; k < n; k += 2) {
        inst.x0(k) = -1.2;
        inst.x0(k + 1) = 1.0;
    }
    inst.x_star = Vector::Ones(n);
    finish(inst, spec);
    return inst;
}

ProblemInstance bounded(const ProblemSpec& spec) {
    if ((spec.n != 0 && spec.n != 1) || (spec.o != 0 && spec.o != 1))
        throw InvalidArgument("bounded family has n = o = 1");
    ProblemInstance inst;
    auto& p = inst.problem;
    p.n = 1;
    p.o = 1;
    p.d = Vector::Constant(1, 2.0);
    p.sigma = Vector::Ones(1);
    p.lower = Vector::Constant(1, -kInf);
    p.upper = Vector::Constant(1, 1.0);
    p.evaluator = [](const Vector& x) { return x; };
    inst.x0 = Vector::Zero(1);
    inst.x_star = Vector::Ones(1);
    finish(inst, spec);
    return inst;
}

ProblemInstance quadratic(const ProblemSpec& spec) {
    const Index n = spec.n > 0 ? spec.n : 2;
    if (spec.o != 0 && spec.o != 1) throw InvalidArgument("quadratic family has o = 1");
    ProblemInstance inst;
    auto& p = inst.problem;
    p.n = n;
    p.o = 1;
    p.d = Vector::Zero(1);
    p.sigma = Vector::Ones(1);
    p.lower = Vector::Constant(n, -kInf);
    p.upper = Vector::Constant(n, kInf);
    p.evaluator = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm()); };
    inst.x0 = Vector::Ones(n);
    inst.x_star = Vector::Zero(n);
    finish(inst, spec);
    return inst;
}

ProblemInstance exponential(const ProblemSpec& spec) {
    const Index n = spec.n > 0 ? spec.n : 8;
    const Index o = spec.o > 0 ? spec.o : 40;
    if (n % 2 != 0) throw InvalidArgument("exponential family needs even n");
    if (o < n) throw InvalidArgument("exponential family needs o >= n");
    if (!(spec.data_noise > 0.0)) throw InvalidArgument("exponential family needs data_noise > 0");
    const Index terms = n / 2;
    Vector theta(o);
    for (Index i = 0; i < o; ++i) theta(i) = 4.0 * static_cast<double>(i) / static_cast<double>(o - 1);

    auto model = [theta, terms](const Vector& x) {
        Vector s = Vector::Zero(theta.size());
        for (Index k = 0; k < terms; ++k)
            s += x(2 * k) * (-x(2 * k + 1) * theta.array()).exp().matrix();
        return s;
    };

    // hidden truth: amplitudes in [0.5, 1.5], rates spread over [0.3, 3]
    Rng rng = make_rng(spec.seed, 2);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::uniform_real_distribution<double> amp(0.5, 1.5);
    Vector truth(n);
    for (Index k = 0; k < terms; ++k) {
        const double frac = terms > 1 ? static_cast<double>(k) / static_cast<double>(terms - 1) : 0.0;
        truth(2 * k) = amp(rng);
        truth(2 * k + 1) = 0.3 * std::pow(10.0, frac) * (1.0 + jitter(rng));
    }
    std::normal_distribution<double> gauss(0.0, spec.data_noise);
    Vector d = model(truth);
    for (Index i = 0; i < o; ++i) d(i) += gauss(rng);

    ProblemInstance inst;
    auto& p = inst.problem;
    p.n = n;
    p.o = o;
    p.d = d;
    p.sigma = Vector::Constant(o, spec.data_noise);
    p.lower = Vector::Zero(n);
    p.upper = Vector::Constant(n, 4.0);
    p.evaluator = model;
    // start from equal amplitudes and evenly spaced rates
    inst.x0 = Vector(n);
    for (Index k = 0; k < terms; ++k) {
        inst.x0(2 * k) = 1.0;
        inst.x0(2 * k + 1) = 0.5 + static_cast<double>(k);
    }
    finish(inst, spec);
    return inst;
}

}  // namespace

double hash_noise(std::uint64_t seed, const Vector& x, Index component) {
    std::uint64_t h = mix_seed(seed, static_cast<std::uint64_t>(component));
    for (Index j = 0; j < x.size(); ++j) h = mix_seed(h ^ std::bit_cast<std::uint64_t>(x(j)), j);
    // 53 random bits -> [0, 1) -> uniform with unit variance
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return std::sqrt(3.0) * (2.0 * u - 1.0);
}

std::vector<std::string> family_names() {
    return {"linear", "rosenbrock", "bounded", "quadratic", "exponential"};
}

ProblemInstance make_problem(const ProblemSpec& spec) {
    if (spec.noise < 0.0) throw InvalidArgument("noise must be nonnegative");
    if (spec.family == "linear") return linear(spec);
    if (spec.family == "rosenbrock") return rosenbrock(spec);
    if (spec.family == "bounded") return bounded(spec);
    if (spec.family == "quadratic") return quadratic(spec);
    if (spec.family == "exponential") return exponential(spec);
    throw InvalidArgument("unknown problem family '" + spec.family + "'");
}

}  // namespace nuctk::dfo
