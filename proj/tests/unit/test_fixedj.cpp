#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "nuctk/error.hpp"
#include "nuctk/fixedj/pipeline.hpp"
#include "nuctk/spectral/subspace.hpp"
#include "support/oracles.hpp"

using namespace nuctk;
using namespace nuctk::fixedj;

namespace {

ProjectorOptions with(Algorithm a, int workers = 1) {
    ProjectorOptions o;
    o.algo = a;
    o.workers = workers;
    o.seed = 42;
    return o;
}

spin::BlockedOperator chain(int n, bool ring) {
    std::vector<double> j(static_cast<std::size_t>(ring ? n : n - 1));
    for (std::size_t b = 0; b < j.size(); ++b) j[b] = 1.0 + 0.25 * std::sin(static_cast<double>(b));
    return spin::build_heisenberg_operator(n, j, ring);
}

}  // namespace

TEST(Projector, RanksPerBlock) {
    const auto j2 = spin::build_jsq_operator(2);
    const auto z0 = build_projector(j2, 0, with(Algorithm::Rqr));
    Index total = 0;
    for (const auto& z : z0) total += z.rank();
    EXPECT_EQ(total, 1);

    const auto j4 = spin::build_jsq_operator(4);
    for (auto algo : {Algorithm::Rqr, Algorithm::Sil, Algorithm::Pasi}) {
        const auto z1 = build_projector(j4, 2, with(algo));
        for (std::size_t k = 0; k < z1.size(); ++k) {
            const int tm = j4.blocks[k].twice_m;
            EXPECT_EQ(z1[k].rank(), std::abs(tm) <= 2 ? 3 : 0) << to_string(algo) << ' ' << tm;
        }
    }
}

TEST(Projector, MissingJThrows) {
    const auto h = chain(4, false);
    const auto j4 = spin::build_jsq_operator(4);
    EXPECT_THROW(solve_fixed_j(h, j4, 6, 1, with(Algorithm::Pasi)), NoStatesWithJ);
    EXPECT_THROW(solve_fixed_j(h, j4, 14, 1, with(Algorithm::Rqr)), NoStatesWithJ);
}

TEST(Projector, WorkerCountIndependent) {
    const auto j = spin::build_jsq_operator(8);
    for (auto algo : {Algorithm::Rqr, Algorithm::Sil, Algorithm::Pasi}) {
        const auto a = build_projector(j, 2, with(algo, 1));
        const auto b = build_projector(j, 2, with(algo, 3));
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].vectors, b[k].vectors);
    }
}

TEST(Projection, IdentityAndTwoSpinSinglet) {
    const auto j2 = spin::build_jsq_operator(2);
    const auto z = build_projector(j2, 0, with(Algorithm::Rqr));
    const auto hp = project_hamiltonian(chain(2, false), z);
    ASSERT_EQ(hp.dim(), 1);
    EXPECT_NEAR(hp.hp(0, 0), -0.75 * (1.0 + 0.25 * std::sin(0.0)), 1e-14);

    const auto zj = build_projector(spin::build_jsq_operator(4), 2, with(Algorithm::Rqr));
    spin::BlockedOperator id4;
    for (const auto& b : spin::build_jsq_operator(4).blocks) {
        std::vector<spectral::Entry> e;
        for (Index i = 0; i < b.op.dim(); ++i) e.push_back({i, i, 1.0});
        id4.blocks.push_back({b.twice_m, spectral::SymmetricOperatorBlock(b.op.dim(), e)});
    }
    const auto p = project_hamiltonian(id4, zj);
    EXPECT_LE((p.hp - Matrix::Identity(p.dim(), p.dim())).norm(), 1e-12);
}

TEST(Lanczos, DiagonalExample) {
    const Matrix d = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
    const auto e = lanczos_lowest(d, 2);
    ASSERT_EQ(e.values.size(), 2);
    EXPECT_NEAR(e.values(0), 1.0, 1e-12);
    EXPECT_NEAR(e.values(1), 2.0, 1e-12);
}

TEST(Lanczos, RandomMatchesDense) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    Matrix a(50, 50);
    for (Index i = 0; i < 50; ++i)
        for (Index j = 0; j < 50; ++j) a(i, j) = g(rng);
    a = (0.5 * (a + a.transpose())).eval();
    const auto e = lanczos_lowest(a, 5, 1e-12, 9);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a, Eigen::EigenvaluesOnly);
    for (Index i = 0; i < 5; ++i) EXPECT_NEAR(e.values(i), ref.eigenvalues()(i), 1e-9);
}

TEST(Lanczos, CapturesDegenerateLevels) {
    Vector d(40);
    for (Index i = 0; i < 40; ++i) d(i) = i < 4 ? -1.0 : static_cast<double>(i);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    Matrix x(40, 40);
    for (Index i = 0; i < 40; ++i)
        for (Index j = 0; j < 40; ++j) x(i, j) = g(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(x).householderQ();
    const Matrix a = q * d.asDiagonal() * q.transpose();
    const auto e = lanczos_lowest(0.5 * (a + a.transpose()), 5);
    for (Index i = 0; i < 4; ++i) EXPECT_NEAR(e.values(i), -1.0, 1e-10);
    EXPECT_NEAR(e.values(4), 4.0, 1e-10);
}

// The pipeline agrees with an oracle built independently from Kronecker
// products on the full 2^n space.
TEST(Pipeline, MatchesKroneckerOracle) {
    for (int n : {4, 6}) {
        for (bool ring : {false, true}) {
            std::vector<double> j(static_cast<std::size_t>(ring ? n : n - 1));
            for (std::size_t b = 0; b < j.size(); ++b) j[b] = 1.0 + 0.25 * std::sin(static_cast<double>(b));
            const auto h = spin::build_heisenberg_operator(n, j, ring);
            const auto js = spin::build_jsq_operator(n);
            const oracle::Mat hf = oracle::heisenberg(n, j, ring);
            const oracle::Mat sf = oracle::total_s2(n);
            for (int tj = 0; tj <= n; tj += 2) {
                const auto ref = oracle::fixed_s_energies(hf, sf, spin::casimir(tj), 1 << n);
                for (auto algo : {Algorithm::Rqr, Algorithm::Sil, Algorithm::Pasi}) {
                    // the full-space reference already repeats each level once per M
                    const auto r = solve_fixed_j(h, js, tj, 3, with(algo));
                    const auto& expanded = ref;
                    const Index k = std::min<Index>(3, static_cast<Index>(expanded.size()));
                    ASSERT_EQ(r.spectrum.energies.size(), k);
                    for (Index i = 0; i < k; ++i)
                        EXPECT_NEAR(r.spectrum.energies(i), expanded[static_cast<std::size_t>(i)], 1e-8)
                            << n << ring << tj << to_string(algo);
                    for (Index i = 0; i < k; ++i) {
                        EXPECT_LE(r.spectrum.h_residuals(i), 1e-8 * h.frobenius_norm());
                        EXPECT_LE(r.spectrum.jsq_residuals(i), 1e-8);
                    }
                }
            }
        }
    }
}

TEST(Pipeline, MatchesBruteForceFilter) {
    const auto h = chain(8, true);
    const auto js = spin::build_jsq_operator(8);
    for (int tj : {0, 2, 8}) {
        const auto bf = brute_force_filter(h, js, tj, 5);
        const auto r = solve_fixed_j(h, js, tj, 5, with(Algorithm::Pasi, 2));
        ASSERT_EQ(bf.energies.size(), r.spectrum.energies.size());
        for (Index i = 0; i < bf.energies.size(); ++i) EXPECT_NEAR(bf.energies(i), r.spectrum.energies(i), 1e-8);
    }
}

TEST(Pipeline, BitwiseIndependentOfWorkerCount) {
    const auto h = chain(8, false);
    const auto js = spin::build_jsq_operator(8);
    for (auto algo : {Algorithm::Rqr, Algorithm::Sil, Algorithm::Pasi}) {
        const auto ref = solve_fixed_j(h, js, 2, 5, with(algo, 1));
        for (int w : {2, 4}) {
            const auto r = solve_fixed_j(h, js, 2, 5, with(algo, w));
            EXPECT_TRUE(r.spectrum.energies == ref.spectrum.energies) << to_string(algo) << " workers=" << w;
            EXPECT_TRUE(r.spectrum.wave_functions == ref.spectrum.wave_functions) << to_string(algo) << " workers=" << w;
        }
    }
}

TEST(Algorithm, ParseRoundTrip) {
    for (auto a : {Algorithm::Rqr, Algorithm::Sil, Algorithm::Pasi}) EXPECT_EQ(parse_algorithm(to_string(a)), a);
    EXPECT_THROW(parse_algorithm("qr"), InvalidArgument);
}
