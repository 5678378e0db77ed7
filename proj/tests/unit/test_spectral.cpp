#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nuctk/error.hpp"
#include "nuctk/spectral/filter.hpp"
#include "nuctk/spectral/nullspace.hpp"
#include "nuctk/spectral/subspace.hpp"
#include "nuctk/spin/model.hpp"
#include "support/oracles.hpp"

using namespace nuctk;
using namespace nuctk::spectral;

namespace {

SymmetricOperatorBlock diag(std::initializer_list<double> d) {
    std::vector<Entry> e;
    Index i = 0;
    for (double v : d) {
        if (v != 0.0) e.push_back({i, i, v});
        ++i;
    }
    return SymmetricOperatorBlock(i, e, "diag");
}

SymmetricOperatorBlock from_dense(const Matrix& m) {
    std::vector<Entry> e;
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i <= j; ++i)
            if (m(i, j) != 0.0) e.push_back({i, j, m(i, j)});
    return SymmetricOperatorBlock(m.rows(), e, "dense");
}

SymmetricOperatorBlock spin_block(int n, int twice_m) {
    return spin::build_jsq_block(spin::build_basis(n, twice_m));
}

void expect_valid(const SymmetricOperatorBlock& a, double lambda, const NullSpaceBasis& b) {
    if (b.rank() == 0) return;
    EXPECT_LE(orthonormality_error(b.vectors), 1e-10);
    EXPECT_LE(null_residual(a, lambda, b.vectors), 1e-8 * std::max(1.0, a.frobenius_norm()));
}

}  // namespace

TEST(OperatorBlock, MirrorsLowerEntriesAndRejectsDuplicates) {
    SymmetricOperatorBlock a(2, {{1, 0, 3.0}, {0, 0, 1.0}});
    EXPECT_EQ(a.to_dense()(0, 1), 3.0);
    EXPECT_EQ(a.to_dense()(1, 0), 3.0);
    EXPECT_THROW(SymmetricOperatorBlock(2, {{0, 1, 1.0}, {1, 0, 1.0}}), InvalidArgument);
    EXPECT_THROW(SymmetricOperatorBlock(2, {{0, 2, 1.0}}), InvalidArgument);
}

TEST(OperatorBlock, GershgorinEnclosesSpectrum) {
    const auto a = spin_block(6, 0);
    const auto [lo, hi] = a.gershgorin_bounds();
    EXPECT_LE(lo, 0.0);
    EXPECT_GE(hi, 12.0);
}

TEST(Rqr, DiagonalExamples) {
    const auto a = diag({0, 2, 6});
    const auto b = rqr_nullspace(a, 0.0);
    ASSERT_EQ(b.rank(), 1);
    EXPECT_NEAR(std::abs(b.vectors(0, 0)), 1.0, 1e-12);
    const auto i2 = diag({2, 2, 2});
    EXPECT_EQ(rqr_nullspace(i2, 0.0).rank(), 0);
}

TEST(Rqr, FourSpinSinglets) {
    const auto a = spin_block(4, 0);
    const auto b = rqr_nullspace(a, 0.0);
    EXPECT_EQ(b.rank(), 2);
    expect_valid(a, 0.0, b);
}

TEST(Rqr, DenseCapIsEnforced) {
    RqrOptions o;
    o.dense_cap = 2;
    EXPECT_THROW(rqr_nullspace(diag({0, 2, 6}), 0.0, o), BlockTooLarge);
}

TEST(Sil, DiagonalExamples) {
    EXPECT_EQ(sil_nullspace(diag({0, 2, 6}), 0.0).rank(), 1);
    EXPECT_EQ(sil_nullspace(diag({2, 2, 6}), 0.0).rank(), 0);
}

TEST(Sil, FourSpinTriplets) {
    const auto a = spin_block(4, 0);
    const auto b = sil_nullspace(a, 2.0);
    EXPECT_EQ(b.rank(), 3);
    expect_valid(a, 2.0, b);
}

TEST(Sil, ShiftOnEigenvalueThrows) {
    SilOptions o;
    o.shift_offset = 2.0;  // lambda + offset = 2 is an eigenvalue
    EXPECT_THROW(sil_nullspace(diag({0, 2, 6}), 0.0, o), ShiftHitEigenvalue);
}

TEST(Filter, NormalizedAtLambdaAndDampedElsewhere) {
    for (double lambda : {0.0, 6.0, 12.0}) {
        const auto f = SpectralFilter::build(lambda, 0.0, 12.0, 2.0, 30);
        EXPECT_LE(std::abs(f(lambda) - 1.0), 1e-12) << lambda;
        for (double w : {0.0, 2.0, 6.0, 12.0})
            if (std::abs(w - lambda) >= 2.0) EXPECT_LE(std::abs(f(w)), f.damping() * (1 + 1e-9));
    }
}

TEST(Filter, ApplyMatchesScalarOnDiagonal) {
    const auto a = diag({0, 2, 6, 12});
    const auto f = SpectralFilter::build(6.0, 0.0, 12.0, 4.0, 12);
    const Matrix y = f.apply(a, Matrix::Identity(4, 4));
    for (Index i = 0; i < 4; ++i) EXPECT_NEAR(y(i, i), f(a.to_dense()(i, i)), 1e-12);
}

TEST(Pasi, InteriorDiagonal) {
    const auto a = diag({0, 2, 6, 12});
    const auto b = pasi_nullspace(a, 6.0);
    ASSERT_EQ(b.rank(), 1);
    EXPECT_NEAR(std::abs(b.vectors(2, 0)), 1.0, 1e-10);
}

TEST(Pasi, SixSpinSinglets) {
    const auto a = spin_block(6, 0);
    const auto b = pasi_nullspace(a, 0.0);
    EXPECT_EQ(b.rank(), 5);
    expect_valid(a, 0.0, b);
}

TEST(Oracle, SmallExamples) {
    EXPECT_EQ(dense_null_oracle(diag({0, 0}), 0.0, 1e-10).rank(), 2);
    EXPECT_EQ(dense_null_oracle(diag({0, 2}), 2.0, 1e-10).rank(), 1);
    Matrix m(2, 2);
    m << 1, 1, 1, 1;
    const auto b = dense_null_oracle(from_dense(m), 0.0, 1e-10);
    ASSERT_EQ(b.rank(), 1);
    EXPECT_NEAR(std::abs(b.vectors(0, 0)), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(b.vectors(0, 0), -b.vectors(1, 0), 1e-12);
}

TEST(PrincipalAngles, Examples) {
    Matrix e1 = Matrix::Zero(2, 1), e2 = Matrix::Zero(2, 1), d = Matrix::Zero(2, 1);
    e1(0, 0) = 1;
    e2(1, 0) = 1;
    d << std::sqrt(0.5), std::sqrt(0.5);
    EXPECT_NEAR(principal_angles(e1, e1)[0], 0.0, 1e-15);
    EXPECT_NEAR(principal_angles(e1, e2)[0], std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(principal_angles(e1, d)[0], std::numbers::pi / 4, 1e-12);
}

TEST(PrincipalAngles, ResolvesTinyAngles) {
    Matrix a = Matrix::Zero(3, 1), b = Matrix::Zero(3, 1);
    a(0, 0) = 1;
    b(0, 0) = std::cos(1e-11);
    b(1, 0) = std::sin(1e-11);
    EXPECT_NEAR(principal_angles(a, b)[0], 1e-11, 1e-20);
}

// Property: all three algorithms agree with an independently assembled S^2
// (Kronecker products) on the multiplet count, and span the same space.
class SpinBlocks : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(SpinBlocks, AlgorithmsAgreeWithKroneckerOracle) {
    const auto [n, twice_s] = GetParam();
    const double lambda = spin::casimir(twice_s);
    const oracle::Mat s2 = oracle::total_s2(n);
    for (int twice_m = -twice_s; twice_m <= twice_s; twice_m += 2) {
        const auto a = spin_block(n, twice_m);
        const int ups = (n + twice_m) / 2;
        const int expected = oracle::count_eigs_near(oracle::restrict_to_popcount(s2, n, ups), lambda, 1e-8);
        const auto rqr = rqr_nullspace(a, lambda);
        const auto sil = sil_nullspace(a, lambda);
        PasiOptions po;
        po.spectrum_bounds = std::make_pair(spin::casimir(std::abs(twice_m)), spin::casimir(n));
        const auto pasi = pasi_nullspace(a, lambda, po);
        EXPECT_EQ(rqr.rank(), expected);
        EXPECT_EQ(sil.rank(), expected);
        EXPECT_EQ(pasi.rank(), expected);
        expect_valid(a, lambda, rqr);
        expect_valid(a, lambda, sil);
        expect_valid(a, lambda, pasi);
        if (expected > 0) {
            EXPECT_LE(principal_angles(rqr, sil)[0], 1e-8);
            EXPECT_LE(principal_angles(rqr, pasi)[0], 1e-8);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Small, SpinBlocks,
                         ::testing::Values(std::make_tuple(2, 0), std::make_tuple(4, 0), std::make_tuple(4, 2),
                                           std::make_tuple(4, 4), std::make_tuple(6, 2), std::make_tuple(6, 4),
                                           std::make_tuple(8, 0), std::make_tuple(8, 6)));

TEST(Determinism, SameSeedSameBasis) {
    const auto a = spin_block(6, 0);
    for (int rep = 0; rep < 2; ++rep) {
        RqrOptions ro;
        ro.seed = 7;
        EXPECT_EQ(rqr_nullspace(a, 2.0, ro).vectors, rqr_nullspace(a, 2.0, ro).vectors);
        SilOptions so;
        so.seed = 7;
        EXPECT_EQ(sil_nullspace(a, 2.0, so).vectors, sil_nullspace(a, 2.0, so).vectors);
        PasiOptions po;
        po.seed = 7;
        EXPECT_EQ(pasi_nullspace(a, 2.0, po).vectors, pasi_nullspace(a, 2.0, po).vectors);
    }
}

TEST(RandomSymmetric, NullSpaceOfPlantedMatrix) {
    // A = Q diag(0,0,0,1..) Q^T with random Q: rank-3 null space at lambda = 0
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Matrix x(30, 30);
    for (Index i = 0; i < 30; ++i)
        for (Index j = 0; j < 30; ++j) x(i, j) = g(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(x).householderQ();
    Vector d(30);
    for (Index i = 0; i < 30; ++i) d(i) = i < 3 ? 0.0 : 1.0 + i;
    const Matrix m = q * d.asDiagonal() * q.transpose();
    const auto a = from_dense(0.5 * (m + m.transpose()));
    EXPECT_EQ(rqr_nullspace(a, 0.0).rank(), 3);
    EXPECT_EQ(sil_nullspace(a, 0.0).rank(), 3);
    PasiOptions po;
    po.gap = 4.0;
    EXPECT_EQ(pasi_nullspace(a, 0.0, po).rank(), 3);
}
