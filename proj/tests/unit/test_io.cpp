#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "nuctk/error.hpp"
#include "nuctk/io/matrix_market.hpp"
#include "nuctk/spin/model.hpp"

using namespace nuctk;

namespace {

std::filesystem::path tmp(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "nuctk_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(MatrixMarket, BlockRoundTrip) {
    const auto b = spin::build_jsq_block(spin::build_basis(6, 0));
    const auto p = tmp("b.mtx");
    io::write_block(p, b);
    const auto back = io::read_block(p, "x");
    EXPECT_EQ(back.to_dense(), b.to_dense());
    EXPECT_EQ(back.label(), "x");
}

TEST(MatrixMarket, DenseRoundTrip) {
    Matrix m(2, 3);
    m << 1.0 / 3.0, -2, 3e-300, 4, 5, 6.125;
    const auto p = tmp("d.mtx");
    io::write_dense(p, m);
    EXPECT_EQ(io::read_dense(p), m);
}

TEST(MatrixMarket, GeneralMustBeSymmetric) {
    const auto p = tmp("g.mtx");
    write_text(p, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n2 1 1.0\n");
    EXPECT_EQ(io::read_block(p).to_dense()(0, 1), 1.0);
    write_text(p, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1.0\n2 1 2.0\n");
    EXPECT_THROW(io::read_block(p), IoError);
}

TEST(MatrixMarket, Malformed) {
    const auto p = tmp("bad.mtx");
    write_text(p, "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n");
    EXPECT_THROW(io::read_block(p), IoError);
    write_text(p, "not a header\n");
    EXPECT_THROW(io::read_block(p), IoError);
    write_text(p, "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1.0\n");
    EXPECT_THROW(io::read_block(p), IoError);
    EXPECT_THROW(io::read_block(tmp("missing.mtx")), IoError);
}

TEST(Manifest, RoundTrip) {
    io::Manifest m;
    m.jsq.push_back({"M=0", 0, 6, "j0.mtx"});
    m.hamiltonian.push_back({"M=0", 0, 6, "h0.mtx"});
    const auto p = tmp("manifest.json");
    io::write_manifest(p, m);
    const auto back = io::read_manifest(p);
    ASSERT_EQ(back.jsq.size(), 1u);
    EXPECT_EQ(back.jsq[0].file, "j0.mtx");
    EXPECT_EQ(back.hamiltonian[0].dim, 6);
}
