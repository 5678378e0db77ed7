#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nuctk/linalg.hpp"
#include "nuctk/spectral/operator_block.hpp"

namespace nuctk::io {

/// Reads a `matrix coordinate real {symmetric|general}` file. General files
/// must be square and symmetric; their lower triangle is discarded after the
/// check. Throws IoError on malformed input.
spectral::SymmetricOperatorBlock read_block(const std::filesystem::path& path,
                                            std::string label = {});

/// Writes the lower triangle as `matrix coordinate real symmetric`, 1-based,
/// with round-trip precision.
void write_block(const std::filesystem::path& path, const spectral::SymmetricOperatorBlock& block);

/// Dense column-major `matrix array real general`.
void write_dense(const std::filesystem::path& path, const Matrix& m);
Matrix read_dense(const std::filesystem::path& path);

/// One line of a block manifest: which file holds which M block.
struct ManifestEntry {
    std::string label;
    int twice_m = 0;
    Index dim = 0;
    std::string file;  // relative to the manifest's directory
};

struct Manifest {
    std::vector<ManifestEntry> jsq;
    std::vector<ManifestEntry> hamiltonian;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace nuctk::io
