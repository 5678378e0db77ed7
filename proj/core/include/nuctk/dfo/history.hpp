#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nuctk/dfo/problem.hpp"

namespace nuctk::dfo {

/// CSV with header x0..x{n-1},r0..r{o-1},f; one record per row, round-trip
/// precision. A nonempty `comment` is written first as a `# ` line.
void write_history(const std::filesystem::path& path, const std::vector<EvaluationRecord>& records,
                   Index n, Index o, const std::string& comment = {});

/// Reads a file written by write_history; leading `#` lines are skipped. Column counts come from the header;
/// the stored f must match the residuals. Throws IoError on malformed input.
std::vector<EvaluationRecord> read_history(const std::filesystem::path& path);

}  // namespace nuctk::dfo
