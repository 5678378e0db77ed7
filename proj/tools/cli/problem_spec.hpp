#pragma once

#include <string>

#include "nuctk/dfo/families.hpp"
#include "report.hpp"

namespace nuctk::cli {

/// Overrides the fields present in a JSON problem file
/// ({"family", "n", "o", "seed", "noise", "data_noise"}).
void apply_problem_file(const std::string& path, dfo::ProblemSpec& spec);

Json problem_json(const dfo::ProblemSpec& spec);

}  // namespace nuctk::cli
