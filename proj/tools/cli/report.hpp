#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nuctk::cli {

using Json = nlohmann::ordered_json;

/// Where a subcommand writes. Reports go to `out_path` or, when it is empty,
/// to the stream. Timing never goes into the report.
struct Context {
    std::ostream& out;
    std::ostream& err;
    std::string out_path;
    std::string timing_path;  // defaults to <out_path>.timing.json
    int workers = 0;          // resolved, >= 1

    std::vector<std::pair<std::string, double>> timings;
};

/// Wall-clock phases recorded into a context.
class Stopwatch {
public:
    explicit Stopwatch(Context& ctx) : ctx_(ctx), last_(std::chrono::steady_clock::now()) {}
    void lap(const std::string& phase);

private:
    Context& ctx_;
    std::chrono::steady_clock::time_point last_;
};

/// schema, tool, version, subcommand, seed, resolved config.
Json make_header(const std::string& subcommand, std::uint64_t seed, const Json& config);

/// Writes a JSON report, then the timing sidecar.
void emit_json(Context& ctx, const Json& doc);

/// Writes delimited text whose first lines are `# ` + compact header JSON.
void emit_text(Context& ctx, const Json& header, const std::string& body);

void write_timing(Context& ctx, const std::string& subcommand);

/// The exit-code-carrying error record that replaces a report on failure.
Json error_record(int code, const std::string& kind, const std::string& message);

/// Shortest round-trip decimal form, as used in every emitted number.
std::string fmt(double v);

}  // namespace nuctk::cli
