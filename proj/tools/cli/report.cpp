#include "report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "nuctk/error.hpp"
#include "nuctk/version.hpp"

namespace nuctk::cli {

void Stopwatch::lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    ctx_.timings.emplace_back(phase, std::chrono::duration<double>(now - last_).count());
    last_ = now;
}

Json make_header(const std::string& subcommand, std::uint64_t seed, const Json& config) {
    Json h;
    h["schema"] = "nuctk." + subcommand + "/1";
    h["tool"] = "nuctk";
    h["version"] = kVersion;
    h["subcommand"] = subcommand;
    h["seed"] = seed;
    h["config"] = config;
    return h;
}

namespace {

void write_to(Context& ctx, const std::string& text) {
    if (ctx.out_path.empty()) {
        ctx.out << text;
        ctx.out.flush();
        return;
    }
    std::ofstream f(ctx.out_path, std::ios::binary);
    if (!f) throw IoError("cannot write " + ctx.out_path);
    f << text;
}

}  // namespace

void write_timing(Context& ctx, const std::string& subcommand) {
    std::string path = ctx.timing_path;
    if (path.empty() && !ctx.out_path.empty()) path = ctx.out_path + ".timing.json";
    if (path.empty()) return;
    Json t;
    t["schema"] = "nuctk.timing/1";
    t["subcommand"] = subcommand;
    t["workers"] = ctx.workers;
    Json phases = Json::object();
    double total = 0.0;
    for (const auto& [name, sec] : ctx.timings) {
        phases[name] = sec;
        total += sec;
    }
    t["phases_seconds"] = phases;
    t["total_seconds"] = total;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << t.dump(2) << '\n';
}

void emit_json(Context& ctx, const Json& doc) {
    write_to(ctx, doc.dump(2) + "\n");
    write_timing(ctx, doc.contains("header") ? doc["header"]["subcommand"].get<std::string>() : "unknown");
}

void emit_text(Context& ctx, const Json& header, const std::string& body) {
    write_to(ctx, "# " + header.dump() + "\n" + body);
    write_timing(ctx, header["subcommand"].get<std::string>());
}

Json error_record(int code, const std::string& kind, const std::string& message) {
    Json e;
    e["exit_code"] = code;
    e["kind"] = kind;
    e["message"] = message;
    return e;
}

std::string fmt(double v) {
    // nlohmann's serializer prints the shortest round-trip form
    return Json(v).dump();
}

}  // namespace nuctk::cli
