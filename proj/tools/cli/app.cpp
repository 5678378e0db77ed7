#include "app.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

#include "commands.hpp"
#include "nuctk/error.hpp"
#include "nuctk/version.hpp"

namespace nuctk::cli {

namespace {

const std::vector<std::string> kSubcommands{"fixedj", "schedule", "fit", "noise", "blocks"};

// Expands `--config file.json` into flags placed right after the subcommand,
// so flags given on the command line (parsed later) take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw InvalidArgument("--config needs a file");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    Json cfg;
    try {
        cfg = Json::parse(in);
    } catch (const std::exception& e) {
        throw IoError("malformed config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw IoError("config " + path + " must be a JSON object");

    std::vector<std::string> flags;
    for (const auto& [key, value] : cfg.items()) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        const std::string flag = "--" + name;
        auto scalar = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_boolean()) {
            if (value.get<bool>()) flags.push_back(flag);
        } else if (value.is_array()) {
            flags.push_back(flag);
            for (const auto& v : value) flags.push_back(scalar(v));
        } else if (value.is_null() || value.is_object()) {
            throw InvalidArgument("config key '" + key + "' must be a scalar, boolean or list");
        } else {
            flags.push_back(flag);
            flags.push_back(scalar(value));
        }
    }
    auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) {
        return std::find(kSubcommands.begin(), kSubcommands.end(), a) != kSubcommands.end();
    });
    if (sub == args.end()) throw InvalidArgument("--config needs a subcommand");
    args.insert(sub + 1, flags.begin(), flags.end());
    return args;
}

int fail(Context& ctx, const Json& header, int code, const std::string& kind, const std::string& msg) {
    ctx.err << "nuctk: " << msg << '\n';
    Json doc;
    if (!header.is_null()) doc["header"] = header;
    doc["error"] = error_record(code, kind, msg);
    try {
        emit_json(ctx, doc);
    } catch (const std::exception& e) {
        ctx.err << "nuctk: " << e.what() << '\n';
    }
    return code;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    Context ctx{out, err, {}, {}, 1, {}};
    Json header;

    CLI::App app{"nuctk: fixed-J spectra, block scheduling and derivative-free fitting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    int workers = 0;
    app.add_option("--workers", workers, "Worker threads (0: all hardware threads)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", ctx.out_path, "Report file (default: standard output)");
    app.add_option("--timing", ctx.timing_path, "Timing file (default: <out>.timing.json)");
    std::string config_path;  // consumed by expand_config, listed for --help
    app.add_option("--config", config_path, "JSON file whose keys are flag names");

    FixedjConfig fixedj;
    ScheduleConfig schedule;
    FitConfig fit;
    NoiseConfig noise;
    BlocksConfig blocks;
    add_fixedj(app, fixedj);
    add_schedule(app, schedule);
    add_fit(app, fit);
    add_noise(app, noise);
    add_blocks(app, blocks);

    try {
        auto args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        return fail(ctx, header, kInvalidConfig, "invalid_config", e.what());
    } catch (const Error& e) {
        return fail(ctx, header, kInvalidConfig, "invalid_config", e.what());
    }

    ctx.workers = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        if (sub == "fixedj") return run_fixedj(fixedj, ctx, header);
        if (sub == "schedule") return run_schedule(schedule, ctx, header);
        if (sub == "fit") return run_fit(fit, ctx, header);
        if (sub == "noise") return run_noise(noise, ctx, header);
        return run_blocks(blocks, ctx, header);
    } catch (const InvalidArgument& e) {
        return fail(ctx, header, kInvalidConfig, "invalid_config", e.what());
    } catch (const IoError& e) {
        return fail(ctx, header, kInvalidConfig, "io_error", e.what());
    } catch (const NoStatesWithJ& e) {
        return fail(ctx, header, kNumericalFailure, "no_states", e.what());
    } catch (const NumericalError& e) {
        return fail(ctx, header, kNumericalFailure, "numerical_failure", e.what());
    } catch (const EvaluationError& e) {
        return fail(ctx, header, kNumericalFailure, "evaluator_failure", e.what());
    } catch (const std::exception& e) {
        return fail(ctx, header, 1, "internal_error", e.what());
    }
}

}  // namespace nuctk::cli
