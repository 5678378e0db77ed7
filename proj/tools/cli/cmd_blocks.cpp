#include <filesystem>

#include "commands.hpp"
#include "nuctk/error.hpp"
#include "nuctk/io/matrix_market.hpp"
#include "nuctk/spin/model.hpp"

namespace nuctk::cli {

void add_blocks(CLI::App& app, BlocksConfig& c) {
    auto* s = app.add_subcommand("blocks", "Export the spin model's J^2 and H blocks as Matrix Market files");
    s->fallthrough();
    s->add_option("--n", c.n, "Number of spins");
    s->add_option("--couplings", c.couplings, "Bond couplings (one value is broadcast)");
    s->add_flag("--periodic", c.periodic, "Close the chain into a ring");
    s->add_option("--out-dir", c.out_dir, "Directory for the blocks and manifest.json")->required();
}

int run_blocks(const BlocksConfig& c, Context& ctx, Json& header) {
    std::vector<double> couplings = c.couplings;
    const std::size_t bonds = static_cast<std::size_t>(c.periodic ? c.n : c.n - 1);
    if (couplings.empty()) couplings.assign(bonds, 1.0);
    if (couplings.size() == 1) couplings.assign(bonds, couplings.front());

    Json cfg{{"n", c.n}, {"couplings", couplings}, {"periodic", c.periodic}, {"out_dir", c.out_dir}};
    header = make_header("blocks", 0, cfg);

    Stopwatch sw(ctx);
    const auto h = spin::build_heisenberg_operator(c.n, couplings, c.periodic);
    const auto j = spin::build_jsq_operator(c.n);
    std::filesystem::create_directories(c.out_dir);
    io::Manifest m;
    Json files = Json::array();
    for (std::size_t k = 0; k < j.blocks.size(); ++k) {
        const int tm = j.blocks[k].twice_m;
        const std::string tag = (tm < 0 ? "m" : "p") + std::to_string(std::abs(tm));
        const std::string jf = "jsq_" + tag + ".mtx";
        const std::string hf = "h_" + tag + ".mtx";
        io::write_block(std::filesystem::path(c.out_dir) / jf, j.blocks[k].op);
        io::write_block(std::filesystem::path(c.out_dir) / hf, h.blocks[k].op);
        const Index dim = j.blocks[k].op.dim();
        m.jsq.push_back({spin::block_label(tm), tm, dim, jf});
        m.hamiltonian.push_back({spin::block_label(tm), tm, dim, hf});
        files.push_back({{"twice_m", tm}, {"dim", dim}, {"jsq", jf}, {"hamiltonian", hf}});
    }
    io::write_manifest(std::filesystem::path(c.out_dir) / "manifest.json", m);
    sw.lap("export");

    Json doc;
    doc["header"] = header;
    doc["manifest"] = (std::filesystem::path(c.out_dir) / "manifest.json").string();
    doc["blocks"] = files;
    emit_json(ctx, doc);
    return kOk;
}

}  // namespace nuctk::cli
