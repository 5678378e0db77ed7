#include "nuctk/io/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "nuctk/error.hpp"

namespace nuctk::io {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Header {
    std::string format;    // coordinate | array
    std::string field;     // real | integer | ...
    std::string symmetry;  // general | symmetric | ...
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty Matrix Market file: " + path.string());
    std::istringstream hs(line);
    std::string banner, object;
    Header h;
    hs >> banner >> object >> h.format >> h.field >> h.symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw IoError("missing Matrix Market banner: " + path.string());
    h.format = lower(h.format);
    h.field = lower(h.field);
    h.symmetry = lower(h.symmetry);
    if (h.field != "real" && h.field != "integer" && h.field != "double")
        throw IoError("unsupported Matrix Market field '" + h.field + "': " + path.string());
    return h;
}

// next non-comment, non-blank line
bool data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        return true;
    }
    return false;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json entries_to_json(const std::vector<ManifestEntry>& entries) {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries)
        arr.push_back({{"label", e.label}, {"twice_m", e.twice_m}, {"dim", e.dim}, {"file", e.file}});
    return arr;
}

std::vector<ManifestEntry> entries_from_json(const nlohmann::json& arr) {
    std::vector<ManifestEntry> out;
    for (const auto& j : arr)
        out.push_back({j.at("label").get<std::string>(), j.at("twice_m").get<int>(),
                       j.at("dim").get<Index>(), j.at("file").get<std::string>()});
    return out;
}

}  // namespace

spectral::SymmetricOperatorBlock read_block(const std::filesystem::path& path, std::string label) {
    auto in = open_in(path);
    const Header h = read_header(in, path);
    if (h.format != "coordinate") throw IoError("expected coordinate format: " + path.string());
    const bool symmetric = h.symmetry == "symmetric";
    if (!symmetric && h.symmetry != "general")
        throw IoError("unsupported symmetry '" + h.symmetry + "': " + path.string());

    std::string line;
    if (!data_line(in, line)) throw IoError("missing size line: " + path.string());
    long long rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz) || rows < 1 || rows != cols || nnz < 0)
            throw IoError("bad size line (need square, nonempty): " + path.string());
    }

    std::map<std::pair<Index, Index>, double> upper;
    std::map<std::pair<Index, Index>, double> lower_part;
    for (long long k = 0; k < nnz; ++k) {
        if (!data_line(in, line))
            throw IoError("expected " + std::to_string(nnz) + " entries, file ended early: " +
                          path.string());
        std::istringstream ss(line);
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(ss >> i >> j >> v)) throw IoError("malformed entry line: " + path.string());
        if (i < 1 || j < 1 || i > rows || j > cols)
            throw IoError("entry index out of range: " + path.string());
        const Index r = static_cast<Index>(i - 1);
        const Index c = static_cast<Index>(j - 1);
        if (symmetric || r == c) {
            const auto key = std::minmax(r, c);
            if (!upper.emplace(std::make_pair(key.first, key.second), v).second)
                throw IoError("duplicate entry: " + path.string());
        } else if (r < c) {
            if (!upper.emplace(std::make_pair(r, c), v).second)
                throw IoError("duplicate entry: " + path.string());
        } else {
            if (!lower_part.emplace(std::make_pair(c, r), v).second)
                throw IoError("duplicate entry: " + path.string());
        }
    }
    if (!symmetric) {
        for (const auto& [key, v] : lower_part) {
            const auto it = upper.find(key);
            const double w = it == upper.end() ? 0.0 : it->second;
            if (std::abs(w - v) > 1e-12 * std::max({1.0, std::abs(v), std::abs(w)}))
                throw IoError("general matrix is not symmetric: " + path.string());
        }
        for (const auto& [key, w] : upper)
            if (key.first != key.second && !lower_part.count(key) && w != 0.0)
                throw IoError("general matrix is not symmetric: " + path.string());
    }
    std::vector<spectral::Entry> entries;
    entries.reserve(upper.size());
    for (const auto& [key, v] : upper) entries.push_back({key.first, key.second, v});
    try {
        return spectral::SymmetricOperatorBlock(static_cast<Index>(rows), std::move(entries),
                                                std::move(label));
    } catch (const InvalidArgument& e) {
        throw IoError(std::string(e.what()) + ": " + path.string());
    }
}

void write_block(const std::filesystem::path& path, const spectral::SymmetricOperatorBlock& block) {
    auto out = open_out(path);
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    if (!block.label().empty()) out << "% " << block.label() << "\n";
    out << block.dim() << ' ' << block.dim() << ' ' << block.entries().size() << '\n';
    // stored upper (r <= c) becomes lower (c, r) in the file
    for (const auto& e : block.entries())
        out << e.col + 1 << ' ' << e.row + 1 << ' ' << fmt_double(e.value) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void write_dense(const std::filesystem::path& path, const Matrix& m) {
    auto out = open_out(path);
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) out << fmt_double(m(i, j)) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_dense(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, path);
    if (h.format != "array" || h.symmetry != "general")
        throw IoError("expected array real general: " + path.string());
    std::string line;
    if (!data_line(in, line)) throw IoError("missing size line: " + path.string());
    long long rows = 0, cols = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> rows >> cols) || rows < 0 || cols < 0)
            throw IoError("bad size line: " + path.string());
    }
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            if (!data_line(in, line)) throw IoError("file ended early: " + path.string());
            std::istringstream ss(line);
            if (!(ss >> m(i, j))) throw IoError("malformed value: " + path.string());
        }
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    nlohmann::json j;
    j["schema"] = "nuctk.manifest/1";
    j["jsq"] = entries_to_json(manifest.jsq);
    j["hamiltonian"] = entries_to_json(manifest.hamiltonian);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.value("schema", "") != "nuctk.manifest/1")
            throw IoError("unknown manifest schema: " + path.string());
        Manifest m;
        m.jsq = entries_from_json(j.at("jsq"));
        if (j.contains("hamiltonian")) m.hamiltonian = entries_from_json(j.at("hamiltonian"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest " + path.string() + ": " + e.what());
    }
}

}  // namespace nuctk::io
