#include "nuctk/dfo/history.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "nuctk/error.hpp"

namespace nuctk::dfo {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse(const std::string& cell, const std::filesystem::path& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() && cell.find_first_not_of(" \t\r", used) != std::string::npos)
            throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in " + path.string());
    }
}

}  // namespace

void write_history(const std::filesystem::path& path, const std::vector<EvaluationRecord>& records,
                   Index n, Index o, const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (!comment.empty()) out << "# " << comment << '\n';
    for (Index j = 0; j < n; ++j) out << 'x' << j << ',';
    for (Index i = 0; i < o; ++i) out << 'r' << i << ',';
    out << "f\n";
    char buf[32];
    for (const auto& rec : records) {
        if (rec.x.size() != n || rec.r.size() != o) throw InvalidArgument("record shape mismatch");
        for (Index j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", rec.x(j));
            out << buf << ',';
        }
        for (Index i = 0; i < o; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", rec.r(i));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", rec.f);
        out << buf << '\n';
    }
}

std::vector<EvaluationRecord> read_history(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    bool got = false;
    while ((got = static_cast<bool>(std::getline(in, line))) && !line.empty() && line[0] == '#') {
    }
    if (!got) throw IoError("empty history file " + path.string());
    const auto header = split(line);
    Index n = 0;
    Index o = 0;
    for (const auto& h : header) {
        if (!h.empty() && h[0] == 'x') ++n;
        else if (!h.empty() && h[0] == 'r') ++o;
    }
    if (header.empty() || header.back() != "f" || static_cast<Index>(header.size()) != n + o + 1 ||
        n == 0 || o == 0)
        throw IoError("history header must be x0..,r0..,f in " + path.string());

    std::vector<EvaluationRecord> out;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (static_cast<Index>(cells.size()) != n + o + 1)
            throw IoError("wrong column count in " + path.string());
        EvaluationRecord rec;
        rec.index = static_cast<Index>(out.size());
        rec.x.resize(n);
        rec.r.resize(o);
        for (Index j = 0; j < n; ++j) rec.x(j) = parse(cells[static_cast<std::size_t>(j)], path);
        for (Index i = 0; i < o; ++i) rec.r(i) = parse(cells[static_cast<std::size_t>(n + i)], path);
        rec.f = parse(cells.back(), path);
        const double f = rec.r.squaredNorm();
        if (std::abs(f - rec.f) > 1e-12 * std::max(1.0, f))
            throw IoError("stored f does not match residuals in " + path.string());
        rec.f = f;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace nuctk::dfo
