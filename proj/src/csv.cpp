#include "adpp/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

#include "adpp/errors.hpp"

namespace adpp::csv {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

Writer::Writer(const std::string& path, const std::string& comment, const std::vector<std::string>& columns)
    : path_(path), width_(columns.size()) {
    f_ = std::fopen(path.c_str(), "w");
    if (!f_) throw Error("cannot write " + path);
    std::fprintf(f_, "# %s\n", comment.c_str());
    row(columns);
}

Writer::~Writer() {
    if (f_) std::fclose(f_);
}

void Writer::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw DimensionError(path_ + ": row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) std::fputc(',', f_);
        std::fputs(cells[i].c_str(), f_);
    }
    std::fputc('\n', f_);
}

void Writer::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(num(v));
    row(cells);
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw Error("missing column \"" + name + "\"");
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing input file " + path + " (run the producing subcommand first)");
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        auto cells = split(line);
        if (t.columns.empty()) {
            t.columns = std::move(cells);
            continue;
        }
        if (cells.size() != t.columns.size()) {
            throw Error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                        " cells, found " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.columns.empty()) throw Error(path + ": no header row");
    return t;
}

double to_double(const std::string& cell) {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) throw Error("not a number: \"" + cell + "\"");
    return x;
}

}  // namespace adpp::csv
