#include "youngbsde/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "youngbsde/errors.hpp"

namespace ybsde {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_path_csv(std::ostream& out, const DiscretePath& path) {
    out << 't';
    for (std::size_t c = 0; c < path.dim(); ++c) out << ",x" << (c + 1);
    out << '\n';
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << format_double(path.grid()[i]);
        for (double v : path.node(i)) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_path_csv(const std::filesystem::path& file, const DiscretePath& path) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + file.string() + " for writing");
    write_path_csv(out, path);
}

namespace {

double parse_number(const std::string& cell, std::size_t line) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = cell.data() + cell.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        throw ValidationError("line " + std::to_string(line) + ": cannot parse number '" + cell + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

DiscretePath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty path CSV");
    const auto header = split(line);
    if (header.size() < 2 || (header[0] != "t" && header[0] != "t\r")) {
        throw ValidationError("path CSV header must be t,x1,...,xd");
    }
    const std::size_t dim = header.size() - 1;
    std::vector<double> times;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != dim + 1) {
            throw ValidationError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                                  " columns, got " + std::to_string(cells.size()));
        }
        times.push_back(parse_number(cells[0], lineno));
        for (std::size_t c = 1; c <= dim; ++c) values.push_back(parse_number(cells[c], lineno));
    }
    return DiscretePath(TimeGrid(std::move(times)), std::move(values), dim);
}

DiscretePath read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + file.string());
    return read_path_csv(in);
}

void write_table_csv(std::ostream& out, std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
}

void write_table_csv(const std::filesystem::path& file, std::span<const std::string> header,
                     const std::vector<std::vector<double>>& rows) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + file.string() + " for writing");
    write_table_csv(out, header, rows);
}

}  // namespace ybsde
