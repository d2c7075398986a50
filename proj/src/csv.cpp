#include "lobflow/csv.hpp"

#include "lobflow/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lobflow::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

Table parse(std::string_view text) {
    Table t;
    bool have_header = false;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto cells = split(line);
        if (!have_header) {
            for (auto c : cells) t.header.emplace_back(c);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(ErrorCode::malformed_record, line_no,
                             "expected " + std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
        auto& row = t.rows.emplace_back();
        row.reserve(cells.size());
        for (auto c : cells) row.emplace_back(c);
        t.row_lines.push_back(line_no);
    }
    if (!have_header) throw ParseError(ErrorCode::malformed_record, line_no, "missing CSV header");
    return t;
}

std::optional<std::size_t> Table::find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw ParseError(ErrorCode::malformed_record, 1, "missing column '" + std::string(name) + "'");
}

std::vector<double> Table::numeric(std::string_view name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        out.push_back(to_double(rows[r][c], row_lines[r]).value_or(std::nan("")));
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

std::optional<double> to_double(std::string_view cell, std::size_t line) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError(ErrorCode::malformed_record, line, "not a number: '" + std::string(cell) + "'");
    return v;
}

std::optional<long long> to_int(std::string_view cell, std::size_t line) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError(ErrorCode::malformed_record, line, "not an integer: '" + std::string(cell) + "'");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::invalid_config, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lobflow::csv
