#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lobflow::csv {

// Minimal reader for the plain comma-separated artifacts this project
// writes: no quoting, '#' comment lines, first non-comment line is the header.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based source line of each row

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
    [[nodiscard]] std::size_t column(std::string_view name) const;  // throws MalformedRecord
    [[nodiscard]] std::vector<double> numeric(std::string_view name) const;
};

Table parse(std::string_view text);

std::vector<std::string_view> split(std::string_view line);

// Round-trippable decimal; NaN and empty optionals print as "".
std::string fmt(double v);
std::string fmt(const std::optional<double>& v);

// Empty cell -> nullopt; anything unparseable throws MalformedRecord.
std::optional<double> to_double(std::string_view cell, std::size_t line = 0);
std::optional<long long> to_int(std::string_view cell, std::size_t line = 0);

std::string read_file(const std::string& path);

}  // namespace lobflow::csv
