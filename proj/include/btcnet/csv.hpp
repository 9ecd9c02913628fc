#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace btcnet::csv {

/// Shortest round-trip decimal representation.
std::string number(double v);
/// Empty string for missing values.
std::string number(const std::optional<double> &v);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Parses a cell written by number(); empty cells are missing.
std::optional<double> parse_number(std::string_view cell);

/// Simple in-memory table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws std::out_of_range if absent.
    std::size_t column(std::string_view name) const;
};

Table read_table(const std::string &path);

} // namespace btcnet::csv
