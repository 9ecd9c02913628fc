#include "btcnet/csv.hpp"

#include "btcnet/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace btcnet::csv {

std::string number(double v)
{
    if (!std::isfinite(v))
        throw std::invalid_argument("non-finite value in CSV output");
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string number(const std::optional<double> &v) { return v ? number(*v) : std::string(); }

std::vector<std::string> split(std::string_view line, char sep)
{
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            cells.emplace_back(line.substr(pos));
            return cells;
        }
        cells.emplace_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::optional<double> parse_number(std::string_view cell)
{
    if (cell.empty())
        return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError("malformed number '" + std::string(cell) + "'");
    return v;
}

std::size_t Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw std::out_of_range("missing column '" + std::string(name) + "'");
}

Table read_table(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(path + ": expected " + std::to_string(t.header.size()) + " cells", lineno);
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty())
        throw ParseError(path + ": missing header");
    return t;
}

} // namespace btcnet::csv
