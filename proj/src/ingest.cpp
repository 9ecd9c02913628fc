#include "btcnet/ingest.hpp"

#include "btcnet/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace btcnet {

namespace {

using namespace std::chrono;

template <typename Int> bool parse_int(std::string_view s, Int &out)
{
    if (s.empty())
        return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            parts.push_back(s.substr(pos));
            return parts;
        }
        parts.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

void parse_entries(std::string_view field, std::vector<TxEntry> &out, std::size_t line, const char *what)
{
    if (field.empty())
        throw ParseError(std::string("empty ") + what + " list", line);
    for (auto item : split(field, ',')) {
        auto colon = item.rfind(':');
        if (colon == std::string_view::npos || colon == 0)
            throw ParseError(std::string("malformed ") + what + " entry '" + std::string(item) + "'", line);
        Satoshi value = 0;
        if (!parse_int(item.substr(colon + 1), value))
            throw ParseError(std::string("malformed value in ") + what + " entry '" + std::string(item) + "'", line);
        if (value <= 0)
            throw ParseError(std::string("non-positive value in ") + what + " entry '" + std::string(item) + "'",
                             line);
        out.push_back({std::string(item.substr(0, colon)), value});
    }
}

void write_entries(std::ostream &out, const std::vector<TxEntry> &entries)
{
    bool first = true;
    for (const auto &e : entries) {
        if (!first)
            out << ',';
        first = false;
        out << e.address << ':' << e.value;
    }
}

} // namespace

double PriceSeries::close_on(sys_days day) const
{
    if (points.empty() || day < points.front().date || day > points.back().date)
        throw std::out_of_range("no price for " + format_date(day));
    return points[static_cast<std::size_t>((day - points.front().date).count())].close;
}

const char *to_string(Granularity g) noexcept { return g == Granularity::daily ? "daily" : "weekly"; }

Granularity parse_granularity(const std::string &s)
{
    if (s == "daily")
        return Granularity::daily;
    if (s == "weekly")
        return Granularity::weekly;
    throw std::invalid_argument("unknown granularity '" + s + "'");
}

std::string Window::id() const { return format_date(start); }

sys_days parse_date(const std::string &s)
{
    int y = 0;
    unsigned m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !parse_int(std::string_view(s).substr(0, 4), y) ||
        !parse_int(std::string_view(s).substr(5, 2), m) || !parse_int(std::string_view(s).substr(8, 2), d))
        throw std::invalid_argument("malformed date '" + s + "'");
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok())
        throw std::invalid_argument("invalid date '" + s + "'");
    return sys_days{ymd};
}

std::string format_date(sys_days d)
{
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

sys_days day_of(std::int64_t timestamp) { return floor<days>(sys_seconds{seconds{timestamp}}); }

sys_days window_start(sys_days day, Granularity g)
{
    if (g == Granularity::daily)
        return day;
    return day - days{weekday{day}.c_encoding()}; // c_encoding: Sunday == 0
}

days window_length(Granularity g) { return g == Granularity::daily ? days{1} : days{7}; }

sys_days window_last_day(sys_days start, Granularity g) { return start + window_length(g) - days{1}; }

std::vector<Window> window_partition(std::span<const Transaction> txs, Granularity g)
{
    std::vector<Window> windows;
    if (txs.empty())
        return windows;
    const auto step = window_length(g);
    auto current = window_start(day_of(txs.front().timestamp), g);
    windows.push_back({current, 0, 0});
    for (std::size_t i = 0; i < txs.size(); ++i) {
        const auto start = window_start(day_of(txs[i].timestamp), g);
        if (start < current)
            throw std::invalid_argument("transactions are not timestamp-ordered");
        while (current < start) {
            windows.back().end = i;
            current += step;
            windows.push_back({current, i, i});
        }
    }
    windows.back().end = txs.size();
    return windows;
}

std::vector<Transaction> parse_transaction_log(std::istream &in)
{
    std::vector<Transaction> txs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto fields = split(line, '\t');
        if (fields.size() != 5)
            throw ParseError("expected 5 tab-separated fields, got " + std::to_string(fields.size()), lineno);
        Transaction tx;
        if (!parse_int(fields[0], tx.block_height))
            throw ParseError("malformed block height", lineno);
        if (!parse_int(fields[1], tx.timestamp))
            throw ParseError("malformed timestamp", lineno);
        if (fields[2].empty())
            throw ParseError("empty tx_id", lineno);
        tx.tx_id = std::string(fields[2]);
        if (fields[3] != "-")
            parse_entries(fields[3], tx.inputs, lineno, "input");
        parse_entries(fields[4], tx.outputs, lineno, "output");
        if (!txs.empty() && tx.timestamp < txs.back().timestamp)
            throw ParseError("timestamp regression (" + std::to_string(tx.timestamp) + " < " +
                                 std::to_string(txs.back().timestamp) + ")",
                             lineno);
        txs.push_back(std::move(tx));
    }
    return txs;
}

std::vector<Transaction> read_transaction_log(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open transaction log '" + path + "'");
    return parse_transaction_log(in);
}

void write_transaction_log(std::ostream &out, std::span<const Transaction> txs)
{
    for (const auto &tx : txs) {
        out << tx.block_height << '\t' << tx.timestamp << '\t' << tx.tx_id << '\t';
        if (tx.inputs.empty())
            out << '-';
        else
            write_entries(out, tx.inputs);
        out << '\t';
        write_entries(out, tx.outputs);
        out << '\n';
    }
}

void write_transaction_log(const std::string &path, std::span<const Transaction> txs)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    write_transaction_log(out, txs);
}

PriceSeries parse_price_series(std::istream &in)
{
    PriceSeries ps;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!header) {
            if (line != "date,close")
                throw ParseError("expected header 'date,close'", lineno);
            header = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("expected 'date,close'", lineno);
        PricePoint p;
        try {
            p.date = parse_date(line.substr(0, comma));
        } catch (const std::invalid_argument &e) {
            throw ParseError(e.what(), lineno);
        }
        auto value = std::string_view(line).substr(comma + 1);
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), p.close);
        if (ec != std::errc{} || ptr != value.data() + value.size())
            throw ParseError("malformed close", lineno);
        if (!(p.close > 0.0))
            throw ParseError("non-positive close", lineno);
        if (!ps.points.empty()) {
            auto prev = ps.points.back().date;
            if (p.date == prev)
                throw ParseError("duplicate date " + format_date(p.date), lineno);
            if (p.date < prev)
                throw ParseError("dates not increasing at " + format_date(p.date), lineno);
            if (p.date != prev + days{1})
                throw ParseError("gap in dates between " + format_date(prev) + " and " + format_date(p.date),
                                 lineno);
        }
        ps.points.push_back(p);
    }
    if (!header)
        throw ParseError("missing header 'date,close'");
    return ps;
}

PriceSeries read_price_series(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open price series '" + path + "'");
    return parse_price_series(in);
}

void write_price_series(std::ostream &out, const PriceSeries &ps)
{
    out << "date,close\n";
    char buf[64];
    for (const auto &p : ps.points) {
        auto r = std::to_chars(buf, buf + sizeof buf, p.close);
        out << format_date(p.date) << ',' << std::string_view(buf, r.ptr - buf) << '\n';
    }
}

} // namespace btcnet
