#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace btcnet {

/// Amount in satoshi (1e-8 BTC).
using Satoshi = std::int64_t;

struct TxEntry {
    std::string address;
    Satoshi value = 0;

    friend bool operator==(const TxEntry &, const TxEntry &) = default;
};

/// One ledger record. An empty input list marks a coinbase transaction.
struct Transaction {
    std::string tx_id;
    std::uint64_t block_height = 0;
    std::int64_t timestamp = 0; ///< UTC seconds
    std::vector<TxEntry> inputs;
    std::vector<TxEntry> outputs;

    bool is_coinbase() const noexcept { return inputs.empty(); }

    friend bool operator==(const Transaction &, const Transaction &) = default;
};

struct PricePoint {
    std::chrono::sys_days date;
    double close = 0.0;

    friend bool operator==(const PricePoint &, const PricePoint &) = default;
};

/// Daily closing prices on a contiguous run of UTC days.
struct PriceSeries {
    std::vector<PricePoint> points;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    /// Close for `day`; throws std::out_of_range if the day is not covered.
    double close_on(std::chrono::sys_days day) const;
};

enum class Granularity { daily, weekly };

const char *to_string(Granularity g) noexcept;
Granularity parse_granularity(const std::string &s);

/// A time window and the half-open range [begin, end) of transactions it holds.
struct Window {
    std::chrono::sys_days start;
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return begin == end; }
    /// ISO date of the first day, used as the window identifier.
    std::string id() const;
    friend bool operator==(const Window &, const Window &) = default;
};

/// Parses the tab-separated TXLOG format (one transaction per line).
std::vector<Transaction> parse_transaction_log(std::istream &in);
std::vector<Transaction> read_transaction_log(const std::string &path);

/// Writes transactions in TXLOG format; inverse of parse_transaction_log.
void write_transaction_log(std::ostream &out, std::span<const Transaction> txs);
void write_transaction_log(const std::string &path, std::span<const Transaction> txs);

/// Parses a `date,close` CSV with a header row.
PriceSeries parse_price_series(std::istream &in);
PriceSeries read_price_series(const std::string &path);
void write_price_series(std::ostream &out, const PriceSeries &ps);

std::chrono::sys_days parse_date(const std::string &s);
std::string format_date(std::chrono::sys_days d);
std::chrono::sys_days day_of(std::int64_t timestamp);

/// First day of the window containing `day` (weekly windows start on Sunday).
std::chrono::sys_days window_start(std::chrono::sys_days day, Granularity g);
std::chrono::days window_length(Granularity g);
/// Last calendar day covered by the window that starts at `start`.
std::chrono::sys_days window_last_day(std::chrono::sys_days start, Granularity g);

/// Splits timestamp-ordered transactions into consecutive daily or weekly windows,
/// including empty windows inside the covered span.
std::vector<Window> window_partition(std::span<const Transaction> txs, Granularity g);

} // namespace btcnet
