#pragma once

#include "btcnet/ingest.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace btcnet {

/// Missing values are explicit empty optionals, never zeros.
using Series = std::vector<std::optional<double>>;

/// Values aligned with a window grid.
struct IndicatorSeries {
    std::vector<std::string> window_ids;
    Series values;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t undefined_prefix() const noexcept;
};

/// Averaging span of the RPMA denominator. `verbatim` sums the tau + 1 closes
/// P_{t-1-tau} .. P_{t-1} and divides by tau; `tau_terms` is the ordinary
/// tau-term moving average of P_{t-tau} .. P_{t-1}.
enum class RpmaWindow { verbatim, tau_terms };

RpmaWindow parse_rpma_window(const std::string &s);
const char *to_string(RpmaWindow w) noexcept;

/// Default RPMA averaging lengths: 7 days, 4 weeks.
std::size_t default_rpma_tau(Granularity g) noexcept;
/// One year of windows: 365 days, 52 weeks.
std::size_t default_zscore_lookback(Granularity g) noexcept;

/// Close of the last calendar day of each window. Throws std::out_of_range
/// when the price series does not cover a window.
IndicatorSeries window_closes(const PriceSeries &ps, std::span<const Window> windows, Granularity g);

/// Every daily window (or complete Sunday-to-Saturday week) covered by `ps`.
IndicatorSeries window_closes(const PriceSeries &ps, Granularity g);

/// RPMA_t = 100 log10(P_t / mean of trailing closes). Throws std::invalid_argument
/// when the series has no point with enough history.
IndicatorSeries rpma(const IndicatorSeries &closes, std::size_t tau, RpmaWindow window = RpmaWindow::verbatim);
IndicatorSeries rpma(const PriceSeries &ps, Granularity g, RpmaWindow window = RpmaWindow::verbatim);

/// R_t = log10(P_t / P_{t-1}); the first point is undefined.
IndicatorSeries log_returns(const IndicatorSeries &closes);
IndicatorSeries log_returns(const PriceSeries &ps);

/// z_t = (x_t - m_t) / s_t over the `lookback` values strictly before t, with the
/// population standard deviation. Undefined without a full defined lookback or when s_t = 0.
IndicatorSeries rolling_zscore(const IndicatorSeries &xs, std::size_t lookback);

} // namespace btcnet
