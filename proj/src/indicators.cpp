#include "btcnet/indicators.hpp"

#include <cmath>
#include <stdexcept>

namespace btcnet {

std::size_t IndicatorSeries::undefined_prefix() const noexcept
{
    std::size_t k = 0;
    while (k < values.size() && !values[k])
        ++k;
    return k;
}

RpmaWindow parse_rpma_window(const std::string &s)
{
    if (s == "verbatim")
        return RpmaWindow::verbatim;
    if (s == "tau_terms")
        return RpmaWindow::tau_terms;
    throw std::invalid_argument("unknown rpma_window '" + s + "'");
}

const char *to_string(RpmaWindow w) noexcept { return w == RpmaWindow::verbatim ? "verbatim" : "tau_terms"; }

std::size_t default_rpma_tau(Granularity g) noexcept { return g == Granularity::daily ? 7 : 4; }

std::size_t default_zscore_lookback(Granularity g) noexcept { return g == Granularity::daily ? 365 : 52; }

IndicatorSeries window_closes(const PriceSeries &ps, std::span<const Window> windows, Granularity g)
{
    IndicatorSeries out;
    out.window_ids.reserve(windows.size());
    out.values.reserve(windows.size());
    for (const auto &w : windows) {
        out.window_ids.push_back(w.id());
        out.values.push_back(ps.close_on(window_last_day(w.start, g)));
    }
    return out;
}

IndicatorSeries window_closes(const PriceSeries &ps, Granularity g)
{
    IndicatorSeries out;
    if (ps.empty())
        return out;
    const auto first = ps.points.front().date;
    const auto last = ps.points.back().date;
    auto start = window_start(first, g);
    if (start < first)
        start += window_length(g);
    for (; window_last_day(start, g) <= last; start += window_length(g)) {
        out.window_ids.push_back(format_date(start));
        out.values.push_back(ps.close_on(window_last_day(start, g)));
    }
    return out;
}

IndicatorSeries rpma(const IndicatorSeries &closes, std::size_t tau, RpmaWindow window)
{
    if (tau == 0)
        throw std::invalid_argument("rpma needs tau >= 1");
    const std::size_t terms = window == RpmaWindow::verbatim ? tau + 1 : tau;
    if (closes.size() <= terms)
        throw std::invalid_argument("rpma needs more than " + std::to_string(terms) + " closes, got " +
                                    std::to_string(closes.size()));
    IndicatorSeries out{closes.window_ids, Series(closes.size())};
    for (std::size_t t = terms; t < closes.size(); ++t) {
        if (!closes.values[t])
            continue;
        double sum = 0.0;
        bool complete = true;
        for (std::size_t s = t - terms; s < t; ++s) {
            if (!closes.values[s]) {
                complete = false;
                break;
            }
            sum += *closes.values[s];
        }
        if (complete)
            out.values[t] = 100.0 * std::log10(*closes.values[t] / (sum / static_cast<double>(tau)));
    }
    return out;
}

IndicatorSeries rpma(const PriceSeries &ps, Granularity g, RpmaWindow window)
{
    return rpma(window_closes(ps, g), default_rpma_tau(g), window);
}

IndicatorSeries log_returns(const IndicatorSeries &closes)
{
    IndicatorSeries out{closes.window_ids, Series(closes.size())};
    for (std::size_t t = 1; t < closes.size(); ++t) {
        const auto &prev = closes.values[t - 1];
        const auto &cur = closes.values[t];
        if (prev && cur) {
            if (!(*prev > 0.0) || !(*cur > 0.0))
                throw std::invalid_argument("log returns need positive prices");
            out.values[t] = std::log10(*cur / *prev);
        }
    }
    return out;
}

IndicatorSeries log_returns(const PriceSeries &ps) { return log_returns(window_closes(ps, Granularity::daily)); }

IndicatorSeries rolling_zscore(const IndicatorSeries &xs, std::size_t lookback)
{
    if (lookback < 2)
        throw std::invalid_argument("rolling z-score needs lookback >= 2");
    IndicatorSeries out{xs.window_ids, Series(xs.size())};
    for (std::size_t t = lookback; t < xs.size(); ++t) {
        if (!xs.values[t])
            continue;
        double sum = 0.0;
        bool complete = true;
        bool constant = true;
        for (std::size_t s = t - lookback; s < t && complete; ++s) {
            if (xs.values[s]) {
                sum += *xs.values[s];
                constant = constant && *xs.values[s] == *xs.values[t - lookback];
            } else {
                complete = false;
            }
        }
        // Exactly constant history has s_t = 0; rounding in the mean must not hide that.
        if (!complete || constant)
            continue;
        const double mean = sum / static_cast<double>(lookback);
        double ss = 0.0;
        for (std::size_t s = t - lookback; s < t; ++s) {
            const double d = *xs.values[s] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(lookback));
        if (sd > 0.0)
            out.values[t] = (*xs.values[t] - mean) / sd;
    }
    return out;
}

} // namespace btcnet
