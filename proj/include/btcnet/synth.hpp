#pragma once

#include "btcnet/ingest.hpp"
#include "btcnet/rng.hpp"

#include <chrono>
#include <cstdint>
#include <vector>

namespace btcnet {

/// Parameters of the synthetic ledger generator.
///
/// Addresses are grouped into owners (ground-truth users). Each transaction
/// picks a sender address, optionally spends extra addresses of the same
/// owner (multi-input), pays one or two recipients and optionally returns
/// change to a fresh address of the sender's owner. With probability
/// `hub_attachment_weight` senders and recipients are drawn proportionally to
/// past activity, which grows a few high-degree hubs.
struct SynthChainConfig {
    std::size_t n_transactions = 1000;
    std::size_t n_seed_addresses = 100;
    double hub_attachment_weight = 0.5;
    double multi_input_rate = 0.2;
    double change_output_rate = 0.5;
    std::int64_t start_timestamp = 1356998400; // 2013-01-01T00:00:00Z
    std::int64_t span_seconds = 365 * 86400;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on rates outside [0,1] or non-positive counts.
    void validate() const;
};

std::vector<Transaction> generate_synthetic_chain(const SynthChainConfig &cfg);

/// Daily closes following a geometric random walk, one per day from `first`.
PriceSeries generate_synthetic_prices(std::chrono::sys_days first, std::size_t days, std::uint64_t seed,
                                      double start = 100.0, double daily_vol = 0.03);

} // namespace btcnet
