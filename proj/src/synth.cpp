#include "btcnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace btcnet {

namespace {

constexpr double coinbase_rate = 0.02;
constexpr double second_recipient_rate = 0.2;
constexpr double fresh_recipient_rate = 0.5;

class LedgerState {
  public:
    explicit LedgerState(std::uint64_t seed) : rng_(seed) {}

    std::uint32_t new_owner() { return owners_++; }

    std::uint32_t new_address(std::uint32_t owner)
    {
        const auto idx = static_cast<std::uint32_t>(owner_of_.size());
        owner_of_.push_back(owner);
        if (owner >= wallets_.size())
            wallets_.resize(owner + 1);
        wallets_[owner].push_back(idx);
        return idx;
    }

    std::uint32_t fresh_address() { return new_address(new_owner()); }

    /// Draws an existing address, proportional to past activity with probability `hub_weight`.
    std::uint32_t pick(double hub_weight)
    {
        if (!urn_.empty() && chance(hub_weight))
            return urn_[uniform(urn_.size())];
        return static_cast<std::uint32_t>(uniform(owner_of_.size()));
    }

    void touch(std::uint32_t addr) { urn_.push_back(addr); }

    const std::vector<std::uint32_t> &wallet_of(std::uint32_t addr) const { return wallets_[owner_of_[addr]]; }
    std::uint32_t owner_of(std::uint32_t addr) const { return owner_of_[addr]; }
    std::size_t address_count() const { return owner_of_.size(); }

    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    std::size_t uniform(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    Satoshi amount(Satoshi lo, Satoshi hi) { return std::uniform_int_distribution<Satoshi>(lo, hi)(rng_); }

  private:
    Rng rng_;
    std::uint32_t owners_ = 0;
    std::vector<std::uint32_t> owner_of_;
    std::vector<std::vector<std::uint32_t>> wallets_;
    std::vector<std::uint32_t> urn_;
};

std::string address_name(std::uint32_t idx) { return "addr" + std::to_string(idx); }

} // namespace

void SynthChainConfig::validate() const
{
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(hub_attachment_weight) || !rate_ok(multi_input_rate) || !rate_ok(change_output_rate))
        throw std::invalid_argument("synthetic chain rates must lie in [0,1]");
    if (n_seed_addresses == 0)
        throw std::invalid_argument("n_seed_addresses must be positive");
    if (span_seconds <= 0)
        throw std::invalid_argument("span_seconds must be positive");
}

std::vector<Transaction> generate_synthetic_chain(const SynthChainConfig &cfg)
{
    cfg.validate();
    std::vector<Transaction> txs;
    txs.reserve(cfg.n_transactions);
    LedgerState state(cfg.seed);
    for (std::size_t i = 0; i < cfg.n_seed_addresses; ++i)
        state.fresh_address();

    constexpr Satoshi min_input = 100'000;
    constexpr Satoshi max_input = 1'000'000'000;

    for (std::size_t i = 0; i < cfg.n_transactions; ++i) {
        Transaction tx;
        tx.tx_id = "tx" + std::to_string(i);
        // Integer arithmetic keeps timestamps non-decreasing and reproducible.
        const auto offset = static_cast<std::int64_t>((static_cast<__int128>(i) * cfg.span_seconds) /
                                                      static_cast<__int128>(cfg.n_transactions));
        tx.timestamp = cfg.start_timestamp + offset;
        tx.block_height = static_cast<std::uint64_t>(offset / 600);

        if (state.chance(coinbase_rate)) {
            const auto miner = state.fresh_address();
            state.touch(miner);
            tx.outputs.push_back({address_name(miner), 5'000'000'000});
            txs.push_back(std::move(tx));
            continue;
        }

        const auto sender = state.pick(cfg.hub_attachment_weight);
        std::vector<std::uint32_t> inputs{sender};
        if (state.chance(cfg.multi_input_rate)) {
            const auto &wallet = state.wallet_of(sender);
            const std::size_t extra = 1 + state.uniform(2);
            for (std::size_t k = 0; k < extra && inputs.size() < wallet.size(); ++k) {
                const auto cand = wallet[state.uniform(wallet.size())];
                if (std::find(inputs.begin(), inputs.end(), cand) == inputs.end())
                    inputs.push_back(cand);
            }
        }
        Satoshi smallest = max_input;
        for (auto a : inputs) {
            const auto v = state.amount(min_input, max_input);
            smallest = std::min(smallest, v);
            tx.inputs.push_back({address_name(a), v});
            state.touch(a);
        }

        const std::size_t n_recipients = state.chance(second_recipient_rate) ? 2 : 1;
        for (std::size_t k = 0; k < n_recipients; ++k) {
            std::uint32_t to;
            if (state.chance(cfg.hub_attachment_weight))
                to = state.pick(1.0);
            else if (state.chance(fresh_recipient_rate))
                to = state.fresh_address();
            else
                to = state.pick(0.0);
            if (state.owner_of(to) == state.owner_of(sender))
                to = state.fresh_address();
            tx.outputs.push_back({address_name(to), state.amount(1, max_input)});
            state.touch(to);
        }
        if (state.chance(cfg.change_output_rate)) {
            const auto change = state.new_address(state.owner_of(sender));
            tx.outputs.push_back({address_name(change), state.amount(1, smallest - 1)});
        }
        txs.push_back(std::move(tx));
    }
    return txs;
}

PriceSeries generate_synthetic_prices(std::chrono::sys_days first, std::size_t days, std::uint64_t seed,
                                      double start, double daily_vol)
{
    if (days == 0 || !(start > 0.0) || !(daily_vol >= 0.0))
        throw std::invalid_argument("synthetic prices need days > 0, start > 0 and daily_vol >= 0");
    Rng rng(derive_seed(seed, "synthetic-prices", 0));
    std::normal_distribution<double> step(0.0, daily_vol);
    PriceSeries ps;
    double log_price = std::log(start);
    for (std::size_t i = 0; i < days; ++i) {
        ps.points.push_back({first + std::chrono::days(i), std::exp(log_price)});
        log_price += step(rng);
    }
    return ps;
}

} // namespace btcnet
