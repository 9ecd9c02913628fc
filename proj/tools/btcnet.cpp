#include "btcnet/error.hpp"
#include "btcnet/pipeline.hpp"
#include "btcnet/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int exit_usage = 2;
constexpr int exit_data = 3;

struct StageOptions {
    std::string config;
    std::vector<std::string> granularities;
    std::vector<std::string> representations;
    std::vector<std::string> periods;
    std::string seed;
    std::string out;
    std::string txlog;
    std::string prices;
    std::string clustermap;
    std::vector<std::string> overrides;
};

void add_stage_options(CLI::App *cmd, StageOptions &o)
{
    cmd->add_option("--config", o.config, "key = value config file");
    cmd->add_option("--granularity", o.granularities, "daily and/or weekly")->delimiter(',');
    cmd->add_option("--repr", o.representations, "an and/or un")->delimiter(',');
    cmd->add_option("--period", o.periods, "YYYY-MM-DD:YYYY-MM-DD, repeatable");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--txlog", o.txlog, "transaction log");
    cmd->add_option("--prices", o.prices, "daily close CSV");
    cmd->add_option("--clustermap", o.clustermap, "cluster map to use instead of the computed one");
    cmd->add_option("--set", o.overrides, "extra key=value setting, repeatable");
}

btcnet::PipelineConfig make_config(const StageOptions &o)
{
    auto cfg = o.config.empty() ? btcnet::PipelineConfig{} : btcnet::PipelineConfig::load(o.config);
    auto join = [](const std::vector<std::string> &v) {
        std::string s;
        for (const auto &x : v)
            s += (s.empty() ? "" : ",") + x;
        return s;
    };
    if (!o.granularities.empty())
        cfg.set("granularities", join(o.granularities));
    if (!o.representations.empty())
        cfg.set("representations", join(o.representations));
    if (!o.periods.empty())
        cfg.set("periods", join(o.periods));
    for (auto [key, value] : {std::pair{"seed", o.seed}, {"out", o.out}, {"txlog", o.txlog},
                              {"prices", o.prices}, {"clustermap", o.clustermap}})
        if (!value.empty())
            cfg.set(key, value);
    for (const auto &kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw btcnet::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

struct SynthOptions {
    btcnet::SynthChainConfig chain;
    std::size_t days = 365;
    std::string out = "synth";
};

int run_synth(const SynthOptions &o)
{
    auto chain = o.chain;
    chain.span_seconds = static_cast<std::int64_t>(o.days) * 86400;
    chain.validate();
    const auto txs = btcnet::generate_synthetic_chain(chain);
    std::filesystem::create_directories(o.out);
    btcnet::write_transaction_log((std::filesystem::path(o.out) / "chain.txlog").string(), txs);
    const auto first = btcnet::day_of(chain.start_timestamp);
    const auto prices = btcnet::generate_synthetic_prices(first, o.days + 7, chain.seed);
    std::ofstream p(std::filesystem::path(o.out) / "prices.csv", std::ios::binary);
    btcnet::write_price_series(p, prices);
    std::cout << "wrote " << txs.size() << " transactions and " << prices.points.size() << " closes to " << o.out
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Transaction-network statistics and causality tests for a UTXO ledger"};
    app.require_subcommand(1);

    StageOptions stage_opts;
    std::vector<std::pair<CLI::App *, btcnet::Stage>> stage_cmds;
    for (auto stage : {btcnet::Stage::ingest, btcnet::Stage::cluster, btcnet::Stage::build, btcnet::Stage::stats,
                       btcnet::Stage::indicators, btcnet::Stage::causality, btcnet::Stage::all}) {
        auto *cmd = app.add_subcommand(btcnet::to_string(stage),
                                       stage == btcnet::Stage::all ? "run every stage in order"
                                                                   : std::string("run the ") +
                                                                         btcnet::to_string(stage) + " stage");
        add_stage_options(cmd, stage_opts);
        stage_cmds.emplace_back(cmd, stage);
    }
    bool echo = false;
    app.add_flag("--echo-config", echo, "print the effective configuration before running");

    SynthOptions synth;
    auto *synth_cmd = app.add_subcommand("synth", "write a synthetic ledger and price series");
    synth_cmd->add_option("--transactions", synth.chain.n_transactions);
    synth_cmd->add_option("--seed-addresses", synth.chain.n_seed_addresses);
    synth_cmd->add_option("--hub", synth.chain.hub_attachment_weight);
    synth_cmd->add_option("--multi-input", synth.chain.multi_input_rate);
    synth_cmd->add_option("--change", synth.chain.change_output_rate);
    synth_cmd->add_option("--start", synth.chain.start_timestamp, "first timestamp (unix seconds)");
    synth_cmd->add_option("--days", synth.days, "span in days");
    synth_cmd->add_option("--seed", synth.chain.seed);
    synth_cmd->add_option("--out", synth.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (synth_cmd->parsed())
            return run_synth(synth);
        for (auto [cmd, stage] : stage_cmds) {
            if (!cmd->parsed())
                continue;
            const auto cfg = make_config(stage_opts);
            if (echo)
                std::cout << cfg.echo();
            btcnet::run_stage(cfg, stage);
        }
    } catch (const btcnet::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_data;
    }
    return 0;
}
