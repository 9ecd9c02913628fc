#include "btcnet/error.hpp"
#include "btcnet/ingest.hpp"
#include "btcnet/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace btcnet;
using namespace std::chrono;

namespace {

std::vector<Transaction> parse(const std::string &text)
{
    std::istringstream in(text);
    return parse_transaction_log(in);
}

PriceSeries parse_prices(const std::string &text)
{
    std::istringstream in(text);
    return parse_price_series(in);
}

std::size_t error_line(const std::string &text)
{
    try {
        parse(text);
    } catch (const ParseError &e) {
        return e.line();
    }
    return 0;
}

Transaction tx_at(std::int64_t ts, std::string id)
{
    return {std::move(id), 0, ts, {{"a", 10}}, {{"b", 5}}};
}

} // namespace

TEST_CASE("single well-formed record")
{
    const auto txs = parse("100\t1357000000\ttx1\ta:500\tb:400\n");
    REQUIRE(txs.size() == 1);
    CHECK(txs[0].block_height == 100);
    CHECK(txs[0].timestamp == 1357000000);
    CHECK(txs[0].tx_id == "tx1");
    CHECK(txs[0].inputs == std::vector<TxEntry>{{"a", 500}});
    CHECK(txs[0].outputs == std::vector<TxEntry>{{"b", 400}});
}

TEST_CASE("coinbase and multi-entry lists")
{
    const auto txs = parse("1\t10\tcb\t-\tm:5000000000\n2\t20\tt\tm:3,x:4\ty:1,z:2,w:3\n");
    REQUIRE(txs.size() == 2);
    CHECK(txs[0].is_coinbase());
    CHECK_FALSE(txs[1].is_coinbase());
    CHECK(txs[1].inputs.size() == 2);
    CHECK(txs[1].outputs.size() == 3);
}

TEST_CASE("malformed records report their line")
{
    CHECK(error_line("1\t10\tok\ta:1\tb:1\n2\t20\tbad\ta:1\n") == 2);
    CHECK(error_line("1\t10\tt\ta:1\t-\n") == 1);
    CHECK(error_line("1\t10\tt\ta:0\tb:1\n") == 1);
    CHECK(error_line("1\t10\tt\ta:1\tb:-3\n") == 1);
    CHECK(error_line("1\t10\tt\ta:x\tb:1\n") == 1);
    CHECK(error_line("1\t10\tt\ta1\tb:1\n") == 1);
    CHECK(error_line("x\t10\tt\ta:1\tb:1\n") == 1);
}

TEST_CASE("timestamp regression is rejected, ties are allowed")
{
    CHECK(error_line("1\t20\tt1\ta:1\tb:1\n1\t10\tt2\ta:1\tb:1\n") == 2);
    CHECK(parse("1\t20\tt1\ta:1\tb:1\n2\t20\tt2\ta:1\tb:1\n").size() == 2);
}

TEST_CASE("addresses may contain colons")
{
    const auto txs = parse("1\t10\tt\tbc1:q:x:7\ty:8\n");
    CHECK(txs[0].inputs[0].address == "bc1:q:x");
    CHECK(txs[0].inputs[0].value == 7);
}

TEST_CASE("TXLOG round trip on synthetic chains")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthChainConfig cfg;
        cfg.n_transactions = 300;
        cfg.seed = seed;
        const auto txs = generate_synthetic_chain(cfg);
        std::ostringstream out;
        write_transaction_log(out, txs);
        std::istringstream in(out.str());
        CHECK(parse_transaction_log(in) == txs);
    }
}

TEST_CASE("price series parsing")
{
    const auto ps = parse_prices("date,close\n2013-01-01,13.3\n2013-01-02,13.28\n2013-01-03,13.4\n");
    REQUIRE(ps.size() == 3);
    CHECK(ps.points[1].close == doctest::Approx(13.28));
    CHECK(ps.close_on(parse_date("2013-01-03")) == doctest::Approx(13.4));
    CHECK_THROWS_AS(ps.close_on(parse_date("2013-01-04")), std::out_of_range);

    CHECK_THROWS_AS(parse_prices("date,close\n2013-01-01,1\n2013-01-02,0\n"), ParseError);
    CHECK_THROWS_AS(parse_prices("date,close\n2013-01-01,1\n2013-01-03,2\n"), ParseError);
    CHECK_THROWS_AS(parse_prices("date,close\n2013-01-01,1\n2013-01-01,2\n"), ParseError);
    CHECK_THROWS_AS(parse_prices("date,close\n2013-01-02,1\n2013-01-01,2\n"), ParseError);
    CHECK_THROWS_AS(parse_prices("2013-01-01,1\n"), ParseError);
    CHECK_THROWS_AS(parse_prices("date,close\n2013-01-01,-4\n"), ParseError);
}

TEST_CASE("price series round trip")
{
    const auto ps = generate_synthetic_prices(parse_date("2014-02-27"), 40, 3);
    std::ostringstream out;
    write_price_series(out, ps);
    CHECK(parse_prices(out.str()).points == ps.points);
}

TEST_CASE("dates agree with a day-counting calendar")
{
    std::mt19937 rng(5);
    for (int i = 0; i < 500; ++i) {
        const int y = std::uniform_int_distribution<int>(1970, 2040)(rng);
        const int m = std::uniform_int_distribution<int>(1, 12)(rng);
        const int d = std::uniform_int_distribution<int>(1, 28)(rng);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
        const auto day = parse_date(buf);
        const long n = oracle::days_from_civil(y, m, d);
        CHECK(day.time_since_epoch().count() == n);
        CHECK(format_date(day) == buf);
        const auto week = window_start(day, Granularity::weekly);
        CHECK(week.time_since_epoch().count() == n - oracle::weekday(n));
        CHECK(oracle::weekday(week.time_since_epoch().count()) == 0);
        CHECK(window_start(day, Granularity::daily) == day);
    }
    CHECK_THROWS(parse_date("2013-02-30"));
    CHECK_THROWS(parse_date("2013-1-5"));
}

TEST_CASE("a Monday falls in the week starting the previous Sunday")
{
    const auto monday = parse_date("2013-01-14");
    Transaction tx = tx_at(duration_cast<seconds>(sys_days(monday).time_since_epoch()).count() + 3600, "t");
    const auto w = window_partition(std::vector{tx}, Granularity::weekly);
    REQUIRE(w.size() == 1);
    CHECK(w[0].id() == "2013-01-13");
    CHECK(w[0].size() == 1);
}

TEST_CASE("window partition basics")
{
    CHECK(window_partition(std::vector<Transaction>{}, Granularity::daily).empty());
    const std::int64_t day0 = 1357000000 - 1357000000 % 86400;
    const auto w = window_partition(std::vector{tx_at(day0 + 10, "a"), tx_at(day0 + 86400 + 10, "b")},
                                    Granularity::daily);
    REQUIRE(w.size() == 2);
    CHECK(w[0].size() == 1);
    CHECK(w[1].size() == 1);

    const auto gap = window_partition(std::vector{tx_at(day0, "a"), tx_at(day0 + 3 * 86400, "b")}, Granularity::daily);
    REQUIRE(gap.size() == 4);
    CHECK(gap[1].empty());
    CHECK(gap[2].empty());
}

TEST_CASE("window partition is a partition on random chains")
{
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Transaction> txs;
        std::int64_t ts = 1300000000 + static_cast<std::int64_t>(rng() % 1000000);
        const int n = static_cast<int>(rng() % 200);
        for (int i = 0; i < n; ++i) {
            ts += static_cast<std::int64_t>(rng() % (rep % 2 ? 200000 : 20000));
            txs.push_back(tx_at(ts, "t" + std::to_string(i)));
        }
        for (auto g : {Granularity::daily, Granularity::weekly}) {
            const auto ws = window_partition(txs, g);
            std::size_t next = 0;
            for (std::size_t k = 0; k < ws.size(); ++k) {
                CHECK(ws[k].begin == next);
                next = ws[k].end;
                if (k)
                    CHECK(ws[k].start == ws[k - 1].start + window_length(g));
                for (std::size_t i = ws[k].begin; i < ws[k].end; ++i)
                    CHECK(window_start(day_of(txs[i].timestamp), g) == ws[k].start);
            }
            CHECK(next == txs.size());
            if (!ws.empty()) {
                CHECK_FALSE(ws.front().empty());
                CHECK_FALSE(ws.back().empty());
            }
        }
    }
}

TEST_CASE("synthetic chains are deterministic and valid")
{
    SynthChainConfig cfg;
    cfg.n_transactions = 2000;
    cfg.seed = 7;
    std::ostringstream a, b;
    write_transaction_log(a, generate_synthetic_chain(cfg));
    write_transaction_log(b, generate_synthetic_chain(cfg));
    CHECK(a.str() == b.str());
    cfg.seed = 8;
    std::ostringstream c;
    write_transaction_log(c, generate_synthetic_chain(cfg));
    CHECK(a.str() != c.str());

    std::istringstream in(a.str());
    const auto txs = parse_transaction_log(in);
    CHECK(txs.size() == 2000);

    cfg.n_transactions = 0;
    CHECK(generate_synthetic_chain(cfg).empty());
}

TEST_CASE("synthetic config validation")
{
    SynthChainConfig cfg;
    cfg.multi_input_rate = 1.5;
    CHECK_THROWS_AS(generate_synthetic_chain(cfg), std::invalid_argument);
    cfg = {};
    cfg.hub_attachment_weight = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.n_seed_addresses = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
