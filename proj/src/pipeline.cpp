#include "btcnet/pipeline.hpp"

#include "btcnet/causality.hpp"
#include "btcnet/clustering.hpp"
#include "btcnet/csv.hpp"
#include "btcnet/error.hpp"
#include "btcnet/netstats.hpp"
#include "btcnet/rng.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace btcnet {

namespace fs = std::filesystem;

namespace {

constexpr const char *manifest_name = "manifest.json";
constexpr const char *clustermap_name = "clustermap.csv";
constexpr const char *graphs_dir = "graphs";
constexpr const char *return_name = "log_return";
const std::vector<std::string> network_variables{"N",         "L",         "sigma_in", "sigma_out",
                                                 "gamma_in",  "gamma_out", "kappa_in", "kappa_out"};

// ---------------------------------------------------------------------------
// configuration

template <typename T> T parse_value(const std::string &key, const std::string &value)
{
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("bad value '" + value + "' for " + key);
    return out;
}

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> list_items(const std::string &value)
{
    std::vector<std::string> items;
    for (auto &item : csv::split(value, ','))
        if (auto t = trim(item); !t.empty())
            items.push_back(t);
    return items;
}

template <typename T, typename F> std::string join(const std::vector<T> &items, F fmt)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ',';
        out += fmt(items[i]);
    }
    return out;
}

struct Setting {
    const char *key;
    std::function<void(PipelineConfig &, const std::string &)> set;
    std::function<std::string(const PipelineConfig &)> get;
};

template <typename T> Setting number_setting(const char *key, T PipelineConfig::*member)
{
    return {key,
            [key, member](PipelineConfig &c, const std::string &v) { c.*member = parse_value<T>(key, v); },
            [member](const PipelineConfig &c) {
                if constexpr (std::is_floating_point_v<T>)
                    return csv::number(c.*member);
                else
                    return std::to_string(c.*member);
            }};
}

Setting string_setting(const char *key, std::string PipelineConfig::*member)
{
    return {key, [member](PipelineConfig &c, const std::string &v) { c.*member = v; },
            [member](const PipelineConfig &c) { return c.*member; }};
}

const std::vector<Setting> &settings()
{
    static const std::vector<Setting> table{
        string_setting("txlog", &PipelineConfig::txlog),
        string_setting("prices", &PipelineConfig::prices),
        string_setting("out", &PipelineConfig::out_dir),
        string_setting("clustermap", &PipelineConfig::clustermap),
        {"granularities",
         [](PipelineConfig &c, const std::string &v) {
             c.granularities.clear();
             for (const auto &item : list_items(v)) {
                 try {
                     c.granularities.push_back(parse_granularity(item));
                 } catch (const std::invalid_argument &e) {
                     throw ConfigError(e.what());
                 }
             }
         },
         [](const PipelineConfig &c) { return join(c.granularities, [](Granularity g) { return to_string(g); }); }},
        {"representations",
         [](PipelineConfig &c, const std::string &v) {
             c.representations.clear();
             for (const auto &item : list_items(v)) {
                 try {
                     c.representations.push_back(parse_representation(item));
                 } catch (const std::invalid_argument &e) {
                     throw ConfigError(e.what());
                 }
             }
         },
         [](const PipelineConfig &c) {
             return join(c.representations, [](Representation r) { return to_string(r); });
         }},
        {"periods",
         [](PipelineConfig &c, const std::string &v) {
             c.periods.clear();
             for (const auto &item : list_items(v))
                 c.periods.push_back(Period::parse(item));
         },
         [](const PipelineConfig &c) { return join(c.periods, [](const Period &p) { return p.label(); }); }},
        number_setting("tau_daily", &PipelineConfig::tau_daily),
        number_setting("tau_weekly", &PipelineConfig::tau_weekly),
        number_setting("rpma_tau_daily", &PipelineConfig::rpma_tau_daily),
        number_setting("rpma_tau_weekly", &PipelineConfig::rpma_tau_weekly),
        {"rpma_window",
         [](PipelineConfig &c, const std::string &v) {
             try {
                 c.rpma_window = parse_rpma_window(v);
             } catch (const std::invalid_argument &e) {
                 throw ConfigError(e.what());
             }
         },
         [](const PipelineConfig &c) { return std::string(to_string(c.rpma_window)); }},
        number_setting("hong_m_daily", &PipelineConfig::hong_m_daily),
        number_setting("hong_m_weekly", &PipelineConfig::hong_m_weekly),
        number_setting("quantile_window_daily", &PipelineConfig::quantile_window_daily),
        number_setting("quantile_window_weekly", &PipelineConfig::quantile_window_weekly),
        number_setting("tail_gain", &PipelineConfig::tail_gain),
        number_setting("tail_left", &PipelineConfig::tail_left),
        number_setting("tail_right", &PipelineConfig::tail_right),
        number_setting("zscore_lookback_daily", &PipelineConfig::zscore_lookback_daily),
        number_setting("zscore_lookback_weekly", &PipelineConfig::zscore_lookback_weekly),
        number_setting("bootstrap", &PipelineConfig::bootstrap),
        number_setting("fdr", &PipelineConfig::fdr),
        number_setting("density_min_nodes", &PipelineConfig::density_min_nodes),
        number_setting("seed", &PipelineConfig::seed),
    };
    return table;
}

// ---------------------------------------------------------------------------
// output bookkeeping

/// Files written during one run; removed again unless the run commits.
class OutputSet {
  public:
    explicit OutputSet(fs::path root) : root_(std::move(root)) {}
    OutputSet(const OutputSet &) = delete;
    OutputSet &operator=(const OutputSet &) = delete;

    ~OutputSet()
    {
        if (committed_)
            return;
        std::error_code ec;
        for (const auto &f : files_)
            fs::remove(f, ec);
    }

    std::ofstream open(const fs::path &relative)
    {
        const auto path = root_ / relative;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        files_.push_back(path);
        return out;
    }

    void commit() { committed_ = true; }
    const fs::path &root() const { return root_; }

  private:
    fs::path root_;
    std::vector<fs::path> files_;
    bool committed_ = false;
};

template <typename F> void parallel_for(std::size_t n, F fn)
{
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error)
                        error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

[[noreturn]] void fail(const std::string &context, const std::exception &e)
{
    throw StageError(context + ": " + e.what());
}

// ---------------------------------------------------------------------------
// stages

std::vector<Transaction> load_transactions(const PipelineConfig &cfg, const char *stage)
{
    try {
        return read_transaction_log(cfg.txlog);
    } catch (const std::exception &e) {
        fail(std::string(stage) + ": " + cfg.txlog, e);
    }
}

std::vector<std::string> read_window_ids(const fs::path &out_dir, Granularity g, const char *stage)
{
    const auto path = (out_dir / windows_filename(g)).string();
    try {
        auto table = csv::read_table(path);
        const auto col = table.column("window_id");
        std::vector<std::string> ids;
        for (const auto &row : table.rows)
            ids.push_back(row[col]);
        return ids;
    } catch (const std::exception &e) {
        fail(std::string(stage) + ": " + path, e);
    }
}

void stage_ingest(const PipelineConfig &cfg, OutputSet &out)
{
    const auto txs = load_transactions(cfg, "ingest");
    try {
        read_price_series(cfg.prices);
    } catch (const std::exception &e) {
        fail("ingest: " + cfg.prices, e);
    }
    for (auto g : cfg.granularities) {
        auto f = out.open(windows_filename(g));
        f << "window_id,tx_begin,tx_end\n";
        for (const auto &w : window_partition(txs, g))
            f << w.id() << ',' << w.begin << ',' << w.end << '\n';
    }
}

void stage_cluster(const PipelineConfig &cfg, OutputSet &out)
{
    const auto txs = load_transactions(cfg, "cluster");
    auto f = out.open(clustermap_name);
    write_cluster_map(f, cluster_addresses(txs));
}

bool wants(const PipelineConfig &cfg, Representation r)
{
    return std::find(cfg.representations.begin(), cfg.representations.end(), r) != cfg.representations.end();
}

void stage_build(const PipelineConfig &cfg, OutputSet &out)
{
    const auto txs = load_transactions(cfg, "build");
    ClusterMap cm;
    if (wants(cfg, Representation::user)) {
        const auto path = cfg.clustermap.empty() ? (out.root() / clustermap_name).string() : cfg.clustermap;
        try {
            cm = read_cluster_map(path);
        } catch (const std::exception &e) {
            fail("build: " + path, e);
        }
    }
    for (auto g : cfg.granularities) {
        const auto windows = window_partition(txs, g);
        for (auto r : cfg.representations) {
            auto volumes = out.open(volume_filename(r, g));
            volumes << "window_id,repr,volume\n";
            for (const auto &w : windows) {
                const auto span = std::span(txs).subspan(w.begin, w.size());
                WindowedGraph graph;
                try {
                    graph = r == Representation::address ? build_address_network(span, w.id())
                                                         : build_user_network(span, cm, w.id());
                } catch (const std::exception &e) {
                    fail(std::string("build: window ") + w.id() + " (" + to_string(r) + ", " + to_string(g) + ")",
                         e);
                }
                auto f = out.open(fs::path(graphs_dir) / edge_list_filename(r, g, w.id()));
                write_edge_list(f, graph);
                volumes << w.id() << ',' << to_string(r) << ',' << total_volume(graph) << '\n';
            }
        }
    }
}

std::string stats_row(const PipelineConfig &cfg, const WindowedGraph &g, Representation r, Granularity gran)
{
    const auto n = g.node_count();
    const auto l = g.edge_count();
    std::optional<double> density, mu, sigma_in, sigma_out, gamma_in, gamma_out, kappa_in, kappa_out;
    std::optional<double> pl_in, pl_out, pl_tot;
    if (n >= 2 && n >= cfg.density_min_nodes)
        density = link_density(g);
    if (n > 0) {
        mu = static_cast<double>(l) / static_cast<double>(n);
        const auto deg = degree_sequences(g);
        const auto m_in = moments(deg.in);
        const auto m_out = moments(deg.out);
        sigma_in = m_in.stddev;
        sigma_out = m_out.stddev;
        gamma_in = m_in.skewness;
        gamma_out = m_out.skewness;
        kappa_in = m_in.kurtosis;
        kappa_out = m_out.kurtosis;
        auto p_value = [&](const std::vector<std::uint32_t> &xs, const char *kind) -> std::optional<double> {
            if (xs.size() < powerlaw_min_sample)
                return std::nullopt;
            const auto seed = derive_seed(cfg.seed, std::string("powerlaw/") + to_string(r) + "/" +
                                                        to_string(gran) + "/" + g.window_id + "/" + kind);
            try {
                return powerlaw_ks_test(xs, cfg.bootstrap, seed).p_value;
            } catch (const DegenerateSampleError &) {
                return std::nullopt;
            }
        };
        pl_in = p_value(deg.in, "in");
        pl_out = p_value(deg.out, "out");
        pl_tot = p_value(deg.total, "total");
    }
    std::ostringstream row;
    row << g.window_id << ',' << to_string(r) << ',' << n << ',' << l;
    for (const auto &v : {density, mu, sigma_in, sigma_out, gamma_in, gamma_out, kappa_in, kappa_out, pl_in, pl_out,
                          pl_tot})
        row << ',' << csv::number(v);
    return row.str();
}

void stage_stats(const PipelineConfig &cfg, OutputSet &out)
{
    for (auto g : cfg.granularities) {
        const auto ids = read_window_ids(out.root(), g, "stats");
        for (auto r : cfg.representations) {
            std::vector<std::string> rows(ids.size());
            parallel_for(ids.size(), [&](std::size_t i) {
                const auto path = (out.root() / graphs_dir / edge_list_filename(r, g, ids[i])).string();
                try {
                    rows[i] = stats_row(cfg, read_edge_list(path, ids[i], r), r, g);
                } catch (const std::exception &e) {
                    fail(std::string("stats: window ") + ids[i] + " (" + to_string(r) + ", " + to_string(g) + ")",
                         e);
                }
            });
            auto f = out.open(stats_filename(r, g));
            f << stats_header << '\n';
            for (const auto &row : rows)
                f << row << '\n';
        }
    }
}

/// Numeric columns of a pipeline CSV keyed by window id, in file order.
struct ColumnSet {
    std::vector<std::string> window_ids;
    std::map<std::string, Series> columns;
};

ColumnSet read_columns(const fs::path &path, const std::vector<std::string> &names, const char *stage)
{
    try {
        const auto table = csv::read_table(path.string());
        ColumnSet cs;
        const auto id_col = table.column("window_id");
        for (const auto &row : table.rows)
            cs.window_ids.push_back(row[id_col]);
        for (const auto &name : names) {
            const auto col = table.column(name);
            Series s;
            for (const auto &row : table.rows)
                s.push_back(csv::parse_number(row[col]));
            cs.columns[name] = std::move(s);
        }
        return cs;
    } catch (const std::exception &e) {
        fail(std::string(stage) + ": " + path.string(), e);
    }
}

void stage_indicators(const PipelineConfig &cfg, OutputSet &out)
{
    PriceSeries prices;
    try {
        prices = read_price_series(cfg.prices);
    } catch (const std::exception &e) {
        fail("indicators: " + cfg.prices, e);
    }
    for (auto g : cfg.granularities) {
        const auto ids = read_window_ids(out.root(), g, "indicators");
        std::vector<Window> windows;
        for (const auto &id : ids)
            windows.push_back({parse_date(id), 0, 0});
        IndicatorSeries closes;
        try {
            closes = window_closes(prices, windows, g);
        } catch (const std::exception &e) {
            fail(std::string("indicators: price series (") + to_string(g) + ")", e);
        }
        IndicatorSeries rp{closes.window_ids, Series(closes.size())};
        try {
            rp = rpma(closes, cfg.rpma_tau(g), cfg.rpma_window);
        } catch (const std::invalid_argument &) {
            // too short for any RPMA value: the column stays empty
        }
        const auto returns = log_returns(closes);
        for (auto r : cfg.representations) {
            const auto stats = read_columns(out.root() / stats_filename(r, g), {"sigma_out"}, "indicators");
            if (stats.window_ids != ids)
                throw StageError("indicators: " + stats_filename(r, g) + " does not match the window grid");
            const auto z = rolling_zscore({ids, stats.columns.at("sigma_out")}, cfg.zscore_lookback(g));
            auto f = out.open(indicators_filename(r, g));
            f << indicators_header << '\n';
            for (std::size_t i = 0; i < ids.size(); ++i)
                f << ids[i] << ',' << csv::number(rp.values[i]) << ',' << csv::number(returns.values[i]) << ','
                  << csv::number(z.values[i]) << ',' << to_string(r) << '\n';
        }
    }
}

std::vector<double> standardized(std::span<const double> xs)
{
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size()));
    std::vector<double> z(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        z[i] = (xs[i] - mean) / sd;
    return z;
}

bool is_constant(std::span<const double> xs)
{
    return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

CausalityReport causality_battery(const PipelineConfig &cfg, Granularity g, const std::vector<std::string> &names,
                                  const std::vector<std::vector<double>> &series)
{
    CausalityReport report;
    const auto tau = cfg.tau(g);
    const auto n = names.size();
    const auto ret = n - 1; // log return is the last variable

    auto empty_row = [&](std::size_t cause, std::size_t effect, TestKind kind, std::size_t param) {
        CausalityResult r;
        r.cause = names[cause];
        r.effect = names[effect];
        r.kind = kind;
        r.tau_or_m = param;
        return r;
    };

    // Conditional tests within one VAR over the non-constant variables.
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i)
        if (!series[i].empty() && !is_constant(series[i]))
            active.push_back(i);
    std::map<std::pair<std::size_t, std::size_t>, CausalityResult> conditional;
    if (active.size() >= 2) {
        const auto t_len = static_cast<Eigen::Index>(series[active[0]].size());
        Eigen::MatrixXd data(t_len, static_cast<Eigen::Index>(active.size()));
        std::vector<std::string> active_names;
        for (std::size_t c = 0; c < active.size(); ++c) {
            active_names.push_back(names[active[c]]);
            for (Eigen::Index t = 0; t < t_len; ++t)
                data(t, static_cast<Eigen::Index>(c)) = series[active[c]][static_cast<std::size_t>(t)];
        }
        try {
            const auto rep = multivariate_granger(data, active_names, tau);
            std::size_t k = 0;
            for (std::size_t i = 0; i < active.size(); ++i)
                for (std::size_t j = 0; j < active.size(); ++j)
                    if (i != j)
                        conditional[{active[i], active[j]}] = rep.rows[k++];
        } catch (const std::exception &) {
            // too short or collinear: rows stay empty
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            auto it = conditional.find({i, j});
            report.rows.push_back(it != conditional.end() ? it->second
                                                          : empty_row(i, j, TestKind::mean_conditional, tau));
        }

    // Bivariate and tail tests between each network variable and the return.
    const auto m = cfg.hong_m(g);
    std::vector<std::vector<double>> standard(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!series[i].empty() && !is_constant(series[i]))
            standard[i] = standardized(series[i]);

    auto bivariate = [&](std::size_t cause, std::size_t effect) {
        auto row = empty_row(cause, effect, TestKind::mean_bivariate, tau);
        try {
            const auto f = bivariate_granger(series[cause], series[effect], tau);
            row.statistic = f.statistic;
            row.p_value = f.p_value;
        } catch (const std::exception &) {
        }
        return row;
    };
    for (std::size_t i = 0; i < ret; ++i) {
        report.rows.push_back(bivariate(i, ret));
        report.rows.push_back(bivariate(ret, i));
    }

    for (auto side : {TailSide::left, TailSide::right}) {
        const auto kind = side == TailSide::left ? TestKind::tail_left : TestKind::tail_right;
        const double level = side == TailSide::left ? cfg.tail_left : cfg.tail_right;
        std::vector<std::optional<TailIndicator>> events(n);
        for (std::size_t i = 0; i < n; ++i)
            if (!standard[i].empty())
                events[i] = tail_events(standard[i], side, level, cfg.quantile_window(g), cfg.tail_gain);
        auto tail = [&](std::size_t cause, std::size_t effect) {
            auto row = empty_row(cause, effect, kind, m);
            if (!events[cause] || !events[effect])
                return row;
            try {
                const auto h = hong_tail_test(*events[cause], *events[effect], static_cast<double>(m));
                row.statistic = h.q;
                row.p_value = h.p_value;
                row.sign = h.sign;
            } catch (const std::exception &) {
            }
            return row;
        };
        for (std::size_t i = 0; i < ret; ++i) {
            report.rows.push_back(tail(i, ret));
            report.rows.push_back(tail(ret, i));
        }
    }
    apply_fdr(report, cfg.fdr);
    return report;
}

void stage_causality(const PipelineConfig &cfg, OutputSet &out)
{
    std::vector<std::string> names = network_variables;
    names.push_back(return_name);
    for (auto g : cfg.granularities) {
        for (auto r : cfg.representations) {
            const auto stats = read_columns(out.root() / stats_filename(r, g), network_variables, "causality");
            const auto ind = read_columns(out.root() / indicators_filename(r, g), {return_name}, "causality");
            if (stats.window_ids != ind.window_ids)
                throw StageError("causality: stats and indicator windows differ (" + std::string(to_string(r)) +
                                 ", " + to_string(g) + ")");

            std::vector<std::pair<std::string, std::optional<Period>>> periods;
            if (cfg.periods.empty())
                periods.emplace_back("all", std::nullopt);
            for (const auto &p : cfg.periods)
                periods.emplace_back(p.label(), p);

            for (const auto &[label, period] : periods) {
                // Longest run of consecutive in-period windows with every variable defined.
                std::size_t best_begin = 0, best_len = 0, run_begin = 0, run_len = 0;
                for (std::size_t t = 0; t < stats.window_ids.size(); ++t) {
                    bool ok = !period || period->contains(parse_date(stats.window_ids[t]));
                    for (const auto &v : network_variables)
                        ok = ok && stats.columns.at(v)[t].has_value();
                    ok = ok && ind.columns.at(return_name)[t].has_value();
                    if (!ok) {
                        run_len = 0;
                        continue;
                    }
                    if (run_len == 0)
                        run_begin = t;
                    if (++run_len > best_len) {
                        best_len = run_len;
                        best_begin = run_begin;
                    }
                }
                std::vector<std::vector<double>> series(names.size());
                for (std::size_t v = 0; v < names.size(); ++v) {
                    const auto &col = v < network_variables.size() ? stats.columns.at(names[v])
                                                                   : ind.columns.at(return_name);
                    for (std::size_t t = best_begin; t < best_begin + best_len; ++t)
                        series[v].push_back(*col[t]);
                }
                const auto report = causality_battery(cfg, g, names, series);
                auto f = out.open(causality_filename(r, g, label));
                write_causality_report(f, report);
            }
        }
    }
}

void write_manifest(const PipelineConfig &cfg, const fs::path &root)
{
    nlohmann::json m;
    for (const auto &s : settings())
        if (std::string(s.key) != "out")
            m["config"][s.key] = s.get(cfg);
    m["seed"] = cfg.seed;
    if (!cfg.txlog.empty() && fs::exists(cfg.txlog))
        m["inputs"]["txlog"] = sha256_file(cfg.txlog);
    if (!cfg.prices.empty() && fs::exists(cfg.prices))
        m["inputs"]["prices"] = sha256_file(cfg.prices);
    std::vector<std::string> files;
    for (const auto &entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file() && entry.path().filename() != manifest_name)
            files.push_back(fs::relative(entry.path(), root).generic_string());
    std::sort(files.begin(), files.end());
    m["files"] = nlohmann::json::object();
    for (const auto &f : files)
        m["files"][f] = sha256_file(root / f);
    std::ofstream out(root / manifest_name, std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
}

} // namespace

Period Period::parse(const std::string &s)
{
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw ConfigError("period must look like start:end, got '" + s + "'");
    try {
        Period p{parse_date(trim(s.substr(0, colon))), parse_date(trim(s.substr(colon + 1)))};
        if (p.end < p.start)
            throw ConfigError("period ends before it starts: '" + s + "'");
        return p;
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
}

std::string Period::label() const { return format_date(start) + ":" + format_date(end); }

PipelineConfig PipelineConfig::load(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void PipelineConfig::set(const std::string &key, const std::string &value)
{
    for (const auto &s : settings())
        if (key == s.key) {
            s.set(*this, value);
            return;
        }
    throw ConfigError("unknown config key '" + key + "'");
}

std::string PipelineConfig::echo() const
{
    std::string out;
    for (const auto &s : settings())
        out += std::string(s.key) + " = " + s.get(*this) + "\n";
    return out;
}

Stage parse_stage(const std::string &s)
{
    static const std::map<std::string, Stage> stages{
        {"ingest", Stage::ingest},         {"cluster", Stage::cluster},       {"build", Stage::build},
        {"stats", Stage::stats},           {"indicators", Stage::indicators}, {"causality", Stage::causality},
        {"all", Stage::all}};
    if (auto it = stages.find(s); it != stages.end())
        return it->second;
    throw ConfigError("unknown stage '" + s + "'");
}

const char *to_string(Stage s) noexcept
{
    switch (s) {
    case Stage::ingest:
        return "ingest";
    case Stage::cluster:
        return "cluster";
    case Stage::build:
        return "build";
    case Stage::stats:
        return "stats";
    case Stage::indicators:
        return "indicators";
    case Stage::causality:
        return "causality";
    case Stage::all:
        return "all";
    }
    return "?";
}

void validate_config(const PipelineConfig &cfg, Stage stage)
{
    auto require_file = [](const std::string &path, const char *what) {
        if (path.empty())
            throw ConfigError(std::string("missing ") + what + " path");
        if (!fs::is_regular_file(path))
            throw ConfigError(std::string(what) + " file '" + path + "' does not exist");
    };
    const bool all = stage == Stage::all;
    if (all || stage == Stage::ingest || stage == Stage::cluster || stage == Stage::build)
        require_file(cfg.txlog, "txlog");
    if (all || stage == Stage::ingest || stage == Stage::indicators)
        require_file(cfg.prices, "price");
    if (!cfg.clustermap.empty() && (all || stage == Stage::build))
        require_file(cfg.clustermap, "cluster map");
    if (cfg.out_dir.empty())
        throw ConfigError("missing output directory");
    if (cfg.granularities.empty() || cfg.representations.empty())
        throw ConfigError("at least one granularity and one representation required");
    for (std::size_t i = 1; i < cfg.periods.size(); ++i)
        if (!(cfg.periods[i - 1].end < cfg.periods[i].start))
            throw ConfigError("periods must be ordered and non-overlapping");
    if (cfg.tau_daily == 0 || cfg.tau_weekly == 0 || cfg.rpma_tau_daily == 0 || cfg.rpma_tau_weekly == 0)
        throw ConfigError("lag orders must be positive");
    if (cfg.hong_m_daily == 0 || cfg.hong_m_weekly == 0)
        throw ConfigError("Hong bandwidths must be positive");
    if (cfg.quantile_window_daily == 0 || cfg.quantile_window_weekly == 0)
        throw ConfigError("quantile windows must be positive");
    if (cfg.zscore_lookback_daily < 2 || cfg.zscore_lookback_weekly < 2)
        throw ConfigError("z-score lookbacks must be at least 2");
    if (cfg.bootstrap == 0)
        throw ConfigError("bootstrap count must be positive");
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(cfg.fdr) || !in_unit(cfg.tail_left) || !in_unit(cfg.tail_right))
        throw ConfigError("fdr and tail levels must lie in (0,1)");
}

void run_stage(const PipelineConfig &cfg, Stage stage)
{
    validate_config(cfg, stage);
    fs::create_directories(cfg.out_dir);
    OutputSet out(cfg.out_dir);
    auto run = [&](Stage s) {
        switch (s) {
        case Stage::ingest:
            return stage_ingest(cfg, out);
        case Stage::cluster:
            return stage_cluster(cfg, out);
        case Stage::build:
            return stage_build(cfg, out);
        case Stage::stats:
            return stage_stats(cfg, out);
        case Stage::indicators:
            return stage_indicators(cfg, out);
        case Stage::causality:
            return stage_causality(cfg, out);
        case Stage::all:
            break;
        }
    };
    if (stage == Stage::all) {
        for (auto s : {Stage::ingest, Stage::cluster, Stage::build, Stage::stats, Stage::indicators,
                       Stage::causality})
            run(s);
    } else {
        run(stage);
    }
    write_manifest(cfg, cfg.out_dir);
    out.commit();
}

std::string windows_filename(Granularity g) { return std::string("windows_") + to_string(g) + ".csv"; }

std::string stats_filename(Representation r, Granularity g)
{
    return std::string("stats_") + to_string(r) + "_" + to_string(g) + ".csv";
}

std::string volume_filename(Representation r, Granularity g)
{
    return std::string("volume_") + to_string(r) + "_" + to_string(g) + ".csv";
}

std::string indicators_filename(Representation r, Granularity g)
{
    return std::string("indicators_") + to_string(r) + "_" + to_string(g) + ".csv";
}

std::string causality_filename(Representation r, Granularity g, const std::string &period_label)
{
    auto label = period_label;
    std::replace(label.begin(), label.end(), ':', '_');
    return std::string("causality_") + to_string(r) + "_" + to_string(g) + "_" + label + ".csv";
}

std::string sha256_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto data = buf.str();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

} // namespace btcnet
