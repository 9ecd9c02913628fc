#pragma once

#include "btcnet/indicators.hpp"
#include "btcnet/ingest.hpp"
#include "btcnet/netbuild.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace btcnet {

/// A closed range of calendar days.
struct Period {
    std::chrono::sys_days start;
    std::chrono::sys_days end;

    /// "YYYY-MM-DD:YYYY-MM-DD"
    static Period parse(const std::string &s);
    std::string label() const;
    bool contains(std::chrono::sys_days d) const { return d >= start && d <= end; }
};

struct PipelineConfig {
    std::string txlog;
    std::string prices;
    std::string out_dir = "out";
    std::string clustermap; ///< optional cluster map to import instead of out/clustermap.csv

    std::vector<Granularity> granularities{Granularity::daily, Granularity::weekly};
    std::vector<Representation> representations{Representation::address, Representation::user};
    std::vector<Period> periods; ///< empty: one period spanning all windows

    std::size_t tau_daily = 7;
    std::size_t tau_weekly = 4;
    std::size_t rpma_tau_daily = 7;
    std::size_t rpma_tau_weekly = 4;
    RpmaWindow rpma_window = RpmaWindow::verbatim;
    std::size_t hong_m_daily = 5;
    std::size_t hong_m_weekly = 3;
    std::size_t quantile_window_daily = 30;
    std::size_t quantile_window_weekly = 9;
    double tail_gain = 0.1;
    double tail_left = 0.1;
    double tail_right = 0.9;
    std::size_t zscore_lookback_daily = 365;
    std::size_t zscore_lookback_weekly = 52;
    std::size_t bootstrap = 1000;
    double fdr = 0.05;
    std::size_t density_min_nodes = 500;
    std::uint64_t seed = 0;

    /// Reads `key = value` lines; `#` starts a comment.
    static PipelineConfig load(const std::string &path);
    /// Sets one key; throws ConfigError for unknown keys or bad values.
    void set(const std::string &key, const std::string &value);
    /// Canonical `key = value` listing of every setting.
    std::string echo() const;

    std::size_t tau(Granularity g) const { return g == Granularity::daily ? tau_daily : tau_weekly; }
    std::size_t rpma_tau(Granularity g) const { return g == Granularity::daily ? rpma_tau_daily : rpma_tau_weekly; }
    std::size_t hong_m(Granularity g) const { return g == Granularity::daily ? hong_m_daily : hong_m_weekly; }
    std::size_t quantile_window(Granularity g) const
    {
        return g == Granularity::daily ? quantile_window_daily : quantile_window_weekly;
    }
    std::size_t zscore_lookback(Granularity g) const
    {
        return g == Granularity::daily ? zscore_lookback_daily : zscore_lookback_weekly;
    }
};

enum class Stage { ingest, cluster, build, stats, indicators, causality, all };

Stage parse_stage(const std::string &s);
const char *to_string(Stage s) noexcept;

/// Error inside a pipeline stage, prefixed with stage and window context.
class StageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Checks the settings and input files a stage needs; throws ConfigError.
void validate_config(const PipelineConfig &cfg, Stage stage);

/// Runs one stage (or all of them in order) reading earlier stages' outputs
/// from cfg.out_dir, then rewrites the run manifest. Files written by a
/// failing run are removed before the error propagates.
void run_stage(const PipelineConfig &cfg, Stage stage);

inline void run_pipeline(const PipelineConfig &cfg) { run_stage(cfg, Stage::all); }

/// Output file names.
std::string windows_filename(Granularity g);
std::string stats_filename(Representation r, Granularity g);
std::string volume_filename(Representation r, Granularity g);
std::string indicators_filename(Representation r, Granularity g);
std::string causality_filename(Representation r, Granularity g, const std::string &period_label);

inline constexpr const char *stats_header =
    "window_id,repr,N,L,d,mu,sigma_in,sigma_out,gamma_in,gamma_out,kappa_in,kappa_out,pl_p_in,pl_p_out,pl_p_tot";
inline constexpr const char *indicators_header = "window_id,rpma,log_return,z_sigma_kout,repr";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path &path);

} // namespace btcnet
