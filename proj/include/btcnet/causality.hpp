#pragma once

#include "btcnet/indicators.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace btcnet {

/// Least-squares VAR(tau) with intercept: A_t = c + sum_k B_k A_{t-k} + e_t.
struct VarModel {
    std::size_t lags = 0;
    std::vector<Eigen::MatrixXd> coefficients; ///< B_1..B_tau; (B_k)(j, i) is the effect of variable i on j
    Eigen::VectorXd intercept;
    Eigen::MatrixXd residuals; ///< (T - tau) x n
    Eigen::VectorXd rss;       ///< residual sum of squares per equation

    std::size_t variables() const noexcept { return static_cast<std::size_t>(intercept.size()); }
    std::size_t observations() const noexcept { return static_cast<std::size_t>(residuals.rows()); }
};

/// Fits a VAR on the T x n matrix `data` (rows are time). Throws
/// RankDeficientError when the lagged design lacks full column rank and
/// std::invalid_argument when tau == 0 or there are fewer observations than regressors.
VarModel fit_var(const Eigen::MatrixXd &data, std::size_t lags);

struct FTest {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t df1 = 0;
    std::size_t df2 = 0;
};

/// F-test of nested least-squares fits with `restrictions` excluded regressors.
FTest nested_f_test(double rss_restricted, double rss_full, std::size_t restrictions, std::size_t df_residual);

/// Bivariate Granger test of "cause -> effect" in mean with `lags` lags of each
/// series plus an intercept. Requires T >= 3 lags + 5.
FTest bivariate_granger(std::span<const double> cause, std::span<const double> effect, std::size_t lags);

enum class TestKind { mean_bivariate, mean_conditional, tail_left, tail_right };
const char *to_string(TestKind k) noexcept;

struct CausalityResult {
    std::string cause;
    std::string effect;
    TestKind kind = TestKind::mean_conditional;
    std::size_t tau_or_m = 0;
    std::optional<double> statistic; ///< empty when the test could not be run
    std::optional<double> p_value;
    int sign = 0;
    bool fdr_reject = false;
};

struct CausalityReport {
    std::vector<CausalityResult> rows;
};

/// Conditional Granger causality for every ordered pair of columns. Columns are
/// standardised, the full VAR is compared with the VAR that drops the cause
/// column, and the F-test uses the effect equation's residual sums of squares.
/// The sign is that of the summed lag coefficients of the cause in the effect
/// equation of the full model. Requires T >= n tau + 10.
CausalityReport multivariate_granger(const Eigen::MatrixXd &data, std::span<const std::string> names,
                                     std::size_t lags);

/// Default lag orders: 7 days, 4 weeks.
std::size_t default_granger_lags(Granularity g) noexcept;

/// Rolling alpha-quantile of the previous `window` observations (nearest rank),
/// shifted by gain * (exceedance rate so far - (1 - alpha)). The first `window`
/// points are undefined.
Series davis_conditional_quantile(std::span<const double> x, double alpha, std::size_t window, double gain);

enum class TailSide { left, right };

struct TailIndicator {
    TailSide side = TailSide::right;
    std::optional<double> level;
    Series quantile;
    std::vector<std::optional<std::uint8_t>> events; ///< 1 beyond the quantile, strictly
};

/// right: x_t > q_t, left: x_t < q_t; undefined where q_t is undefined.
TailIndicator tail_indicator(std::span<const double> x, const Series &quantile, TailSide side);

/// Davis quantile at `level` followed by tail_indicator.
TailIndicator tail_events(std::span<const double> x, TailSide side, double level, std::size_t window, double gain);

/// K(z) = sin(pi z) / (pi z), K(0) = 1.
double daniell_kernel(double z);

struct HongStatistic {
    double q = 0.0;
    double bandwidth = 0.0;
    std::vector<double> cross_correlation; ///< rho(l), l = 1..T-1
    double centering = 0.0;
    double scaling = 0.0;
    double p_value = 1.0;
    std::size_t length = 0;
    int sign = 0; ///< sign of sum_l K^2(l/M) rho(l)
};

/// Tests whether the `effect` indicator is Granger-caused in tail by `cause`,
/// using lagged cross-correlations corr(W_t, Z_{t-l}). The common undefined
/// prefix is dropped; requires T >= 4M and both indicators non-degenerate.
HongStatistic hong_tail_test(const TailIndicator &cause, const TailIndicator &effect, double bandwidth);

/// Default Hong bandwidths: 5 days, 3 weeks.
double default_hong_bandwidth(Granularity g) noexcept;
/// Default Davis windows: 30 days, 9 weeks.
std::size_t default_quantile_window(Granularity g) noexcept;

/// Benjamini-Hochberg step-up procedure: ascending indices of rejected hypotheses.
std::vector<std::size_t> benjamini_hochberg(std::span<const double> p_values, double q);

/// Applies BH at level q separately within each test kind of the report.
void apply_fdr(CausalityReport &report, double q);

/// CSV `cause,effect,test,tau_or_M,statistic,p,sign,fdr_reject`.
void write_causality_report(std::ostream &out, const CausalityReport &report);

} // namespace btcnet
