#include "btcnet/causality.hpp"

#include "btcnet/csv.hpp"
#include "btcnet/error.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace btcnet {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double rank_threshold = 1e-10;

/// [1, y_{t-1} .. y_{t-tau}] rows for t = tau .. T-1, lag-major within each row.
MatrixXd lagged_design(const MatrixXd &data, std::size_t lags)
{
    const Index t_eff = data.rows() - static_cast<Index>(lags);
    const Index n = data.cols();
    MatrixXd x(t_eff, 1 + n * static_cast<Index>(lags));
    x.col(0).setOnes();
    for (Index k = 1; k <= static_cast<Index>(lags); ++k)
        x.block(0, 1 + (k - 1) * n, t_eff, n) = data.block(static_cast<Index>(lags) - k, 0, t_eff, n);
    return x;
}

struct LeastSquares {
    MatrixXd coef;
    MatrixXd residuals;
};

LeastSquares solve(const MatrixXd &x, const MatrixXd &y)
{
    if (x.rows() <= x.cols())
        throw std::invalid_argument("fewer observations than regressors");
    Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
    qr.setThreshold(rank_threshold);
    if (qr.rank() < x.cols())
        throw RankDeficientError("design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                 std::to_string(x.cols()));
    LeastSquares ls;
    ls.coef = qr.solve(y);
    ls.residuals = y - x * ls.coef;
    return ls;
}

MatrixXd drop_column(const MatrixXd &m, Index col)
{
    MatrixXd out(m.rows(), m.cols() - 1);
    out.leftCols(col) = m.leftCols(col);
    out.rightCols(m.cols() - col - 1) = m.rightCols(m.cols() - col - 1);
    return out;
}

MatrixXd standardize(const MatrixXd &data)
{
    MatrixXd z(data.rows(), data.cols());
    for (Index c = 0; c < data.cols(); ++c) {
        const double mean = data.col(c).mean();
        const double sd = std::sqrt((data.col(c).array() - mean).square().mean());
        if (!(sd > 0.0))
            throw RankDeficientError("column " + std::to_string(c) + " is constant");
        z.col(c) = (data.col(c).array() - mean) / sd;
    }
    return z;
}

std::pair<std::size_t, std::size_t> defined_range_check(const TailIndicator &z, const TailIndicator &w)
{
    if (z.events.size() != w.events.size())
        throw std::invalid_argument("tail indicators have different lengths");
    std::size_t start = 0;
    while (start < z.events.size() && (!z.events[start] || !w.events[start]))
        ++start;
    for (std::size_t t = start; t < z.events.size(); ++t)
        if (!z.events[t] || !w.events[t])
            throw std::invalid_argument("tail indicator has undefined values after its prefix");
    return {start, z.events.size()};
}

} // namespace

VarModel fit_var(const MatrixXd &data, std::size_t lags)
{
    if (lags == 0)
        throw std::invalid_argument("VAR lag order must be positive");
    if (data.rows() <= static_cast<Index>(lags))
        throw std::invalid_argument("series shorter than the lag order");
    const Index n = data.cols();
    const auto x = lagged_design(data, lags);
    const MatrixXd y = data.bottomRows(data.rows() - static_cast<Index>(lags));
    auto ls = solve(x, y);

    VarModel m;
    m.lags = lags;
    m.intercept = ls.coef.row(0).transpose();
    for (std::size_t k = 0; k < lags; ++k)
        m.coefficients.push_back(ls.coef.block(1 + static_cast<Index>(k) * n, 0, n, n).transpose());
    m.rss = ls.residuals.colwise().squaredNorm().transpose();
    m.residuals = std::move(ls.residuals);
    return m;
}

FTest nested_f_test(double rss_restricted, double rss_full, std::size_t restrictions, std::size_t df_residual)
{
    if (restrictions == 0 || df_residual == 0)
        throw std::invalid_argument("F-test needs positive degrees of freedom");
    FTest f;
    f.df1 = restrictions;
    f.df2 = df_residual;
    if (!(rss_full > 0.0))
        throw DegenerateSampleError("full model fits exactly; F statistic undefined");
    f.statistic = std::max(0.0, ((rss_restricted - rss_full) / static_cast<double>(restrictions)) /
                                    (rss_full / static_cast<double>(df_residual)));
    boost::math::fisher_f dist(static_cast<double>(f.df1), static_cast<double>(f.df2));
    f.p_value = boost::math::cdf(boost::math::complement(dist, f.statistic));
    return f;
}

FTest bivariate_granger(std::span<const double> cause, std::span<const double> effect, std::size_t lags)
{
    if (lags == 0)
        throw std::invalid_argument("Granger lag order must be positive");
    if (cause.size() != effect.size())
        throw std::invalid_argument("Granger series have different lengths");
    const std::size_t t = cause.size();
    if (t < 3 * lags + 5)
        throw std::invalid_argument("Granger test needs at least 3*tau+5 observations");

    MatrixXd data(static_cast<Index>(t), 2);
    for (std::size_t i = 0; i < t; ++i) {
        data(static_cast<Index>(i), 0) = effect[i];
        data(static_cast<Index>(i), 1) = cause[i];
    }
    const auto full_x = lagged_design(data, lags);
    const auto restricted_x = lagged_design(data.leftCols(1), lags);
    const MatrixXd y = data.col(0).tail(static_cast<Index>(t - lags));

    const double rss_full = solve(full_x, y).residuals.squaredNorm();
    const double rss_restricted = solve(restricted_x, y).residuals.squaredNorm();
    const std::size_t t_eff = t - lags;
    return nested_f_test(rss_restricted, rss_full, lags, t_eff - 2 * lags - 1);
}

const char *to_string(TestKind k) noexcept
{
    switch (k) {
    case TestKind::mean_bivariate:
        return "mean-bivariate";
    case TestKind::mean_conditional:
        return "mean-conditional";
    case TestKind::tail_left:
        return "tail-left";
    case TestKind::tail_right:
        return "tail-right";
    }
    return "?";
}

CausalityReport multivariate_granger(const MatrixXd &data, std::span<const std::string> names, std::size_t lags)
{
    if (lags == 0)
        throw std::invalid_argument("Granger lag order must be positive");
    const auto n = static_cast<std::size_t>(data.cols());
    if (names.size() != n)
        throw std::invalid_argument("one name per column required");
    if (n < 2)
        throw std::invalid_argument("conditional Granger test needs at least two series");
    if (static_cast<std::size_t>(data.rows()) < n * lags + 10)
        throw std::invalid_argument("conditional Granger test needs at least n*tau+10 observations");

    const auto z = standardize(data);
    const auto full = fit_var(z, lags);
    const std::size_t df_residual = full.observations() - n * lags - 1;

    CausalityReport report;
    for (std::size_t i = 0; i < n; ++i) {
        const auto reduced = fit_var(drop_column(z, static_cast<Index>(i)), lags);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            const auto j_reduced = static_cast<Index>(j < i ? j : j - 1);
            const auto f = nested_f_test(reduced.rss(j_reduced), full.rss(static_cast<Index>(j)), lags, df_residual);
            double effect = 0.0;
            for (const auto &b : full.coefficients)
                effect += b(static_cast<Index>(j), static_cast<Index>(i));
            CausalityResult r;
            r.cause = names[i];
            r.effect = names[j];
            r.kind = TestKind::mean_conditional;
            r.tau_or_m = lags;
            r.statistic = f.statistic;
            r.p_value = f.p_value;
            r.sign = (effect > 0.0) - (effect < 0.0);
            report.rows.push_back(std::move(r));
        }
    }
    return report;
}

std::size_t default_granger_lags(Granularity g) noexcept { return g == Granularity::daily ? 7 : 4; }

Series davis_conditional_quantile(std::span<const double> x, double alpha, std::size_t window, double gain)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("quantile level must lie in (0,1)");
    if (window == 0)
        throw std::invalid_argument("quantile window must be positive");
    Series q(x.size());
    auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(window) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, window);

    std::vector<double> buf(window);
    std::size_t exceed = 0;
    std::size_t defined = 0;
    for (std::size_t t = window; t < x.size(); ++t) {
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(t - window), x.begin() + static_cast<std::ptrdiff_t>(t),
                  buf.begin());
        std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(rank - 1), buf.end());
        double value = buf[rank - 1];
        if (defined > 0) {
            const double rate = static_cast<double>(exceed) / static_cast<double>(defined);
            value += gain * (rate - (1.0 - alpha));
        }
        q[t] = value;
        ++defined;
        if (x[t] > value)
            ++exceed;
    }
    return q;
}

TailIndicator tail_indicator(std::span<const double> x, const Series &quantile, TailSide side)
{
    if (x.size() != quantile.size())
        throw std::invalid_argument("series and quantile series have different lengths");
    TailIndicator ind;
    ind.side = side;
    ind.quantile = quantile;
    ind.events.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (!quantile[t])
            continue;
        const bool beyond = side == TailSide::right ? x[t] > *quantile[t] : x[t] < *quantile[t];
        ind.events[t] = beyond ? 1 : 0;
    }
    return ind;
}

TailIndicator tail_events(std::span<const double> x, TailSide side, double level, std::size_t window, double gain)
{
    auto ind = tail_indicator(x, davis_conditional_quantile(x, level, window, gain), side);
    ind.level = level;
    return ind;
}

double daniell_kernel(double z)
{
    if (z == 0.0)
        return 1.0;
    const double pz = boost::math::constants::pi<double>() * z;
    return std::sin(pz) / pz;
}

HongStatistic hong_tail_test(const TailIndicator &cause, const TailIndicator &effect, double bandwidth)
{
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    const auto [begin, end] = defined_range_check(cause, effect);
    const std::size_t t_len = end - begin;
    if (static_cast<double>(t_len) < 4.0 * bandwidth)
        throw DegenerateSampleError("tail test needs at least 4M observations");

    std::vector<double> z(t_len), w(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        z[t] = *cause.events[begin + t];
        w[t] = *effect.events[begin + t];
    }
    const double n = static_cast<double>(t_len);
    const double pz = std::accumulate(z.begin(), z.end(), 0.0) / n;
    const double pw = std::accumulate(w.begin(), w.end(), 0.0) / n;
    if (pz == 0.0 || pz == 1.0 || pw == 0.0 || pw == 1.0)
        throw DegenerateSampleError("tail indicator is constant");
    for (auto &v : z)
        v -= pz;
    for (auto &v : w)
        v -= pw;
    const double norm = n * std::sqrt(pz * (1.0 - pz) * pw * (1.0 - pw));

    HongStatistic h;
    h.bandwidth = bandwidth;
    h.length = t_len;
    h.cross_correlation.resize(t_len - 1);
    double weighted = 0.0;
    double signed_sum = 0.0;
    for (std::size_t l = 1; l < t_len; ++l) {
        double c = 0.0;
        for (std::size_t t = l; t < t_len; ++t)
            c += w[t] * z[t - l];
        const double rho = c / norm;
        h.cross_correlation[l - 1] = rho;
        const double k = daniell_kernel(static_cast<double>(l) / bandwidth);
        const double k2 = k * k;
        const double frac = static_cast<double>(l) / n;
        const double frac_next = static_cast<double>(l + 1) / n;
        weighted += k2 * rho * rho;
        signed_sum += k2 * rho;
        h.centering += (1.0 - frac) * k2;
        h.scaling += 2.0 * (1.0 - frac) * (1.0 - frac_next) * k2 * k2;
    }
    h.q = (n * weighted - h.centering) / std::sqrt(h.scaling);
    h.p_value = 0.5 * std::erfc(h.q / std::sqrt(2.0)); // 1 - Phi(Q)
    h.sign = (signed_sum > 0.0) - (signed_sum < 0.0);
    return h;
}

double default_hong_bandwidth(Granularity g) noexcept { return g == Granularity::daily ? 5.0 : 3.0; }

std::size_t default_quantile_window(Granularity g) noexcept { return g == Granularity::daily ? 30 : 9; }

std::vector<std::size_t> benjamini_hochberg(std::span<const double> p_values, double q)
{
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("FDR level must lie in (0,1]");
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("p-values must lie in [0,1]");
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t k_star = 0;
    for (std::size_t k = 1; k <= m; ++k)
        if (p_values[order[k - 1]] <= static_cast<double>(k) * q / static_cast<double>(m))
            k_star = k;
    std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_star));
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

void apply_fdr(CausalityReport &report, double q)
{
    for (auto kind : {TestKind::mean_bivariate, TestKind::mean_conditional, TestKind::tail_left, TestKind::tail_right}) {
        std::vector<std::size_t> rows;
        std::vector<double> ps;
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            auto &r = report.rows[i];
            if (r.kind != kind)
                continue;
            r.fdr_reject = false;
            if (r.p_value) {
                rows.push_back(i);
                ps.push_back(*r.p_value);
            }
        }
        for (auto k : benjamini_hochberg(ps, q))
            report.rows[rows[k]].fdr_reject = true;
    }
}

void write_causality_report(std::ostream &out, const CausalityReport &report)
{
    out << "cause,effect,test,tau_or_M,statistic,p,sign,fdr_reject\n";
    for (const auto &r : report.rows) {
        out << r.cause << ',' << r.effect << ',' << to_string(r.kind) << ',' << r.tau_or_m << ','
            << csv::number(r.statistic) << ',' << csv::number(r.p_value) << ',';
        if (r.statistic)
            out << r.sign;
        out << ',' << (r.fdr_reject ? 1 : 0) << '\n';
    }
}

} // namespace btcnet
