#include "btcnet/error.hpp"
#include "btcnet/netstats.hpp"
#include "btcnet/rng.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace btcnet {

namespace {

constexpr double alpha_lo = 1.0 + 1e-6;
constexpr double alpha_hi = 30.0;
constexpr double cutoff_percentile = 0.9;
constexpr std::size_t sampler_table = 100'000;
constexpr std::uint64_t peel_limit = 8;

/// Distinct values with multiplicities, ascending.
struct Histogram {
    std::vector<std::uint64_t> values;
    std::vector<std::size_t> counts;
    std::size_t n = 0;

    explicit Histogram(std::vector<std::uint64_t> xs)
    {
        n = xs.size();
        const auto top = xs.empty() ? 0 : *std::max_element(xs.begin(), xs.end());
        if (top < 4 * n + 1024) {
            std::vector<std::size_t> tally(top + 1, 0);
            for (auto x : xs)
                ++tally[x];
            for (std::uint64_t v = 0; v <= top; ++v)
                if (tally[v]) {
                    values.push_back(v);
                    counts.push_back(tally[v]);
                }
            return;
        }
        std::sort(xs.begin(), xs.end());
        for (auto x : xs) {
            if (!values.empty() && values.back() == x) {
                ++counts.back();
            } else {
                values.push_back(x);
                counts.push_back(1);
            }
        }
    }
};

struct TailFit {
    double alpha;
    double ks;
    std::size_t first; ///< index of xmin in the histogram
    std::size_t n_tail;
};

double fit_alpha(const Histogram &h, std::size_t first, std::size_t n_tail)
{
    double sum_log = 0.0;
    for (std::size_t i = first; i < h.values.size(); ++i)
        sum_log += static_cast<double>(h.counts[i]) * std::log(static_cast<double>(h.values[i]));
    const double xmin = static_cast<double>(h.values[first]);
    const double nt = static_cast<double>(n_tail);
    auto neg_loglik = [&](double a) { return a * sum_log + nt * std::log(hurwitz_zeta(a, xmin)); };
    return boost::math::tools::brent_find_minima(neg_loglik, alpha_lo, alpha_hi, 26).first;
}

/// Exact sup over integers x >= xmin of |empirical CDF - model CDF|.
double ks_distance(const Histogram &h, std::size_t first, std::size_t n_tail, double alpha)
{
    const double z0 = hurwitz_zeta(alpha, static_cast<double>(h.values[first]));
    const double nt = static_cast<double>(n_tail);
    double cum = 0.0;
    double d = 0.0;
    double z_v = z0;
    for (std::size_t i = first; i < h.values.size(); ++i) {
        const double v = static_cast<double>(h.values[i]);
        cum += static_cast<double>(h.counts[i]);
        const double emp = cum / nt;
        // zeta(a, v) by peeling terms off zeta(a, previous value) across short gaps.
        if (i > first) {
            const auto prev = h.values[i - 1];
            if (h.values[i] - prev <= peel_limit)
                for (auto k = prev; k < h.values[i]; ++k)
                    z_v -= std::pow(static_cast<double>(k), -alpha);
            else
                z_v = hurwitz_zeta(alpha, v);
        }
        const double model_at_prev = 1.0 - z_v / z0; // CDF at v - 1
        const double model_at_v = 1.0 - (z_v - std::pow(v, -alpha)) / z0;
        const double emp_prev = (cum - static_cast<double>(h.counts[i])) / nt;
        d = std::max({d, std::abs(emp - model_at_v), std::abs(emp_prev - model_at_prev)});
    }
    return d;
}

std::optional<TailFit> fit_histogram(const Histogram &h)
{
    if (h.n < powerlaw_min_sample)
        return std::nullopt;
    // Nearest-rank 90th percentile bounds the cutoff search.
    const auto rank = static_cast<std::size_t>(std::ceil(cutoff_percentile * static_cast<double>(h.n) - 1e-9));
    std::uint64_t limit = 0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        seen += h.counts[i];
        if (seen >= rank) {
            limit = h.values[i];
            break;
        }
    }

    std::vector<std::size_t> suffix(h.values.size() + 1, 0);
    for (std::size_t i = h.values.size(); i-- > 0;)
        suffix[i] = suffix[i + 1] + h.counts[i];

    std::optional<TailFit> best;
    for (std::size_t i = 0; i < h.values.size() && h.values[i] <= limit; ++i) {
        if (h.values[i] == 0 || i + 1 >= h.values.size())
            continue; // cutoff must be positive and leave two distinct tail values
        const auto n_tail = suffix[i];
        const double alpha = fit_alpha(h, i, n_tail);
        const double ks = ks_distance(h, i, n_tail, alpha);
        if (!best || ks < best->ks)
            best = TailFit{alpha, ks, i, n_tail};
    }
    return best;
}

std::vector<std::uint64_t> widen(std::span<const std::uint32_t> xs) { return {xs.begin(), xs.end()}; }

PowerLawFit to_result(const Histogram &h, const TailFit &f)
{
    PowerLawFit r;
    r.alpha = f.alpha;
    r.xmin = h.values[f.first];
    r.ks_distance = f.ks;
    r.n = h.n;
    r.n_tail = f.n_tail;
    return r;
}

Histogram checked_histogram(std::span<const std::uint32_t> xs)
{
    if (xs.size() < powerlaw_min_sample)
        throw DegenerateSampleError("power-law test needs at least " + std::to_string(powerlaw_min_sample) +
                                    " observations, got " + std::to_string(xs.size()));
    Histogram h(widen(xs));
    if (h.values.size() < 2)
        throw DegenerateSampleError("power-law test on a constant sample");
    return h;
}

} // namespace

double hurwitz_zeta(double s, double q)
{
    // Euler-Maclaurin summation: direct terms until q + N >= 15, then the
    // integral, half-term and Bernoulli corrections.
    static constexpr double bernoulli_over_factorial[] = {
        1.0 / 6.0 / 2.0,                   // B2 / 2!
        -1.0 / 30.0 / 24.0,                // B4 / 4!
        1.0 / 42.0 / 720.0,                // B6 / 6!
        -1.0 / 30.0 / 40320.0,             // B8 / 8!
        5.0 / 66.0 / 3628800.0,            // B10 / 10!
        -691.0 / 2730.0 / 479001600.0,     // B12 / 12!
        7.0 / 6.0 / 87178291200.0,         // B14 / 14!
        -3617.0 / 510.0 / 20922789888000.0 // B16 / 16!
    };
    if (!(s > 1.0) || !(q > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    static const auto small_logs = [] {
        std::array<double, 16> t{};
        for (std::size_t k = 1; k < t.size(); ++k)
            t[k] = std::log(static_cast<double>(k));
        return t;
    }();
    double sum = 0.0;
    double a = q;
    const bool integral = q == std::floor(q);
    while (a < 15.0) {
        sum += integral ? std::exp(-s * small_logs[static_cast<std::size_t>(a)]) : std::pow(a, -s);
        a += 1.0;
    }
    const double a_pow = std::pow(a, -s);
    sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
    double rising = s;           // s (s+1) ... (s + 2j - 2)
    double term_pow = a_pow / a; // a^{-s-2j+1}, j = 1
    const double inv_a2 = 1.0 / (a * a);
    for (std::size_t j = 0; j < std::size(bernoulli_over_factorial); ++j) {
        sum += bernoulli_over_factorial[j] * rising * term_pow;
        rising *= (s + 2.0 * static_cast<double>(j) + 1.0) * (s + 2.0 * static_cast<double>(j) + 2.0);
        term_pow *= inv_a2;
    }
    return sum;
}

DiscretePowerLawSampler::DiscretePowerLawSampler(double alpha, std::uint64_t xmin)
    : alpha_(alpha), xmin_(xmin), z0_(hurwitz_zeta(alpha, static_cast<double>(xmin)))
{
    survival_.reserve(1024);
    survival_.push_back(1.0);
}

void DiscretePowerLawSampler::extend(double u)
{
    while (survival_.size() <= sampler_table && survival_.back() >= u) {
        const std::size_t i = survival_.size();
        // Periodic direct evaluation limits accumulated rounding in the recursion.
        if (i % 1024 == 0)
            survival_.push_back(hurwitz_zeta(alpha_, static_cast<double>(xmin_ + i)) / z0_);
        else
            survival_.push_back(survival_.back() - std::pow(static_cast<double>(xmin_ + i - 1), -alpha_) / z0_);
    }
}

std::uint64_t DiscretePowerLawSampler::operator()(double u)
{
    // X = x  iff  S(x) >= u > S(x + 1)
    extend(u);
    if (u <= survival_.back()) {
        // Beyond the table: continuous approximation of the remaining tail.
        const double cap = static_cast<double>(xmin_ + sampler_table);
        const double x = (cap - 0.5) * std::pow(u / survival_.back(), -1.0 / (alpha_ - 1.0)) + 0.5;
        constexpr double max_value = 1e18;
        return static_cast<std::uint64_t>(std::min(std::floor(x), max_value));
    }
    // Most draws land near xmin, so scan a few entries before bisecting.
    constexpr std::size_t scan = 16;
    for (std::size_t i = 1; i < std::min(scan, survival_.size()); ++i)
        if (survival_[i] < u)
            return xmin_ + i - 1;
    auto it = std::partition_point(survival_.begin(), survival_.end(), [&](double s) { return s >= u; });
    return xmin_ + static_cast<std::uint64_t>(it - survival_.begin()) - 1;
}

PowerLawFit powerlaw_fit(std::span<const std::uint32_t> xs)
{
    const auto h = checked_histogram(xs);
    auto fit = fit_histogram(h);
    if (!fit)
        throw DegenerateSampleError("no power-law cutoff leaves a non-degenerate tail");
    return to_result(h, *fit);
}

PowerLawFit powerlaw_ks_test(std::span<const std::uint32_t> xs, std::size_t n_bootstrap, std::uint64_t seed)
{
    if (n_bootstrap == 0)
        throw std::invalid_argument("power-law test needs at least one bootstrap replicate");
    const auto h = checked_histogram(xs);
    const auto fit = fit_histogram(h);
    if (!fit)
        throw DegenerateSampleError("no power-law cutoff leaves a non-degenerate tail");
    auto result = to_result(h, *fit);

    std::vector<std::uint64_t> body;
    for (std::size_t i = 0; i < fit->first; ++i)
        body.insert(body.end(), h.counts[i], h.values[i]);
    const double tail_share = static_cast<double>(fit->n_tail) / static_cast<double>(h.n);
    DiscretePowerLawSampler sampler(fit->alpha, result.xmin);

    std::size_t at_least = 0;
    std::vector<std::uint64_t> sample(h.n);
    for (std::size_t r = 0; r < n_bootstrap; ++r) {
        Rng rng(derive_seed(seed, "powerlaw-bootstrap", r));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto &x : sample) {
            if (body.empty() || unit(rng) < tail_share)
                x = sampler(1.0 - unit(rng)); // (0, 1]
            else
                x = body[std::uniform_int_distribution<std::size_t>(0, body.size() - 1)(rng)];
        }
        const Histogram synthetic(sample);
        const auto refit = fit_histogram(synthetic);
        // A degenerate replicate cannot be refitted; it counts as at least as extreme.
        if (!refit || refit->ks >= fit->ks)
            ++at_least;
    }
    result.p_value = static_cast<double>(at_least) / static_cast<double>(n_bootstrap);
    return result;
}

} // namespace btcnet
