#include "btcnet/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace btcnet {

namespace {

/// Streaming central-moment update (Pebay 2008, one sample at a time).
class MomentAccumulator {
  public:
    void push(double x)
    {
        const double n1 = static_cast<double>(n_);
        ++n_;
        const double n = static_cast<double>(n_);
        const double delta = x - mean_;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean_ += delta_n;
        m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
        m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
        m2_ += term1;
    }

    MomentSet result() const
    {
        if (n_ == 0)
            throw std::invalid_argument("moments of an empty sample");
        MomentSet m;
        m.n = n_;
        m.mean = mean_;
        const double n = static_cast<double>(n_);
        const double c2 = m2_ / n;
        m.stddev = std::sqrt(std::max(c2, 0.0));
        if (c2 > 0.0) {
            m.skewness = (m3_ / n) / std::pow(c2, 1.5);
            m.kurtosis = (m4_ / n) / (c2 * c2);
        }
        return m;
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

template <typename T> MomentSet moments_of(std::span<const T> xs)
{
    MomentAccumulator acc;
    for (auto x : xs)
        acc.push(static_cast<double>(x));
    return acc.result();
}

template <typename T> std::vector<T> nearest_rank(std::span<const T> xs, std::span<const double> levels)
{
    if (xs.empty())
        throw std::invalid_argument("percentiles of an empty sample");
    for (double q : levels)
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("percentile level must lie in (0,1)");
    std::vector<T> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<T> out;
    out.reserve(levels.size());
    const double n = static_cast<double>(sorted.size());
    for (double q : levels) {
        // Guard against q*n landing just above an integer through rounding.
        auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, sorted.size());
        out.push_back(sorted[rank - 1]);
    }
    return out;
}

} // namespace

MomentSet moments(std::span<const std::uint32_t> xs) { return moments_of(xs); }
MomentSet moments(std::span<const double> xs) { return moments_of(xs); }

std::vector<double> percentiles(std::span<const double> xs, std::span<const double> levels)
{
    return nearest_rank(xs, levels);
}

std::vector<std::uint32_t> percentiles(std::span<const std::uint32_t> xs, std::span<const double> levels)
{
    return nearest_rank(xs, levels);
}

} // namespace btcnet
