#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace btcnet {

/// Population moments of a sample. Skewness and kurtosis are undefined
/// (empty) when the sample has zero variance. Kurtosis is non-excess.
struct MomentSet {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::optional<double> skewness;
    std::optional<double> kurtosis;
};

/// Single-pass moment accumulation. Throws std::invalid_argument on empty input.
MomentSet moments(std::span<const std::uint32_t> xs);
MomentSet moments(std::span<const double> xs);

/// Nearest-rank percentiles: the ceil(q n)-th smallest value for each level q in (0,1).
std::vector<double> percentiles(std::span<const double> xs, std::span<const double> levels);
std::vector<std::uint32_t> percentiles(std::span<const std::uint32_t> xs, std::span<const double> levels);

inline constexpr std::size_t powerlaw_min_sample = 50;
inline constexpr std::size_t powerlaw_default_bootstrap = 1000;

struct PowerLawFit {
    double alpha = 0.0;        ///< MLE exponent of the discrete power law
    std::uint64_t xmin = 0;    ///< lower cutoff of the fitted tail
    double ks_distance = 0.0;  ///< KS distance between tail and fitted model
    double p_value = 0.0;      ///< semi-parametric bootstrap goodness-of-fit p-value
    std::size_t n = 0;         ///< sample size
    std::size_t n_tail = 0;    ///< observations >= xmin
};

/// Hurwitz zeta function sum_{k>=0} (k + q)^-s, for s > 1 and q > 0.
double hurwitz_zeta(double s, double q);

/// Fits a discrete power law to the tail of `xs` and tests it.
///
/// The cutoff is chosen among the distinct positive values up to the 90th
/// percentile by minimising the KS distance; the exponent is the discrete
/// maximum-likelihood estimate for each cutoff. The p-value is the fraction of
/// `n_bootstrap` synthetic samples (fitted power-law tail, resampled body)
/// whose refitted KS distance is at least the observed one.
///
/// Throws DegenerateSampleError when n < powerlaw_min_sample or no cutoff
/// leaves a tail with two distinct values.
PowerLawFit powerlaw_ks_test(std::span<const std::uint32_t> xs, std::size_t n_bootstrap, std::uint64_t seed);

/// Fit without the bootstrap (p_value left at 0).
PowerLawFit powerlaw_fit(std::span<const std::uint32_t> xs);

/// Draws from the discrete power law P(x) ~ x^-alpha on x >= xmin.
class DiscretePowerLawSampler {
  public:
    DiscretePowerLawSampler(double alpha, std::uint64_t xmin);

    /// Value for a uniform draw u in (0,1] (inverse survival function).
    std::uint64_t operator()(double u);

  private:
    void extend(double u);

    double alpha_;
    std::uint64_t xmin_;
    double z0_;
    std::vector<double> survival_; ///< P(X >= xmin + i), grown on demand
};

} // namespace btcnet
