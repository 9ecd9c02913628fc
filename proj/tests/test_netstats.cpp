#include "btcnet/error.hpp"
#include "btcnet/netstats.hpp"
#include "btcnet/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace btcnet;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<std::uint32_t> power_law_sample(double alpha, std::size_t n, std::uint64_t seed)
{
    DiscretePowerLawSampler sampler(alpha, 1);
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::uint32_t> xs(n);
    for (auto &x : xs)
        x = static_cast<std::uint32_t>(sampler(1.0 - u(rng)));
    return xs;
}

} // namespace

TEST_CASE("moments of small samples")
{
    const std::vector<std::uint32_t> constant{5, 5, 5};
    const auto c = moments(constant);
    CHECK(c.mean == 5.0);
    CHECK(c.stddev == 0.0);
    CHECK_FALSE(c.skewness);
    CHECK_FALSE(c.kurtosis);

    const std::vector<std::uint32_t> abc{1, 2, 3};
    const auto m = moments(abc);
    CHECK(m.mean == doctest::Approx(2.0));
    CHECK(m.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(*m.skewness == doctest::Approx(0.0));
    CHECK(*m.kurtosis == doctest::Approx(1.5));

    const std::vector<double> symmetric{-3, -1, 0, 0, 1, 3, 10, 10, 10, 10};
    std::vector<double> mirrored = symmetric;
    for (double x : symmetric)
        mirrored.push_back(-x);
    CHECK(std::abs(*moments(std::span<const double>(mirrored)).skewness) < 1e-12);

    CHECK_THROWS_AS(moments(std::span<const std::uint32_t>{}), std::invalid_argument);
    CHECK(moments(std::vector<std::uint32_t>{42}).n == 1);
}

TEST_CASE("moments agree with the two-pass computation")
{
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 1 + rng() % 20000;
        std::vector<std::uint32_t> xs(n);
        std::geometric_distribution<std::uint32_t> geo(0.05 + 0.9 * static_cast<double>(rep) / 30);
        for (auto &x : xs)
            x = geo(rng) + (rep % 3 == 0 ? 1000000u : 0u);
        const auto m = moments(xs);
        const auto o = oracle::naive_moments(xs);
        CHECK(rel_err(m.mean, o.mean) <= 1e-10);
        CHECK(rel_err(m.stddev, o.sd) <= 1e-10);
        if (o.sd > 0) {
            CHECK(rel_err(*m.skewness, o.skew) <= 1e-10);
            CHECK(rel_err(*m.kurtosis, o.kurt) <= 1e-10);
        }
    }
}

TEST_CASE("moments shift and scale")
{
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::uint32_t> xs(500), shifted(500), scaled(500);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xs[i] = static_cast<std::uint32_t>(rng() % 50);
            shifted[i] = xs[i] + 17;
            scaled[i] = xs[i] * 3;
        }
        const auto a = moments(xs), b = moments(shifted), c = moments(scaled);
        CHECK(std::abs(b.mean - (a.mean + 17)) <= 1e-12 * b.mean);
        CHECK(std::abs(b.stddev - a.stddev) <= 1e-12 * a.stddev);
        CHECK(std::abs(*b.skewness - *a.skewness) <= 1e-10);
        CHECK(std::abs(*b.kurtosis - *a.kurtosis) <= 1e-10);
        CHECK(std::abs(c.stddev - 3 * a.stddev) <= 1e-9 * c.stddev);
        CHECK(std::abs(*c.skewness - *a.skewness) <= 1e-9);
        CHECK(std::abs(*c.kurtosis - *a.kurtosis) <= 1e-9);
    }
}

TEST_CASE("nearest-rank percentiles")
{
    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i)
        hundred.push_back(i);
    const std::vector<double> levels{0.5, 0.95, 0.99, 0.01, 0.333};
    const auto p = percentiles(std::span<const double>(hundred), levels);
    CHECK(p == std::vector<double>{50, 95, 99, 1, 34});

    const std::vector<double> seven{7};
    CHECK(percentiles(std::span<const double>(seven), levels) == std::vector<double>(5, 7));
    const std::vector<double> bad{1.0};
    CHECK_THROWS(percentiles(std::span<const double>(seven), bad));
    const std::vector<double> zero{0.0};
    CHECK_THROWS(percentiles(std::span<const double>(seven), zero));
    CHECK_THROWS(percentiles(std::span<const double>{}, levels));

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> xs(1 + rng() % 300);
        for (auto &x : xs)
            x = static_cast<double>(rng() % 1000);
        const std::vector<double> q{std::uniform_real_distribution<double>(0.001, 0.999)(rng)};
        CHECK(percentiles(std::span<const double>(xs), q)[0] == oracle::nearest_rank(xs, q[0]));
    }
}

TEST_CASE("Hurwitz zeta")
{
    CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(M_PI * M_PI / 6).epsilon(1e-13));
    CHECK(hurwitz_zeta(4.0, 1.0) == doctest::Approx(std::pow(M_PI, 4) / 90).epsilon(1e-13));
    for (double s : {1.1, 1.5, 2.5, 3.7})
        for (double q : {1.0, 2.0, 7.0, 40.0})
            CHECK(hurwitz_zeta(s, q) == doctest::Approx(oracle::hurwitz_direct(s, q)).epsilon(1e-9));
}

TEST_CASE("sampler follows the discrete power law")
{
    DiscretePowerLawSampler sampler(2.5, 3);
    CHECK(sampler(1.0) == 3);
    const auto xs = power_law_sample(2.5, 200000, 4);
    std::size_t ones = 0, twos = 0;
    for (auto x : xs) {
        ones += x == 1;
        twos += x == 2;
    }
    const double z = hurwitz_zeta(2.5, 1.0);
    CHECK(static_cast<double>(ones) / 200000 == doctest::Approx(1.0 / z).epsilon(0.01));
    CHECK(static_cast<double>(twos) / 200000 == doctest::Approx(std::pow(2.0, -2.5) / z).epsilon(0.03));
}

TEST_CASE("power-law fit recovers the exponent")
{
    for (double alpha : {2.0, 2.5, 3.0}) {
        const auto fit = powerlaw_fit(power_law_sample(alpha, 20000, 7));
        CHECK(fit.alpha == doctest::Approx(alpha).epsilon(0.05));
        CHECK(fit.alpha > 1.0);
        CHECK(fit.n == 20000);
        CHECK(fit.n_tail <= fit.n);
    }
}

TEST_CASE("power-law test rejects small or degenerate samples")
{
    CHECK_THROWS_AS(powerlaw_ks_test(std::vector<std::uint32_t>(10, 3), 10, 1), DegenerateSampleError);
    CHECK_THROWS_AS(powerlaw_ks_test(std::vector<std::uint32_t>(100, 3), 10, 1), DegenerateSampleError);
}

TEST_CASE("power-law test is reproducible and bounded")
{
    const auto xs = power_law_sample(2.5, 2000, 9);
    const auto a = powerlaw_ks_test(xs, 100, 5);
    const auto b = powerlaw_ks_test(xs, 100, 5);
    CHECK(a.p_value == b.p_value);
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
    CHECK(a.ks_distance == b.ks_distance);
}

TEST_CASE("power-law p-values are roughly uniform under the null")
{
    int rejected = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const auto xs = power_law_sample(2.5, 500, derive_seed(21, "null", static_cast<std::uint64_t>(r)));
        rejected += powerlaw_ks_test(xs, 100, static_cast<std::uint64_t>(r)).p_value < 0.05;
    }
    const double rate = static_cast<double>(rejected) / reps;
    MESSAGE("null rejection rate " << rate);
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.10);
}
