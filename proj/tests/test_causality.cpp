#include "btcnet/causality.hpp"
#include "btcnet/error.hpp"
#include "btcnet/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace btcnet;

namespace {

std::vector<double> noise(std::size_t n, Rng &rng)
{
    std::normal_distribution<double> n01;
    std::vector<double> x(n);
    for (auto &v : x)
        v = n01(rng);
    return x;
}

Eigen::MatrixXd columns(const std::vector<std::vector<double>> &cols)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(cols[0].size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t t = 0; t < cols[c].size(); ++t)
            m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = cols[c][t];
    return m;
}

TailIndicator indicator(const std::vector<int> &bits)
{
    TailIndicator ind;
    for (int b : bits) {
        ind.events.push_back(static_cast<std::uint8_t>(b));
        ind.quantile.push_back(0.0);
    }
    return ind;
}

const CausalityResult &row(const CausalityReport &r, const std::string &cause, const std::string &effect)
{
    for (const auto &x : r.rows)
        if (x.cause == cause && x.effect == effect)
            return x;
    throw std::out_of_range("no row");
}

} // namespace

TEST_CASE("F test arithmetic")
{
    const auto f = nested_f_test(120.0, 100.0, 4, 200);
    CHECK(f.statistic == doctest::Approx((20.0 / 4) / (100.0 / 200)));
    CHECK(f.df1 == 4);
    CHECK(f.df2 == 200);
    CHECK(f.p_value > 0.0);
    CHECK(f.p_value < 1e-6);
    CHECK(nested_f_test(100.0, 100.0, 4, 200).p_value == doctest::Approx(1.0));
    CHECK_THROWS_AS(nested_f_test(1.0, 0.0, 1, 10), DegenerateSampleError);
}

TEST_CASE("VAR recovers a known VAR(1)")
{
    Eigen::Matrix2d a;
    a << 0.5, 0.2, -0.3, 0.4;
    Eigen::Matrix2d mean_b = Eigen::Matrix2d::Zero();
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(derive_seed(3, "var1", static_cast<std::uint64_t>(s)));
        std::normal_distribution<double> n01;
        Eigen::MatrixXd data(5000, 2);
        Eigen::Vector2d x(0, 0);
        for (Eigen::Index t = 0; t < 5000; ++t) {
            x = a * x + Eigen::Vector2d(n01(rng), n01(rng)) + Eigen::Vector2d(1.0, -2.0);
            data.row(t) = x.transpose();
        }
        const auto m = fit_var(data, 1);
        CHECK(m.observations() == 4999);
        CHECK(m.rss.size() == 2);
        mean_b += m.coefficients[0] / seeds;
    }
    CHECK(((mean_b - a).cwiseAbs().maxCoeff()) <= 0.05);
}

TEST_CASE("VAR argument checks")
{
    Rng rng(1);
    const auto data = columns({noise(50, rng), noise(50, rng)});
    CHECK_THROWS_AS(fit_var(data, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_var(data.topRows(5), 3), std::invalid_argument);
    auto constant = data;
    constant.col(1).setConstant(2.0);
    CHECK_THROWS_AS(fit_var(constant, 1), RankDeficientError);
}

TEST_CASE("bivariate Granger basics")
{
    Rng rng(2);
    auto x = noise(500, rng);
    auto e = noise(500, rng);
    std::vector<double> y(500);
    for (std::size_t t = 1; t < 500; ++t)
        y[t] = 0.8 * x[t - 1] + e[t];
    const auto f = bivariate_granger(x, y, 4);
    CHECK(f.p_value < 1e-10);
    CHECK(f.df1 == 4);
    CHECK(f.df2 == 500 - 4 - 2 * 4 - 1);
    CHECK(bivariate_granger(y, x, 4).p_value > 1e-4);

    const std::vector<double> flat(500, 3.0);
    CHECK_THROWS_AS(bivariate_granger(flat, y, 4), RankDeficientError);
    CHECK_THROWS_AS(bivariate_granger(std::span(x).first(16), std::span(y).first(16), 4), std::invalid_argument);
    CHECK_NOTHROW(bivariate_granger(std::span(x).first(17), std::span(y).first(17), 4));
    CHECK_THROWS_AS(bivariate_granger(x, y, 0), std::invalid_argument);
}

TEST_CASE("bivariate equals the two-column conditional test")
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(derive_seed(4, "pair", s));
        auto x = noise(300, rng);
        auto y = noise(300, rng);
        for (std::size_t t = 2; t < 300; ++t)
            y[t] += 0.3 * x[t - 2];
        const std::vector<std::string> names{"x", "y"};
        const auto rep = multivariate_granger(columns({x, y}), names, 3);
        const auto f = bivariate_granger(x, y, 3);
        CHECK(std::abs(row(rep, "x", "y").statistic.value() - f.statistic) <= 1e-9 * std::max(1.0, f.statistic));
        CHECK(std::abs(row(rep, "x", "y").p_value.value() - f.p_value) <= 1e-9);
        const auto g = bivariate_granger(y, x, 3);
        CHECK(std::abs(row(rep, "y", "x").p_value.value() - g.p_value) <= 1e-9);
    }
}

TEST_CASE("p-values are invariant under positive affine maps")
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(derive_seed(5, "affine", s));
        auto x = noise(250, rng), y = noise(250, rng), z = noise(250, rng);
        for (std::size_t t = 1; t < 250; ++t)
            y[t] += 0.2 * x[t - 1];
        auto x2 = x, y2 = y;
        for (auto &v : x2)
            v = 1e3 * v + 42.0;
        for (auto &v : y2)
            v = 0.01 * v - 7.0;
        CHECK(std::abs(bivariate_granger(x, y, 2).p_value - bivariate_granger(x2, y2, 2).p_value) <= 1e-8);
        const std::vector<std::string> names{"x", "y", "z"};
        const auto a = multivariate_granger(columns({x, y, z}), names, 2);
        const auto b = multivariate_granger(columns({x2, y2, z}), names, 2);
        for (std::size_t k = 0; k < a.rows.size(); ++k) {
            CHECK(std::abs(*a.rows[k].p_value - *b.rows[k].p_value) <= 1e-8);
            CHECK(a.rows[k].sign == b.rows[k].sign);
        }
    }
}

TEST_CASE("conditional test sign and direct link among nuisance series")
{
    int detected = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(derive_seed(6, "direct", static_cast<std::uint64_t>(s)));
        auto x = noise(300, rng);
        auto y = noise(300, rng);
        for (std::size_t t = 1; t < 300; ++t)
            y[t] -= 0.7 * x[t - 1];
        const std::vector<std::string> names{"x", "y", "n1", "n2", "n3", "n4"};
        const auto rep = multivariate_granger(
            columns({x, y, noise(300, rng), noise(300, rng), noise(300, rng), noise(300, rng)}), names, 2);
        CHECK(rep.rows.size() == 30);
        const auto &xy = row(rep, "x", "y");
        detected += *xy.p_value < 0.05;
        CHECK(xy.sign == -1);
    }
    CHECK(detected >= 45);
}

TEST_CASE("conditional test argument checks")
{
    Rng rng(7);
    const std::vector<std::string> names{"a", "b", "c"};
    const auto data = columns({noise(40, rng), noise(40, rng), noise(40, rng)});
    CHECK_THROWS_AS(multivariate_granger(data, names, 0), std::invalid_argument);
    CHECK_THROWS_AS(multivariate_granger(data.topRows(18), names, 3), std::invalid_argument);
    CHECK_NOTHROW(multivariate_granger(data.topRows(19), names, 3));
    // n tau + 10 rows leave no residual degrees of freedom once tau reaches 9
    CHECK_THROWS_AS(multivariate_granger(data, names, 10), std::invalid_argument);
    auto flat = data;
    flat.col(2).setConstant(1.0);
    CHECK_THROWS_AS(multivariate_granger(flat, names, 2), RankDeficientError);
}

TEST_CASE("Davis quantile reduces to the rolling order statistic without feedback")
{
    Rng rng(8);
    const auto x = noise(400, rng);
    for (std::size_t window : {1u, 9u, 30u}) {
        for (double alpha : {0.1, 0.5, 0.9}) {
            const auto q = davis_conditional_quantile(x, alpha, window, 0.0);
            for (std::size_t t = 0; t < x.size(); ++t) {
                if (t < window) {
                    CHECK_FALSE(q[t]);
                    continue;
                }
                std::vector<double> past(x.begin() + static_cast<std::ptrdiff_t>(t - window),
                                         x.begin() + static_cast<std::ptrdiff_t>(t));
                CHECK(*q[t] == oracle::nearest_rank(past, alpha));
            }
        }
    }
}

TEST_CASE("Davis feedback moves the quantile against miscalibration")
{
    // Steadily rising data exceeds the trailing quantile every time.
    std::vector<double> x(100);
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = static_cast<double>(t);
    const auto plain = davis_conditional_quantile(x, 0.9, 10, 0.0);
    const auto fed = davis_conditional_quantile(x, 0.9, 10, 0.5);
    CHECK(*fed[10] == *plain[10]);
    CHECK(*fed[11] == doctest::Approx(*plain[11] + 0.5 * (1.0 - 0.1)));
    CHECK_THROWS(davis_conditional_quantile(x, 1.0, 10, 0.1));
}

TEST_CASE("tail indicator")
{
    const std::vector<double> x{1, 2, 3, 4, 5};
    const Series q{std::nullopt, 2.0, 2.0, 10.0, 5.0};
    const auto right = tail_indicator(x, q, TailSide::right);
    CHECK_FALSE(right.events[0]);
    CHECK(*right.events[1] == 0); // equal is not beyond
    CHECK(*right.events[2] == 1);
    CHECK(*right.events[3] == 0);
    CHECK(*right.events[4] == 0);
    const auto left = tail_indicator(x, q, TailSide::left);
    CHECK(*left.events[1] == 0);
    CHECK(*left.events[3] == 1);
    CHECK_THROWS(tail_indicator(x, Series(3), TailSide::left));

    Rng rng(9);
    const auto y = noise(300, rng);
    const auto ev = tail_events(y, TailSide::right, 0.9, 30, 0.1);
    for (std::size_t t = 0; t < y.size(); ++t) {
        REQUIRE(ev.events[t].has_value() == ev.quantile[t].has_value());
        if (ev.events[t])
            CHECK(*ev.events[t] == (y[t] > *ev.quantile[t] ? 1 : 0));
    }
}

TEST_CASE("Daniell kernel")
{
    CHECK(daniell_kernel(0.0) == 1.0);
    CHECK(std::abs(daniell_kernel(1.0)) < 1e-15);
    CHECK(daniell_kernel(0.5) == doctest::Approx(2.0 / M_PI));
    CHECK(daniell_kernel(-0.3) == daniell_kernel(0.3));
}

TEST_CASE("Hong test on perfectly lagged indicators")
{
    Rng rng(10);
    std::bernoulli_distribution b(0.1);
    std::vector<int> z(1000), w(1000);
    for (auto &v : z)
        v = b(rng);
    for (std::size_t t = 1; t < z.size(); ++t)
        w[t] = z[t - 1];
    const auto h = hong_tail_test(indicator(z), indicator(w), 5.0);
    CHECK(h.p_value < 1e-3);
    CHECK(h.cross_correlation[0] == doctest::Approx(1.0).epsilon(0.01));
    CHECK(h.sign == 1);
    CHECK(h.scaling > 0.0);
    CHECK(h.length == 1000);

    // the opposite direction is a different test
    const auto back = hong_tail_test(indicator(w), indicator(z), 5.0);
    CHECK(back.q != h.q);
    CHECK(back.p_value > h.p_value);
}

TEST_CASE("Hong test constants")
{
    Rng rng(11);
    std::bernoulli_distribution b(0.2);
    std::vector<int> z(200), w(200);
    for (std::size_t t = 0; t < 200; ++t) {
        z[t] = b(rng);
        w[t] = b(rng);
    }
    const double m = 4.0;
    const auto h = hong_tail_test(indicator(z), indicator(w), m);
    double c = 0, d = 0;
    for (double l = 1; l < 200; ++l) {
        const double k = daniell_kernel(l / m);
        c += (1 - l / 200) * k * k;
        d += 2 * (1 - l / 200) * (1 - (l + 1) / 200) * k * k * k * k;
    }
    CHECK(h.centering == doctest::Approx(c).epsilon(1e-12));
    CHECK(h.scaling == doctest::Approx(d).epsilon(1e-12));
    CHECK(h.p_value >= 0.0);
    CHECK(h.p_value <= 1.0);
}

TEST_CASE("Hong test preconditions")
{
    std::vector<int> zeros(100, 0), mixed(100, 0);
    mixed[10] = 1;
    CHECK_THROWS_AS(hong_tail_test(indicator(zeros), indicator(mixed), 5.0), DegenerateSampleError);
    CHECK_THROWS_AS(hong_tail_test(indicator(mixed), indicator(std::vector<int>(100, 1)), 5.0),
                    DegenerateSampleError);
    std::vector<int> short_a(19, 0), short_b(19, 0);
    short_a[3] = short_b[4] = 1;
    CHECK_THROWS(hong_tail_test(indicator(short_a), indicator(short_b), 5.0));
    short_a.push_back(0);
    short_b.push_back(0);
    CHECK_NOTHROW(hong_tail_test(indicator(short_a), indicator(short_b), 5.0));
}

TEST_CASE("Hong test drops the undefined prefix")
{
    Rng rng(12);
    std::bernoulli_distribution b(0.3);
    std::vector<int> z(120), w(120);
    for (std::size_t t = 0; t < 120; ++t) {
        z[t] = b(rng);
        w[t] = b(rng);
    }
    auto a = indicator(z), c = indicator(w);
    for (std::size_t t = 0; t < 20; ++t)
        a.events[t] = std::nullopt;
    const auto h = hong_tail_test(a, c, 3.0);
    CHECK(h.length == 100);
    const auto h2 = hong_tail_test(indicator(std::vector<int>(z.begin() + 20, z.end())),
                                   indicator(std::vector<int>(w.begin() + 20, w.end())), 3.0);
    CHECK(h.q == doctest::Approx(h2.q).epsilon(1e-12));
}

TEST_CASE("Benjamini-Hochberg examples")
{
    CHECK(benjamini_hochberg(std::vector<double>{0.001}, 0.05) == std::vector<std::size_t>{0});
    CHECK(benjamini_hochberg(std::vector<double>{0.01, 0.02, 0.03, 0.9}, 0.05) == std::vector<std::size_t>{0, 1, 2});
    CHECK(benjamini_hochberg(std::vector<double>(5, 1.0), 0.05).empty());
    CHECK(benjamini_hochberg(std::vector<double>{}, 0.05).empty());
    CHECK_THROWS(benjamini_hochberg(std::vector<double>{0.5, 1.2}, 0.05));
    CHECK_THROWS(benjamini_hochberg(std::vector<double>{-0.1}, 0.05));
}

TEST_CASE("Benjamini-Hochberg matches the counting definition and is monotone")
{
    Rng rng(13);
    std::uniform_real_distribution<double> u;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(1 + rng() % 60);
        for (auto &x : p)
            x = rep % 2 ? std::pow(u(rng), 3.0) : std::round(u(rng) * 20) / 20;
        CHECK(benjamini_hochberg(p, 0.05) == oracle::bh_bruteforce(p, 0.05));
        const auto lo = benjamini_hochberg(p, 0.02), hi = benjamini_hochberg(p, 0.2);
        CHECK(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
    }
}

TEST_CASE("FDR is applied per test kind and report CSV")
{
    CausalityReport rep;
    auto add = [&](TestKind k, std::optional<double> p) {
        CausalityResult r;
        r.cause = "a";
        r.effect = "b";
        r.kind = k;
        r.tau_or_m = 2;
        r.p_value = p;
        if (p)
            r.statistic = 1.5;
        r.sign = p ? -1 : 0;
        rep.rows.push_back(r);
    };
    add(TestKind::mean_bivariate, 0.01);
    add(TestKind::mean_bivariate, 0.04);
    add(TestKind::tail_left, 0.04);
    add(TestKind::tail_left, std::nullopt);
    apply_fdr(rep, 0.05);
    CHECK(rep.rows[0].fdr_reject);
    CHECK(rep.rows[1].fdr_reject);
    CHECK(rep.rows[2].fdr_reject); // the missing row does not count towards m
    CHECK_FALSE(rep.rows[3].fdr_reject);

    std::ostringstream out;
    write_causality_report(out, rep);
    CHECK(out.str() == "cause,effect,test,tau_or_M,statistic,p,sign,fdr_reject\n"
                       "a,b,mean-bivariate,2,1.5,0.01,-1,1\n"
                       "a,b,mean-bivariate,2,1.5,0.04,-1,1\n"
                       "a,b,tail-left,2,1.5,0.04,-1,1\n"
                       "a,b,tail-left,2,,,,0\n");
}
