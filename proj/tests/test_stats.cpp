#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "loggas/io.hpp"
#include "loggas/rng.hpp"
#include "loggas/stats.hpp"

using namespace loggas;

TEST_CASE("mean and variance on a known set") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const MeanVar mv = mean_var(x);
    CHECK(mv.mean == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(mv.var == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(mv.n == 4);
    CHECK(stderr_iid(x) == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-15));
    CHECK_THROWS_AS(mean_var({}), std::invalid_argument);
    CHECK(mean_var({7.0}).var == 0.0);
}

TEST_CASE("covariance matches hand computation and validates input") {
    const std::vector<double> x = {1.0, 2.0, 3.0};
    const std::vector<double> y = {2.0, 4.0, 9.0};
    // Means 2 and 5; sum of products (−1)(−3)+0+1·4 = 7; /(n−1) = 3.5.
    CHECK(covariance(x, y) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK_THROWS_AS(covariance(x, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(covariance({1.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("skewness and kurtosis vanish for symmetric light-tailed data") {
    RngStream rng(11, 0);
    std::vector<double> x(20000);
    for (auto& v : x) v = rng.normal();
    CHECK(std::fabs(skewness(x)) < 4.0 * std::sqrt(6.0 / x.size()));
    CHECK(std::fabs(excess_kurtosis(x)) < 4.0 * std::sqrt(24.0 / x.size()));
    // Exponential data: skewness 2, excess kurtosis 6.
    std::vector<double> e(20000);
    for (auto& v : e) v = -std::log(rng.uniform01());
    CHECK(skewness(e) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(excess_kurtosis(e) == doctest::Approx(6.0).epsilon(0.25));
}

TEST_CASE("variance stderr: Var(s^2) for normal data is about 2 sigma^4/n") {
    RngStream rng(12, 0);
    const std::size_t n = 40000;
    std::vector<double> x(n);
    for (auto& v : x) v = 3.0 * rng.normal();
    const double se = variance_stderr(x);
    const double expect = std::sqrt(2.0 * 81.0 / static_cast<double>(n));
    CHECK(se == doctest::Approx(expect).epsilon(0.15));
    const MeanVar mv = mean_var(x);
    CHECK(std::fabs(mv.var - 9.0) < 5.0 * se);
}

TEST_CASE("ESS is near n for independent draws and near n/iact for an AR(1) chain") {
    RngStream rng(13, 0);
    const std::size_t n = 50000;
    std::vector<double> iid(n);
    for (auto& v : iid) v = rng.normal();
    const double ess_iid = ess_geyer(iid);
    CHECK(ess_iid > 0.8 * n);
    CHECK(ess_iid <= static_cast<double>(n));

    // AR(1) with phi = 0.9: integrated autocorrelation time (1+phi)/(1-phi) = 19.
    std::vector<double> ar(n);
    double s = 0.0;
    for (auto& v : ar) {
        s = 0.9 * s + rng.normal();
        v = s;
    }
    const double tau = iact(ar);
    CHECK(tau == doctest::Approx(19.0).epsilon(0.25));
    CHECK(ess_geyer(ar) == doctest::Approx(n / tau).epsilon(1e-12));
}

TEST_CASE("batch-means stderr agrees with iid stderr on independent chains") {
    RngStream rng(14, 0);
    std::vector<std::vector<double>> chains(4, std::vector<double>(5000));
    std::vector<double> merged;
    for (auto& c : chains)
        for (auto& v : c) {
            v = rng.normal();
            merged.push_back(v);
        }
    const double se_b = stderr_batch(chains);
    const double se_i = stderr_iid(merged);
    CHECK(se_b == doctest::Approx(se_i).epsilon(0.25));
    // Correlated chains: batch means must report a larger error than naive iid.
    std::vector<std::vector<double>> slow(4, std::vector<double>(5000));
    for (auto& c : slow) {
        double s = 0.0;
        for (auto& v : c) {
            s = 0.95 * s + rng.normal();
            v = s;
        }
    }
    std::vector<double> slow_merged;
    for (const auto& c : slow) slow_merged.insert(slow_merged.end(), c.begin(), c.end());
    CHECK(stderr_batch(slow) > 2.0 * stderr_iid(slow_merged));
}

TEST_CASE("Wilson interval brackets the true proportion and stays in [0,1]") {
    const WilsonInterval w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.40383).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.59617).epsilon(1e-3));
    const WilsonInterval z = wilson_interval(0, 100);
    CHECK(z.lo == 0.0);
    CHECK(z.hi > 0.0);
    CHECK(z.hi < 0.05);
    const WilsonInterval one = wilson_interval(100, 100);
    CHECK(one.hi == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.lo > 0.95);
}

TEST_CASE("KS statistic: zero for identical samples, near shift mass for shifted ones") {
    RngStream rng(15, 0);
    std::vector<double> a(2000), b(2000), c(2000);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    for (auto& v : c) v = rng.normal() + 2.0;
    CHECK(ks_statistic(a, a) == 0.0);
    CHECK(ks_statistic(a, b) < ks_critical_1pct(a.size(), b.size()));
    CHECK(ks_statistic(a, c) > 0.5);
    CHECK(ks_critical_1pct(100, 100) == doctest::Approx(1.628 * std::sqrt(0.02)).epsilon(1e-12));
}

TEST_CASE("least squares recovers an exact line") {
    const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> y;
    for (const double v : x) y.push_back(-2.0 * v + 0.5);
    const SlopeFit f = least_squares(x, y);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(least_squares({1.0}, {2.0}), std::invalid_argument);
    CHECK_THROWS_AS(least_squares({1.0, 1.0}, {2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("float formatting round-trips and CSV quoting follows RFC 4180") {
    CHECK(std::strtod(fmt(0.1).c_str(), nullptr) == 0.1);
    CHECK(std::strtod(fmt(-1.0 / 3.0).c_str(), nullptr) == -1.0 / 3.0);
    CHECK(std::strtod(fmt(1e300).c_str(), nullptr) == 1e300);
    CHECK(fmt(2.0) == "2");
    CHECK(csv_quote("plain") == "plain");
    CHECK(csv_quote("a,b") == "\"a,b\"");
    CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_quote("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("parallel_for is deterministic across thread counts and propagates exceptions") {
    const std::size_t n = 1000;
    std::vector<double> one(n), four(n);
    parallel_for(n, 1, [&](std::size_t i) { one[i] = std::sin(static_cast<double>(i)); });
    parallel_for(n, 4, [&](std::size_t i) { four[i] = std::sin(static_cast<double>(i)); });
    CHECK(one == four);
    CHECK_THROWS_WITH(parallel_for(8, 3,
                                   [](std::size_t i) {
                                       if (i == 5) throw std::runtime_error("worker failure");
                                   }),
                      "worker failure");
}

TEST_CASE("thread budget: explicit request wins, else environment variable") {
    CHECK(thread_budget(3) == 3);
    setenv("LOGGAS_THREADS", "2", 1);
    CHECK(thread_budget(0) == 2);
    unsetenv("LOGGAS_THREADS");
    CHECK(thread_budget(0) >= 1);
}
