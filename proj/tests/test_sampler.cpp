#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "loggas/equilibrium.hpp"
#include "loggas/errors.hpp"
#include "loggas/potential.hpp"
#include "loggas/rng.hpp"
#include "loggas/sampler.hpp"
#include "loggas/stats.hpp"

using namespace loggas;

namespace {

double sum(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

double sum_sq(const std::vector<double>& x) {
    double s = 0.0;
    for (const double v : x) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("ensemble configuration validation") {
    EnsembleConfig c;
    CHECK_NOTHROW(c.validate());
    c.beta = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.beta = 2.0;
    c.N = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.N = 8;
    c.potential = Potential::quartic(0.0);
    CHECK_THROWS_AS(c.validate(), ConfigError);  // tridiagonal needs quadratic V
    c.method = Method::mala;
    CHECK_NOTHROW(c.validate());
    c.mcmc.thinning_sweeps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("log density and gradient: finite-difference consistency and collisions") {
    EnsembleConfig c;
    c.beta = 1.5;
    c.N = 5;
    c.potential = Potential::quartic(1.0);
    c.method = Method::mala;
    const std::vector<double> x = {-1.2, -0.5, 0.1, 0.8, 1.7};
    const std::vector<double> g = log_density_gradient(c, x);
    const double h = 1e-6;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const double fd = (log_density(c, xp) - log_density(c, xm)) / (2.0 * h);
        CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
    }
    const std::vector<double> collided = {0.0, 0.0, 0.1, 0.8, 1.7};
    CHECK(log_density(c, collided) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(log_density(c, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("tridiagonal model: eigenvalue sum equals the matrix trace") {
    const double beta = 2.0;
    const int N = 64;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        RngStream manual(42, rep);
        const double sigma = std::sqrt(2.0 / (beta * N));
        double trace = 0.0;
        for (int k = 0; k < N; ++k) trace += sigma * manual.normal();
        RngStream fresh(42, rep);
        const Sample s = sample_tridiagonal(beta, N, fresh);
        REQUIRE(static_cast<int>(s.lambdas.size()) == N);
        CHECK(sum(s.lambdas) == doctest::Approx(trace).epsilon(1e-9));
        for (int k = 1; k < N; ++k) CHECK(s.lambdas[k - 1] < s.lambdas[k]);
    }
}

TEST_CASE("tridiagonal model: Var(sum of eigenvalues) = 2/beta") {
    const double beta = 4.0;
    const int N = 10;
    RngStream rng(7, 0);
    std::vector<double> traces(4000);
    for (auto& t : traces) t = sum(sample_tridiagonal(beta, N, rng).lambdas);
    const MeanVar mv = mean_var(traces);
    const double se = variance_stderr(traces);
    CHECK(std::fabs(mv.var - 2.0 / beta) < 4.0 * se);
    CHECK(std::fabs(mv.mean) < 4.0 * stderr_iid(traces));
}

TEST_CASE("tridiagonal model: E[sum lambda^2] = N - 1 + 2/beta") {
    for (const double beta : {1.0, 2.0, 4.0}) {
        for (const int N : {2, 3}) {
            RngStream rng(19, static_cast<std::uint64_t>(10 * N + beta));
            std::vector<double> ssq(6000);
            for (auto& v : ssq) v = sum_sq(sample_tridiagonal(beta, N, rng).lambdas);
            const double expect = N - 1 + 2.0 / beta;
            CHECK(std::fabs(mean_var(ssq).mean - expect) < 4.0 * stderr_iid(ssq));
        }
    }
}

TEST_CASE("tridiagonal model: bulk fraction matches the semicircle mass of [-1,1]") {
    const int N = 256;
    RngStream rng(3, 0);
    std::vector<double> fractions(200);
    for (auto& f : fractions) {
        const Sample s = sample_tridiagonal(2.0, N, rng);
        int count = 0;
        for (const double l : s.lambdas) count += (l >= -1.0 && l <= 1.0) ? 1 : 0;
        f = static_cast<double>(count) / N;
    }
    // Semicircle mass of [-1,1] is 1/3 + sqrt(3)/(2 pi) = 0.60900 to 5 digits.
    CHECK(std::fabs(mean_var(fractions).mean - 0.6089978905221147) < 0.01);
}

TEST_CASE("MALA adapts the step to the target acceptance band and then freezes") {
    EnsembleConfig c;
    c.N = 32;
    c.method = Method::mala;
    c.mcmc.burn_in_sweeps = 2000;
    c.mcmc.thinning_sweeps = 50;
    const EquilibriumMeasure m(c.potential);
    MalaChain chain(c, m, RngStream(101, 0));
    std::vector<Sample> out;
    for (int i = 0; i < 30; ++i) out.push_back(chain.next());
    CHECK(out.front().sweep_index == 0);
    CHECK(out.back().sweep_index == 29);
    // 1500 post-freeze sweeps: the adapted rate should sit near [0.5, 0.6].
    CHECK(chain.acceptance_rate() > 0.45);
    CHECK(chain.acceptance_rate() < 0.68);
    CHECK(chain.step_size() > 0.0);
}

TEST_CASE("MALA at N=1 reproduces the single-particle Gaussian") {
    EnsembleConfig c;
    c.beta = 2.0;
    c.N = 1;
    c.method = Method::mala;
    c.mcmc.burn_in_sweeps = 200;
    c.mcmc.thinning_sweeps = 5;
    const SampleSet set = run_chains(c, 2, 1500, 5, 1);
    std::vector<std::vector<double>> chains(2);
    for (const auto& s : set.samples)
        chains[s.chain_id].push_back(s.lambdas[0] * s.lambdas[0]);
    std::vector<double> merged = chains[0];
    merged.insert(merged.end(), chains[1].begin(), chains[1].end());
    // Density exp(-lambda^2/2): E[lambda^2] = 1.
    CHECK(std::fabs(mean_var(merged).mean - 1.0) < 4.0 * stderr_batch(chains));
}

TEST_CASE("MALA agrees with the tridiagonal model on E[sum lambda^2] at N=3") {
    EnsembleConfig c;
    c.beta = 2.0;
    c.N = 3;
    c.method = Method::mala;
    c.mcmc.burn_in_sweeps = 500;
    c.mcmc.thinning_sweeps = 10;
    const SampleSet set = run_chains(c, 2, 2000, 23, 1);
    std::vector<std::vector<double>> per_chain(2);
    for (const auto& s : set.samples) per_chain[s.chain_id].push_back(sum_sq(s.lambdas));
    std::vector<double> merged = per_chain[0];
    merged.insert(merged.end(), per_chain[1].begin(), per_chain[1].end());
    const double expect = 2.0 + 2.0 / c.beta;  // N - 1 + 2/beta
    CHECK(std::fabs(mean_var(merged).mean - expect) < 4.0 * stderr_batch(per_chain));
}

TEST_CASE("MALA detailed-balance smoke: energy distribution stable across chain halves") {
    EnsembleConfig c;
    c.N = 8;
    c.method = Method::mala;
    c.mcmc.burn_in_sweeps = 500;
    c.mcmc.thinning_sweeps = 80;
    c.mcmc.step_size = 0.05;
    c.mcmc.adapt = false;
    const EquilibriumMeasure m(c.potential);
    MalaChain chain(c, m, RngStream(77, 0));
    std::vector<double> energies;
    for (int i = 0; i < 1000; ++i) energies.push_back(log_density(c, chain.next().lambdas));
    const std::vector<double> first(energies.begin(), energies.begin() + 500);
    const std::vector<double> second(energies.begin() + 500, energies.end());
    CHECK(ks_statistic(first, second) < ks_critical_1pct(500, 500));
}

TEST_CASE("run_chains: ordering, metadata, reproducibility, thread independence") {
    EnsembleConfig c;
    c.N = 16;
    const SampleSet a = run_chains(c, 3, 4, 99, 1);
    REQUIRE(a.samples.size() == 12);
    CHECK(a.rng_stream_ids == std::vector<std::uint64_t>{0, 1, 2});
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].chain_id == static_cast<int>(k / 4));
        CHECK(a.samples[k].sweep_index == static_cast<int>(k % 4));
        CHECK(a.samples[k].seed == 99);
    }
    const SampleSet b = run_chains(c, 3, 4, 99, 4);  // more threads, same result
    for (std::size_t k = 0; k < a.samples.size(); ++k)
        CHECK(a.samples[k].lambdas == b.samples[k].lambdas);
    const SampleSet d = run_chains(c, 3, 4, 100, 1);  // different seed, different draws
    CHECK(a.samples[0].lambdas != d.samples[0].lambdas);
}

TEST_CASE("sample cache: roundtrip, miss on partial set, corruption error") {
    namespace fs = std::filesystem;
    const std::string root = (fs::temp_directory_path() / "loggas_cache_test").string();
    fs::remove_all(root);
    EnsembleConfig c;
    c.N = 8;
    const SampleSet a = run_chains(c, 2, 3, 5, 1, root);
    const std::string dir = root + "/" + cache_key(c, 5);
    REQUIRE(fs::is_directory(dir));
    CHECK(fs::is_regular_file(dir + "/1_2.bin"));

    const SampleSet b = run_chains(c, 2, 3, 5, 1, root);  // cache hit
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].lambdas == b.samples[k].lambdas);
        CHECK(b.samples[k].chain_id == a.samples[k].chain_id);
        CHECK(b.samples[k].sweep_index == a.samples[k].sweep_index);
    }

    fs::remove(dir + "/0_1.bin");  // partial set: regenerate, no error
    const SampleSet r = run_chains(c, 2, 3, 5, 1, root);
    for (std::size_t k = 0; k < a.samples.size(); ++k)
        CHECK(a.samples[k].lambdas == r.samples[k].lambdas);

    {
        std::fstream f(dir + "/0_0.bin", std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(2);
        f.put('X');  // clobber the magic
    }
    CHECK_THROWS_AS(run_chains(c, 2, 3, 5, 1, root), CacheError);
    fs::remove_all(root);
}

TEST_CASE("cache keys separate distinct configurations") {
    EnsembleConfig c;
    const std::string base = cache_key(c, 1);
    CHECK(base.size() == 16);
    CHECK(cache_key(c, 1) == base);
    CHECK(cache_key(c, 2) != base);
    EnsembleConfig c2 = c;
    c2.N = 3;
    CHECK(cache_key(c2, 1) != base);
    EnsembleConfig c3 = c;
    c3.beta = 1.0;
    CHECK(cache_key(c3, 1) != base);
    EnsembleConfig c4 = c;
    c4.method = Method::mala;
    CHECK(cache_key(c4, 1) != base);
    // mcmc settings only matter for the MALA method
    EnsembleConfig c5 = c;
    c5.mcmc.thinning_sweeps = 7;
    CHECK(cache_key(c5, 1) == base);
}
