#include "loggas/sampler.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "loggas/errors.hpp"
#include "loggas/io.hpp"

namespace loggas {

namespace {

constexpr char kMagic[8] = {'L', 'G', 'S', 'A', 'M', 'P', '0', '1'};

void ensure_strictly_increasing(const std::vector<double>& x, const char* what) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k])) throw SamplerError(std::string(what) + ": non-finite eigenvalue");
        if (k > 0 && !(x[k - 1] < x[k]))
            throw SamplerError(std::string(what) + ": eigenvalues not strictly increasing");
    }
}

/// Gradient of the log density into g; false when any component is non-finite.
bool gradient_impl(const EnsembleConfig& config, const std::vector<double>& x,
                   std::vector<double>& g) {
    const int n = static_cast<int>(x.size());
    g.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double inv = 1.0 / (x[i] - x[j]);
            g[i] += inv;
            g[j] -= inv;
        }
    }
    bool ok = true;
    for (int k = 0; k < n; ++k) {
        g[k] = config.beta * (g[k] - 0.5 * config.N * config.potential.evaluate(x[k], 1));
        ok = ok && std::isfinite(g[k]);
    }
    return ok;
}

}  // namespace

void EnsembleConfig::validate() const {
    if (!(beta > 0.0)) throw ConfigError("ensemble: beta must be positive");
    if (N < 1) throw ConfigError("ensemble: N must be at least 1");
    if (method == Method::tridiagonal && potential.kind() != Potential::Kind::quadratic)
        throw ConfigError("ensemble: the tridiagonal sampler requires the quadratic potential");
    if (method == Method::mala) {
        if (mcmc.burn_in_sweeps < 0) throw ConfigError("ensemble: burn_in_sweeps must be >= 0");
        if (mcmc.thinning_sweeps < 1) throw ConfigError("ensemble: thinning_sweeps must be >= 1");
        if (mcmc.step_size < 0.0) throw ConfigError("ensemble: step_size must be >= 0");
    }
}

double log_density(const EnsembleConfig& config, const std::vector<double>& lambdas) {
    if (static_cast<int>(lambdas.size()) != config.N)
        throw std::invalid_argument("log_density: configuration size does not match N");
    const int n = config.N;
    double pair_log = 0.0;
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = std::fabs(lambdas[i] - lambdas[j]);
            if (d < 1e-300) return -std::numeric_limits<double>::infinity();
            prod *= d;
            if (prod > 1e100 || prod < 1e-100) {
                pair_log += std::log(prod);
                prod = 1.0;
            }
        }
    }
    pair_log += std::log(prod);
    double vsum = 0.0;
    for (int k = 0; k < n; ++k) vsum += config.potential.evaluate(lambdas[k], 0);
    return config.beta * (pair_log - 0.5 * n * vsum);
}

std::vector<double> log_density_gradient(const EnsembleConfig& config,
                                         const std::vector<double>& lambdas) {
    if (static_cast<int>(lambdas.size()) != config.N)
        throw std::invalid_argument("log_density_gradient: configuration size does not match N");
    std::vector<double> g;
    if (!gradient_impl(config, lambdas, g))
        throw SamplerError("log_density_gradient: non-finite gradient (coincident points?)");
    return g;
}

Sample sample_tridiagonal(double beta, int N, RngStream& rng) {
    if (!(beta > 0.0)) throw std::invalid_argument("sample_tridiagonal: beta must be positive");
    if (N < 1) throw std::invalid_argument("sample_tridiagonal: N must be at least 1");
    std::vector<double> diag(N);
    std::vector<double> off(N > 1 ? N - 1 : 0);
    const double sigma = std::sqrt(2.0 / (beta * N));
    for (int k = 0; k < N; ++k) diag[k] = sigma * rng.normal();
    const double scale = 1.0 / std::sqrt(beta * N);
    for (int k = 1; k < N; ++k) off[k - 1] = scale * rng.chi(beta * (N - k));
    const lapack_int info =
        LAPACKE_dsterf(static_cast<lapack_int>(N), diag.data(), off.empty() ? nullptr : off.data());
    if (info != 0)
        throw SamplerError("tridiagonal eigensolver did not converge (info=" +
                           std::to_string(info) + ")");
    ensure_strictly_increasing(diag, "tridiagonal sample");
    Sample s;
    s.lambdas = std::move(diag);
    return s;
}

MalaChain::MalaChain(const EnsembleConfig& config, const EquilibriumMeasure& measure,
                     RngStream rng, std::optional<std::vector<double>> state)
    : config_(config), rng_(rng) {
    config_.validate();
    if (state.has_value()) {
        if (static_cast<int>(state->size()) != config_.N)
            throw std::invalid_argument("MalaChain: initial state size does not match N");
        state_ = std::move(*state);
    } else {
        state_.resize(config_.N);
        for (int k = 1; k <= config_.N; ++k) state_[k - 1] = measure.quantile(k, config_.N);
    }
    logp_ = log_density(config_, state_);
    if (!std::isfinite(logp_) || !gradient_impl(config_, state_, grad_))
        throw SamplerError("MalaChain: initial state has non-finite energy or gradient");
    step_ = config_.mcmc.step_size > 0.0
                ? config_.mcmc.step_size
                : 1.5 * std::pow(static_cast<double>(config_.N), -7.0 / 6.0) /
                      std::sqrt(config_.beta);
}

void MalaChain::sweep() {
    const int n = config_.N;
    const double s2 = step_ * step_;
    std::vector<double> prop(n);
    for (int k = 0; k < n; ++k) prop[k] = state_[k] + 0.5 * s2 * grad_[k] + step_ * rng_.normal();
    const double u = rng_.uniform01();  // drawn unconditionally: fixed stream consumption
    const double logp_prop = log_density(config_, prop);
    std::vector<double> grad_prop;
    bool accept = false;
    if (std::isfinite(logp_prop) && gradient_impl(config_, prop, grad_prop)) {
        double qf = 0.0, qr = 0.0;
        for (int k = 0; k < n; ++k) {
            const double df = prop[k] - state_[k] - 0.5 * s2 * grad_[k];
            const double dr = state_[k] - prop[k] - 0.5 * s2 * grad_prop[k];
            qf += df * df;
            qr += dr * dr;
        }
        const double log_alpha = logp_prop - logp_ + (qf - qr) / (2.0 * s2);
        accept = std::log(u) < log_alpha;
    }
    if (accept) {
        state_.swap(prop);
        grad_.swap(grad_prop);
        logp_ = logp_prop;
    }
    ++sweeps_done_;
    ++window_sweeps_;
    window_accepts_ += accept ? 1 : 0;
    if (frozen_) {
        ++frozen_sweeps_;
        frozen_accepts_ += accept ? 1 : 0;
    } else if (config_.mcmc.adapt && window_sweeps_ >= 20) {
        adapt_window();
    }
}

void MalaChain::adapt_window() {
    const double rate = static_cast<double>(window_accepts_) / window_sweeps_;
    // Multiplicative controller centered on the [0.5, 0.6] target band, with a
    // Robbins-Monro gain decay so the step settles before it is frozen.
    const double gain = std::max(0.2, 8.0 / (8.0 + static_cast<double>(windows_done_)));
    const double push = std::clamp(2.0 * (rate - 0.55) * gain, -0.5, 0.5);
    step_ *= std::exp(push);
    ++windows_done_;
    // Freeze at the averaged (geometric mean) step of the second half of
    // burn-in, which centers the frozen acceptance on the target band even
    // though individual windows oscillate.
    const long total_windows = config_.mcmc.burn_in_sweeps / 20;
    if (windows_done_ > total_windows / 2) {
        logstep_sum_ += std::log(step_);
        ++logstep_count_;
    }
    window_accepts_ = 0;
    window_sweeps_ = 0;
}

double MalaChain::acceptance_rate() const {
    if (frozen_sweeps_ > 0) return static_cast<double>(frozen_accepts_) / frozen_sweeps_;
    if (window_sweeps_ > 0) return static_cast<double>(window_accepts_) / window_sweeps_;
    return 0.0;
}

Sample MalaChain::next() {
    if (!burned_in_) {
        for (int t = 0; t < config_.mcmc.burn_in_sweeps; ++t) sweep();
        if (logstep_count_ >= 4) step_ = std::exp(logstep_sum_ / logstep_count_);
        frozen_ = true;  // step size fixed from here on
        window_accepts_ = window_sweeps_ = 0;
        burned_in_ = true;
    }
    for (int t = 0; t < config_.mcmc.thinning_sweeps; ++t) sweep();
    if (frozen_sweeps_ >= 100 &&
        static_cast<double>(frozen_accepts_) / frozen_sweeps_ < 0.05)
        throw SamplerError("MALA acceptance rate below 0.05 after adaptation (step size " +
                           fmt(step_) + ")");
    Sample s;
    s.lambdas = state_;
    std::sort(s.lambdas.begin(), s.lambdas.end());
    ensure_strictly_increasing(s.lambdas, "MALA sample");
    s.sweep_index = emitted_++;
    return s;
}

std::string cache_key(const EnsembleConfig& config, std::uint64_t seed) {
    std::ostringstream os;
    os << "{\"beta\":" << fmt(config.beta) << ",\"method\":\""
       << (config.method == Method::tridiagonal ? "tridiagonal" : "mala") << "\"";
    if (config.method == Method::mala) {
        os << ",\"mcmc\":{\"adapt\":" << (config.mcmc.adapt ? "true" : "false")
           << ",\"burn_in_sweeps\":" << config.mcmc.burn_in_sweeps
           << ",\"step_size\":" << fmt(config.mcmc.step_size)
           << ",\"thinning_sweeps\":" << config.mcmc.thinning_sweeps << "}";
    }
    os << ",\"n\":" << config.N << ",\"potential\":[";
    const auto& c = config.potential.coefficients();
    for (std::size_t j = 0; j < c.size(); ++j) os << (j ? "," : "") << fmt(c[j]);
    os << "],\"seed\":" << seed << "}";
    const std::string canonical = os.str();
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char b : canonical) {
        h ^= b;
        h *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << h;
    return hex.str();
}

namespace {

std::string sample_path(const std::string& dir, int chain, int index) {
    return dir + "/" + std::to_string(chain) + "_" + std::to_string(index) + ".bin";
}

void write_sample_file(const std::string& path, const EnsembleConfig& config,
                       const std::vector<double>& lambdas) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw CacheError("cannot open cache file for writing: " + tmp);
        os.write(kMagic, 8);
        const std::uint32_t n = static_cast<std::uint32_t>(config.N);
        os.write(reinterpret_cast<const char*>(&n), 4);
        os.write(reinterpret_cast<const char*>(&config.beta), 8);
        os.write(reinterpret_cast<const char*>(lambdas.data()),
                 static_cast<std::streamsize>(lambdas.size() * 8));
        if (!os) throw CacheError("short write to cache file: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::vector<double> read_sample_file(const std::string& path, const EnsembleConfig& config) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CacheError("cannot open cache file: " + path);
    std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const std::size_t expect = 8 + 4 + 8 + static_cast<std::size_t>(config.N) * 8;
    if (buf.size() != expect)
        throw CacheError("cache file has wrong size (" + std::to_string(buf.size()) +
                         " bytes, expected " + std::to_string(expect) + "): " + path);
    if (std::memcmp(buf.data(), kMagic, 8) != 0)
        throw CacheError("cache file has bad magic: " + path);
    std::uint32_t n = 0;
    double beta = 0.0;
    std::memcpy(&n, buf.data() + 8, 4);
    std::memcpy(&beta, buf.data() + 12, 8);
    if (n != static_cast<std::uint32_t>(config.N) || beta != config.beta)
        throw CacheError("cache file does not match configuration (N=" + std::to_string(n) +
                         ", beta=" + fmt(beta) + "): " + path);
    std::vector<double> lambdas(config.N);
    std::memcpy(lambdas.data(), buf.data() + 20, static_cast<std::size_t>(config.N) * 8);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!std::isfinite(lambdas[k]) || (k > 0 && !(lambdas[k - 1] < lambdas[k])))
            throw CacheError("cache file holds a corrupt sample: " + path);
    }
    return lambdas;
}

}  // namespace

SampleSet run_chains(const EnsembleConfig& config, int n_chains, int n_samples_per_chain,
                     std::uint64_t seed, int threads, const std::string& cache_dir) {
    config.validate();
    if (n_chains < 1) throw ConfigError("run_chains: n_chains must be at least 1");
    if (n_samples_per_chain < 1)
        throw ConfigError("run_chains: n_samples_per_chain must be at least 1");

    SampleSet set;
    set.config = config;
    set.samples.resize(static_cast<std::size_t>(n_chains) * n_samples_per_chain);
    for (int c = 0; c < n_chains; ++c) set.rng_stream_ids.push_back(static_cast<std::uint64_t>(c));

    std::string dir;
    if (!cache_dir.empty()) {
        dir = cache_dir + "/" + cache_key(config, seed);
        bool all_present = std::filesystem::is_directory(dir);
        for (int c = 0; all_present && c < n_chains; ++c)
            for (int i = 0; all_present && i < n_samples_per_chain; ++i)
                all_present = std::filesystem::is_regular_file(sample_path(dir, c, i));
        if (all_present) {
            parallel_for(n_chains, threads, [&](int c) {
                for (int i = 0; i < n_samples_per_chain; ++i) {
                    Sample s;
                    s.lambdas = read_sample_file(sample_path(dir, c, i), config);
                    s.seed = seed;
                    s.chain_id = c;
                    s.sweep_index = i;
                    set.samples[static_cast<std::size_t>(c) * n_samples_per_chain + i] =
                        std::move(s);
                }
            });
            log_info("loaded " + std::to_string(set.samples.size()) + " samples from cache " + dir);
            return set;
        }
        std::filesystem::create_directories(dir);
    }

    std::optional<EquilibriumMeasure> measure;
    if (config.method == Method::mala) measure.emplace(config.potential);

    parallel_for(n_chains, threads, [&](int c) {
        try {
            RngStream rng(seed, static_cast<std::uint64_t>(c));
            std::optional<MalaChain> chain;
            if (config.method == Method::mala) chain.emplace(config, *measure, rng);
            for (int i = 0; i < n_samples_per_chain; ++i) {
                Sample s = config.method == Method::tridiagonal
                               ? sample_tridiagonal(config.beta, config.N, rng)
                               : chain->next();
                s.seed = seed;
                s.chain_id = c;
                s.sweep_index = i;
                if (!dir.empty()) write_sample_file(sample_path(dir, c, i), config, s.lambdas);
                set.samples[static_cast<std::size_t>(c) * n_samples_per_chain + i] = std::move(s);
            }
        } catch (const CacheError&) {
            throw;
        } catch (const std::exception& ex) {
            throw SamplerError("chain " + std::to_string(c) + ": " + ex.what());
        }
    });
    if (!dir.empty())
        log_info("wrote " + std::to_string(set.samples.size()) + " samples to cache " + dir);
    return set;
}

}  // namespace loggas
