#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loggas/equilibrium.hpp"
#include "loggas/potential.hpp"
#include "loggas/rng.hpp"

namespace loggas {

enum class Method { tridiagonal, mala };

struct McmcSettings {
    int burn_in_sweeps = 2000;
    int thinning_sweeps = 50;
    double step_size = 0.0;  // 0 = size-based automatic initial step
    bool adapt = true;
};

/// Which ensemble to sample: the density is
///   prod_{k<l} |l_k - l_l|^beta * exp(-(beta N / 2) sum V(l_k)).
struct EnsembleConfig {
    double beta = 2.0;
    int N = 2;
    Potential potential = Potential::quadratic();
    Method method = Method::tridiagonal;
    McmcSettings mcmc;

    /// Throws ConfigError on invalid combinations (tridiagonal requires the
    /// quadratic potential; beta > 0; N >= 1).
    void validate() const;
};

/// One sorted configuration with provenance.
struct Sample {
    std::vector<double> lambdas;  // strictly increasing
    std::uint64_t seed = 0;
    int chain_id = 0;
    int sweep_index = 0;
};

/// A seeded, cacheable collection of samples for a fixed (beta, N, V).
struct SampleSet {
    EnsembleConfig config;
    std::vector<Sample> samples;  // ordered by (chain_id, sweep_index)
    std::vector<std::uint64_t> rng_stream_ids;
};

/// Log of the unnormalized ensemble density at a configuration (the "energy"
/// used by the MALA accept step); pairwise term evaluated through blocked
/// running products to avoid one log call per pair.
double log_density(const EnsembleConfig& config, const std::vector<double>& lambdas);

/// Gradient of log_density; throws SamplerError on non-finite components
/// (coincident points).
std::vector<double> log_density_gradient(const EnsembleConfig& config,
                                         const std::vector<double>& lambdas);

/// One draw from the tridiagonal (Dumitriu-Edelman) model for the quadratic
/// potential: diagonal Normal(0, 2/(beta N)), off-diagonal
/// chi_{beta(N-k)}/sqrt(beta N), eigenvalues via the symmetric tridiagonal
/// QL/QR solver.  Throws SamplerError on eigensolver non-convergence.
Sample sample_tridiagonal(double beta, int N, RngStream& rng);

/// Metropolis-adjusted Langevin chain over full-sweep joint proposals.
/// Produces one Sample per thinning_sweeps sweeps after burn_in_sweeps; the
/// step size is adapted toward acceptance in [0.5, 0.6] during burn-in and
/// frozen afterwards.
class MalaChain {
  public:
    /// state: warm start (defaults to the classical locations gamma_k).
    MalaChain(const EnsembleConfig& config, const EquilibriumMeasure& measure, RngStream rng,
              std::optional<std::vector<double>> state = std::nullopt);

    /// Next thinned sample (runs burn-in before the first).
    Sample next();

    double step_size() const { return step_; }
    /// Acceptance rate since the step size was frozen (or over burn-in so far).
    double acceptance_rate() const;

  private:
    EnsembleConfig config_;
    RngStream rng_;
    std::vector<double> state_;
    std::vector<double> grad_;
    double logp_;
    double step_;
    bool burned_in_ = false;
    bool frozen_ = false;
    long sweeps_done_ = 0;
    long window_accepts_ = 0, window_sweeps_ = 0;
    long windows_done_ = 0;
    double logstep_sum_ = 0.0;
    long logstep_count_ = 0;
    long frozen_accepts_ = 0, frozen_sweeps_ = 0;
    int emitted_ = 0;

    void sweep();
    void adapt_window();
};

/// Runs n_chains independent chains with streams derived from
/// (seed, chain_id); deterministic result for fixed inputs regardless of the
/// thread budget.  When cache_dir is nonempty, samples are loaded from the
/// cache if every file of the set is present, and written after generation
/// otherwise.
SampleSet run_chains(const EnsembleConfig& config, int n_chains, int n_samples_per_chain,
                     std::uint64_t seed, int threads = 1, const std::string& cache_dir = "");

/// Stable cache key for (config, seed): directory name under the cache root.
std::string cache_key(const EnsembleConfig& config, std::uint64_t seed);

}  // namespace loggas
