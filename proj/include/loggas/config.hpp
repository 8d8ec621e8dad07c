#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loggas/sampler.hpp"

namespace loggas {

/// Per-experiment parameter blocks of the run configuration.  Every block has
/// usable defaults so a minimal config document can drive any subcommand.
struct OracleParams {
    std::string observable = "trace2";  // trace | trace2 | max | stieltjes
    std::complex<double> z{0.0, 1.0};   // evaluation point for "stieltjes"
};

struct LoopParams {
    std::vector<std::complex<double>> z = {{0.0, 1.0}};  // rank-1 test points
    std::vector<std::complex<double>> zs;                // extra points: rank 1+|zs|
    bool use_oracle = false;  // small-N quadrature instead of sampling
};

struct LocalLawParams {
    double E = 0.0;
    int q = 1;
    std::vector<double> etas;  // empty = 6 dyadic points spanning [4/N, 256/N]
};

struct RigidityParams {
    double bulk_fraction = 0.1;
};

struct EdgeTailParams {
    std::vector<double> xs = {0.0, 0.5, 1.0, 2.0, 4.0};
};

struct WegnerParams {
    double E = 0.0;
    std::vector<double> deltas = {0.5, 0.2, 0.1, 0.05};
};

struct CltParams {
    std::vector<double> energies = {0.0};
};

struct GustavssonParams {
    std::vector<long> indices;  // empty = {N/2, N/2+1, N/4, 3N/4}
};

struct SmoothCltParams {
    std::vector<double> f_coeffs = {0.0, 1.0};  // monomial coefficients of f
};

/// One JSON document describing a full run: ensemble, sampling budget, and
/// the parameters of whichever experiment the subcommand selects.
struct RunConfig {
    EnsembleConfig ensemble;          // beta, potential, method, mcmc; N = N_list.front()
    std::vector<int> N_list = {256};  // several sizes only for the rigidity profile
    std::optional<std::pair<double, double>> support_guess;
    std::uint64_t seed = 1;
    int chains = 4;
    int samples = 250;  // per chain
    std::string cache_dir;
    std::string out_dir = "out";
    int threads = 0;  // 0 = LOGGAS_THREADS env or hardware concurrency

    OracleParams oracle;
    LoopParams loops;
    LocalLawParams local_law;
    RigidityParams rigidity;
    EdgeTailParams edge_tail;
    WegnerParams wegner;
    CltParams clt;
    GustavssonParams gustavsson;
    SmoothCltParams smooth_clt;
};

/// Parses and schema-validates a config document.  Unknown keys are rejected
/// with a ConfigError naming the offending key; type mismatches and
/// out-of-range values name the key as well.
RunConfig parse_config(const std::string& json_text);

/// Canonical serialization: every key emitted, stable order, lossless floats.
/// parse -> serialize -> parse is idempotent.
std::string serialize_config(const RunConfig& config);

/// Reads and parses a config file (ConfigError on I/O or schema failure).
RunConfig load_config_file(const std::string& path);

}  // namespace loggas
