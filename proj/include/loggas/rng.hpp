#pragma once

#include <cstdint>

namespace loggas {

/// Deterministic counter-based random stream.  Streams are keyed by
/// (seed, stream_id); distinct keys give statistically independent sequences
/// and the same key always reproduces the same sequence, independent of any
/// other stream.  Core generator is splitmix64.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();

    /// Uniform on the open interval (0,1): both endpoints excluded.
    double uniform01();

    /// Standard normal via Box-Muller (caches the spare deviate).
    double normal();

    /// Gamma(shape, scale) via Marsaglia-Tsang; shape<1 handled by boosting.
    double gamma(double shape, double scale);

    /// chi-distributed deviate: sqrt of a chi-square with `dof` degrees of
    /// freedom (dof need not be an integer).
    double chi(double dof);

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace loggas
