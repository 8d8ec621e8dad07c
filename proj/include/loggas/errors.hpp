#pragma once

#include <stdexcept>
#include <string>

namespace loggas {

/// Configuration / input validation failure (bad schema, unknown key, bad value).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Equilibrium-measure solver failure (Newton divergence, collapsed support, ...).
class EquilibriumError : public std::runtime_error {
public:
    explicit EquilibriumError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Sampling failure (eigensolver non-convergence, MCMC step pathology, ...).
class SamplerError : public std::runtime_error {
public:
    explicit SamplerError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Quadrature failure (refinement disagreement, non-convergence).
class QuadratureError : public std::runtime_error {
public:
    explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Sample cache failure (missing file, magic/shape mismatch).
class CacheError : public std::runtime_error {
public:
    explicit CacheError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Observable evaluation failure (evaluation point collides with an eigenvalue).
class ObservableError : public std::runtime_error {
public:
    explicit ObservableError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace loggas
