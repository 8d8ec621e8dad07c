#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "loggas/equilibrium.hpp"
#include "loggas/io.hpp"
#include "loggas/oracle.hpp"
#include "loggas/sampler.hpp"

namespace loggas {

/// One predicted-vs-estimated comparison.  `gated` rows enter the verdict;
/// ungated rows are informational (scan points, slow-convergence reference
/// values).  `z_score` is (estimated - predicted)/stderr when the prediction
/// is exact and stderr > 0, else 0.
struct ReportRow {
    std::string inputs;
    double predicted = 0.0;
    double estimated = 0.0;
    double stderr_value = 0.0;
    double z_score = 0.0;
    bool gated = true;
    bool pass = true;
    std::string note;
};

/// A full experiment outcome: rows plus an aggregate verdict, serializable
/// to CSV (one line per row) and JSON (rows + verdict), with an optional
/// attached plot.
struct ExperimentReport {
    std::string name;
    std::string config_echo;
    /// Plain-language statement of the mathematical claim being tested.
    std::string claim;
    std::vector<ReportRow> rows;

    std::vector<SvgSeries> plot;
    std::string plot_title, plot_xlabel, plot_ylabel;
    bool plot_logx = false, plot_logy = false;

    /// True iff every gated row passes.
    bool verdict() const;
    std::string csv() const;
    std::string json_text() const;
    /// Writes {outdir}/{name}.csv and {name}.json (and {name}.svg when a plot
    /// is attached); creates outdir if needed.
    void write(const std::string& outdir) const;
};

/// Per-configuration statistic whose mean the loop equations pin to zero:
///   s(z)^2 - (1/N)(1-2/beta) s'(z) + (1/N) sum_k V'(l_k)/(l_k - z)
/// for rank 1 (zs empty); for rank n >= 2 that combination times
/// prod_i s(z_i) plus (2/(N^2 beta)) sum_j f(z, z_j) prod_{i != j} s(z_i).
std::complex<double> loop_statistic(const std::vector<double>& lambdas,
                                    const EquilibriumMeasure& m, double beta,
                                    std::complex<double> z,
                                    const std::vector<std::complex<double>>& zs,
                                    bool drop_beta_term = false);

/// Monte Carlo check of the rank-1 loop equation at each z (one Re and one
/// Im row per point, gated at |z_score| <= 4).  At beta = 2 an extra row
/// verifies dropping the vanishing (1 - 2/beta) term changes nothing.
ExperimentReport verify_loop_rank1(const SampleSet& samples, const EquilibriumMeasure& m,
                                   const std::vector<std::complex<double>>& z_points,
                                   int threads = 0);
/// Quadrature-oracle version (N <= 3); rows gated at |residual| <= 1e-8.
ExperimentReport verify_loop_rank1(const Oracle& oracle, double beta,
                                   const EquilibriumMeasure& m,
                                   const std::vector<std::complex<double>>& z_points);

/// Rank-(1+|zs|) loop equation at (z; zs); at most 4 auxiliary points.
ExperimentReport verify_loop_rankn(const SampleSet& samples, const EquilibriumMeasure& m,
                                   std::complex<double> z,
                                   const std::vector<std::complex<double>>& zs,
                                   int threads = 0);
/// Oracle version; rows gated at |residual| <= 1e-7.
ExperimentReport verify_loop_rankn(const Oracle& oracle, double beta,
                                   const EquilibriumMeasure& m, std::complex<double> z,
                                   const std::vector<std::complex<double>>& zs);

/// E|s_N - m_V|^{2q} at z = E + i*eta over the eta list (>= 4 points in
/// (0, eta_max]); the gated row is the log-log least-squares slope,
/// predicted -2q within +-0.2q.
ExperimentReport local_law_scan(const SampleSet& samples, const EquilibriumMeasure& m, double E,
                                const std::vector<double>& etas, int q, double eta_max = 0.5,
                                int threads = 0);

/// Per size N: the 0.99 sample quantile of
///   max_bulk N^{2/3} khat^{1/3} |l_k - gamma_k| / log N,
/// bulk meaning k in [bulk_fraction*N, (1-bulk_fraction)*N].  The gated row
/// requires max/min of the per-N constants < 2 (no doubling).
ExperimentReport rigidity_profile(const std::vector<SampleSet>& sample_sets,
                                  const EquilibriumMeasure& m, double bulk_fraction,
                                  int threads = 0);

/// Survival P(some eigenvalue outside [A - x N^{-2/3}, B + x N^{-2/3}]) per
/// x, with Wilson intervals.  Gated: survival non-increasing (exact, nested
/// events) and the stretched-exponential fit exponent in [0.7, 1.7].
ExperimentReport edge_tail(const SampleSet& samples, const EquilibriumMeasure& m,
                           const std::vector<double>& xs, int threads = 0);

/// Expected eigenvalue count in [E - delta*ell(E), E + delta*ell(E)] per
/// delta (deltas strictly decreasing).  Gated per row: count non-increasing
/// in delta (exact) and <= 4*delta + 0.5.
ExperimentReport wegner_scan(const SampleSet& samples, const EquilibriumMeasure& m, double E,
                             const std::vector<double>& deltas, int threads = 0);

/// Centered log characteristic polynomial at z_l = E_l + i*eta(E_l):
/// mean Re vs the (2/beta - 1) shift, covariance of (Re, Im) vs the
/// logarithmic predictions, marginal normality z-tests.  Requires >= 500
/// samples.
ExperimentReport clt_logfield(const SampleSet& samples, const EquilibriumMeasure& m,
                              const std::vector<double>& energies, int threads = 0);

/// Normalized eigenvalue displacements Y_N(n) for the index list: variances
/// and correlations vs the log-ratio covariance surrogate.  Indices must be
/// in the bulk (min(n, N+1-n) >= N^0.1); requires >= 500 samples.
ExperimentReport gustavsson(const SampleSet& samples, const EquilibriumMeasure& m,
                            const std::vector<long>& indices, int threads = 0);

/// Centered linear statistic S_N(f): mean vs delta(f), variance vs
/// sigma^2(f), and the log moment generating function at
/// t in {+-0.25, +-0.5} vs t^2 sigma^2/2 + t delta; all gated at
/// |z_score| <= 4.  A hard kurtosis z-test failure (|z| > 10) adds a
/// heavy-tail warning note.
ExperimentReport smooth_clt(const SampleSet& samples, const EquilibriumMeasure& m,
                            const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime, int threads = 0);

}  // namespace loggas
