#pragma once

#include <cstddef>
#include <vector>

namespace loggas {

struct MeanVar {
    double mean;
    double var;  // unbiased (divides by n-1; 0 when n < 2)
    std::size_t n;
};
MeanVar mean_var(const std::vector<double>& x);

/// Standard error of the mean for independent draws.
double stderr_iid(const std::vector<double>& x);

/// Standard error of the sample variance via the fourth central moment:
/// SE^2 = (m4 - var^2)/n.
double variance_stderr(const std::vector<double>& x);

/// Sample covariance (unbiased) of paired draws.
double covariance(const std::vector<double>& x, const std::vector<double>& y);

/// Skewness and excess kurtosis plus their normality z-scores
/// (SE ~ sqrt(6/n) and sqrt(24/n)).
double skewness(const std::vector<double>& x);
double excess_kurtosis(const std::vector<double>& x);

/// Effective sample size of one chain by Geyer's initial positive sequence
/// estimator; returns n for uncorrelated data, and is clamped to [1, n].
double ess_geyer(const std::vector<double>& chain);

/// Integrated autocorrelation time n / ESS (>= 1 by the ESS clamp).
double iact(const std::vector<double>& chain);

/// Standard error of the pooled mean by chain-blocked batch means: each
/// chain is cut into blocks of length max(20, ceil(3*iact)), block means are
/// pooled across chains.  Falls back to stderr_iid when the chains are too
/// short to form two blocks.
double stderr_batch(const std::vector<std::vector<double>>& chains);

struct WilsonInterval {
    double lo;
    double hi;
};
/// Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

/// Two-sample Kolmogorov-Smirnov statistic sup|F_a - F_b| and its 1%
/// critical value 1.628*sqrt((n+m)/(n*m)).
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_critical_1pct(std::size_t n, std::size_t m);

struct SlopeFit {
    double slope;
    double intercept;
};
/// Ordinary least squares y ~ slope*x + intercept.
SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace loggas
