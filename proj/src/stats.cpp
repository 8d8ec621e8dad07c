#include "loggas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loggas {

MeanVar mean_var(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("mean_var: empty sample");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    return {mean, var, n};
}

double stderr_iid(const std::vector<double>& x) {
    const MeanVar mv = mean_var(x);
    return std::sqrt(mv.var / static_cast<double>(mv.n));
}

double variance_stderr(const std::vector<double>& x) {
    const MeanVar mv = mean_var(x);
    double m4 = 0.0;
    for (double v : x) {
        const double d = v - mv.mean;
        m4 += d * d * d * d;
    }
    m4 /= static_cast<double>(mv.n);
    const double biased_var = mv.var * static_cast<double>(mv.n - 1) / static_cast<double>(mv.n);
    const double se2 = (m4 - biased_var * biased_var) / static_cast<double>(mv.n);
    return std::sqrt(std::max(se2, 0.0));
}

double covariance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("covariance: need equal-length samples of size >= 2");
    const double mx = mean_var(x).mean, my = mean_var(y).mean;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - mx) * (y[i] - my);
    return acc / static_cast<double>(x.size() - 1);
}

double skewness(const std::vector<double>& x) {
    const MeanVar mv = mean_var(x);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = v - mv.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(mv.n);
    m3 /= static_cast<double>(mv.n);
    return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(const std::vector<double>& x) {
    const MeanVar mv = mean_var(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mv.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(mv.n);
    m4 /= static_cast<double>(mv.n);
    return m4 / (m2 * m2) - 3.0;
}

double ess_geyer(const std::vector<double>& chain) {
    const std::size_t n = chain.size();
    if (n < 4) return static_cast<double>(n);
    const MeanVar mv = mean_var(chain);
    if (mv.var <= 0.0) return static_cast<double>(n);
    const std::size_t maxlag = n - 2;
    // Autocovariances gamma_k; paired sums Gamma_m = gamma_{2m} + gamma_{2m+1}
    // are summed while positive (initial positive sequence).
    auto gamma = [&](std::size_t k) {
        double acc = 0.0;
        for (std::size_t i = 0; i + k < n; ++i)
            acc += (chain[i] - mv.mean) * (chain[i + k] - mv.mean);
        return acc / static_cast<double>(n);
    };
    const double g0 = gamma(0);
    double sum_pairs = 0.0;
    for (std::size_t m = 0; 2 * m + 1 <= maxlag; ++m) {
        const double pair = gamma(2 * m) + gamma(2 * m + 1);
        if (pair <= 0.0) break;
        sum_pairs += pair;
    }
    const double tau = std::max(1.0, -1.0 + 2.0 * sum_pairs / g0);
    const double ess = static_cast<double>(n) / tau;
    return std::clamp(ess, 1.0, static_cast<double>(n));
}

double iact(const std::vector<double>& chain) {
    return static_cast<double>(chain.size()) / ess_geyer(chain);
}

double stderr_batch(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) throw std::invalid_argument("stderr_batch: no chains");
    double max_iact = 1.0;
    std::size_t total = 0;
    for (const auto& c : chains) {
        if (!c.empty()) max_iact = std::max(max_iact, iact(c));
        total += c.size();
    }
    const std::size_t block =
        std::max<std::size_t>(20, static_cast<std::size_t>(std::ceil(3.0 * max_iact)));
    std::vector<double> block_means;
    for (const auto& c : chains) {
        for (std::size_t start = 0; start + block <= c.size(); start += block) {
            double acc = 0.0;
            for (std::size_t i = start; i < start + block; ++i) acc += c[i];
            block_means.push_back(acc / static_cast<double>(block));
        }
    }
    if (block_means.size() < 2) {
        // Chains too short to block; fall back to the iid formula on the pool.
        std::vector<double> pool;
        pool.reserve(total);
        for (const auto& c : chains) pool.insert(pool.end(), c.begin(), c.end());
        return stderr_iid(pool);
    }
    const MeanVar mv = mean_var(block_means);
    return std::sqrt(mv.var / static_cast<double>(mv.n));
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / static_cast<double>(n);
    const double center = (p + z2 / (2.0 * static_cast<double>(n))) / denom;
    const double spread =
        z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) +
                      z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n))) /
        denom;
    return {std::max(0.0, center - spread), std::min(1.0, center + spread)};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // Evaluate |F_a - F_b| only after both CDFs have jumped past the
        // current point, so ties never produce a spurious mid-jump gap.
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_critical_1pct(std::size_t n, std::size_t m) {
    return 1.628 * std::sqrt(static_cast<double>(n + m) /
                             (static_cast<double>(n) * static_cast<double>(m)));
}

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares: need >= 2 paired points");
    const double mx = mean_var(x).mean, my = mean_var(y).mean;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace loggas
