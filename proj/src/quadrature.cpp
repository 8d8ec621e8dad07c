#include "loggas/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "loggas/errors.hpp"

namespace loggas {

namespace {

// Nodes are roots of the Legendre polynomial P_n, found by Newton iteration
// from the Chebyshev-based initial guess; weights w_i = 2/((1-x^2) P'_n(x)^2).
Rule build_rule(int n) {
    if (n < 1) throw QuadratureError("gauss_legendre: order must be >= 1");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Three-term recurrence for P_n(x) and P_{n-1}(x).
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // One clean-up step after convergence.
                p0 = 1.0;
                p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                break;
            }
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
    return rule;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

namespace detail {
double magnitude(double v) { return std::abs(v); }
double magnitude(std::complex<double> v) { return std::abs(v); }
}  // namespace detail

std::vector<double> chebyshev1_nodes(int n, double A, double B) {
    if (n < 1) throw QuadratureError("chebyshev1_nodes: order must be >= 1");
    const double mid = 0.5 * (A + B), rad = 0.5 * (B - A);
    std::vector<double> nodes(n);
    for (int j = 1; j <= n; ++j)
        nodes[j - 1] = mid + rad * std::cos((2.0 * j - 1.0) * M_PI / (2.0 * n));
    return nodes;
}

Chebyshev2Rule chebyshev2_rule(int n, double A, double B) {
    if (n < 1) throw QuadratureError("chebyshev2_rule: order must be >= 1");
    const double mid = 0.5 * (A + B), rad = 0.5 * (B - A);
    Chebyshev2Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 1; i <= n; ++i) {
        double theta = i * M_PI / (n + 1.0);
        rule.nodes[i - 1] = mid + rad * std::cos(theta);
        double s = std::sin(theta);
        rule.weights[i - 1] = (M_PI / (n + 1.0)) * rad * rad * s * s;
    }
    return rule;
}

}  // namespace loggas
