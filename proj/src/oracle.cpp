#include "loggas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loggas/errors.hpp"
#include "loggas/quadrature.hpp"

namespace loggas {

namespace {

constexpr double kPanelEdges[] = {0.0,     1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4,
                                  3.0 / 8, 1.0 / 2,  5.0 / 8,  3.0 / 4,  7.0 / 8, 1.0};
constexpr int kPanels = 11;

/// x^beta for x >= 0, with integer beta by repeated multiplication.
double pow_beta(double x, double beta) {
    const int b = static_cast<int>(beta);
    if (static_cast<double>(b) == beta && b >= 0 && b <= 8) {
        double r = 1.0;
        for (int k = 0; k < b; ++k) r *= x;
        return r;
    }
    return std::pow(x, beta);
}

/// Leftmost (side < 0) or rightmost (side > 0) solution of V(x) = target,
/// bracketed by an outward scan from a grid minimizer.
double crossing(const Potential& V, double target, int side) {
    double radius = 4.0;
    while (V.evaluate(side * radius, 0) < 2.0 * target + 1.0 && radius < 1e8) radius *= 2.0;
    // Scan from the outer edge inward for the first point below target.
    const int steps = 20000;
    double outer = side * radius;
    double inner = outer;
    for (int i = 1; i <= steps; ++i) {
        const double x = side * radius * (1.0 - static_cast<double>(i) / steps);
        if (V.evaluate(x, 0) < target) {
            inner = x;
            break;
        }
        outer = x;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (outer + inner);
        if (V.evaluate(mid, 0) >= target)
            outer = mid;
        else
            inner = mid;
    }
    return outer;
}

}  // namespace

Oracle::Oracle(double beta, int N, const Potential& potential)
    : beta_(beta), n_(N), potential_(potential) {
    if (!(beta > 0.0)) throw std::invalid_argument("Oracle: beta must be positive");
    if (N < 1 || N > 3) throw std::invalid_argument("Oracle: N must be 1, 2, or 3");

    // Global minimum of V by a coarse grid plus local bisection on V'.
    vmin_ = potential_.evaluate(0.0, 0);
    double xmin = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = -20.0 + 40.0 * i / 20000.0;
        const double v = potential_.evaluate(x, 0);
        if (v < vmin_) {
            vmin_ = v;
            xmin = x;
        }
    }
    double a = xmin - 0.005, b = xmin + 0.005;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (a + b);
        if (potential_.evaluate(mid, 1) <= 0.0)
            a = mid;
        else
            b = mid;
    }
    xmin = 0.5 * (a + b);
    vmin_ = std::min(vmin_, potential_.evaluate(xmin, 0));

    // Truncate where the one-particle weight has decayed by e^{-80}.
    const double target = vmin_ + 160.0 / (beta_ * n_);
    lo_ = crossing(potential_, target, -1);
    hi_ = crossing(potential_, target, +1);
    if (!(lo_ < hi_)) throw QuadratureError("Oracle: degenerate truncation box");
}

std::pair<std::vector<double>, double> Oracle::integrate(
    const std::vector<std::function<double(const std::vector<double>&)>>& gs,
    int nodes_per_panel) const {
    const Rule& rule = gauss_legendre(nodes_per_panel);
    const auto nodes_on = [&](const std::vector<double>& edges, std::vector<double>& u,
                              std::vector<double>& wu) {
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double a = edges[p], b = edges[p + 1];
            for (int i = 0; i < nodes_per_panel; ++i) {
                u.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
                wu.push_back(0.5 * (b - a) * rule.weights[i]);
            }
        }
    };
    // First coordinate: its mass sits anywhere in the (wide) truncation box,
    // so use uniform panels of lambda-width about one.  Gap coordinates: the
    // mass concentrates toward u = 0, which the graded panel set resolves.
    std::vector<double> u0, wu0;
    {
        const int m0 = std::max(8, static_cast<int>(std::ceil(hi_ - lo_)));
        std::vector<double> edges(m0 + 1);
        for (int p = 0; p <= m0; ++p) edges[p] = static_cast<double>(p) / m0;
        nodes_on(edges, u0, wu0);
    }
    std::vector<double> ug, wug;
    nodes_on(std::vector<double>(kPanelEdges, kPanelEdges + kPanels + 1), ug, wug);

    std::vector<double> num(gs.size(), 0.0);
    double den = 0.0;
    std::vector<double> lambda(n_);
    const double half_bn = 0.5 * beta_ * n_;

    // Iterated map: l_k = l_{k-1} + u_k (hi - l_{k-1});  the Jacobian factor
    // (hi - l_{k-1}) and the 1D weights accumulate multiplicatively.
    std::function<void(int, double, double)> recurse = [&](int k, double prev, double acc) {
        if (k == n_) {
            double w = acc;
            for (int i = 0; i < n_; ++i)
                for (int j = i + 1; j < n_; ++j) w *= pow_beta(lambda[j] - lambda[i], beta_);
            den += w;
            for (std::size_t q = 0; q < gs.size(); ++q) num[q] += w * gs[q](lambda);
            return;
        }
        const std::vector<double>& u = (k == 0) ? u0 : ug;
        const std::vector<double>& wu = (k == 0) ? wu0 : wug;
        const double span = hi_ - prev;
        for (std::size_t i = 0; i < u.size(); ++i) {
            lambda[k] = prev + u[i] * span;
            const double boltz =
                std::exp(-half_bn * (potential_.evaluate(lambda[k], 0) - vmin_));
            recurse(k + 1, lambda[k], acc * wu[i] * span * boltz);
        }
    };
    recurse(0, lo_, 1.0);
    return {num, den};
}

std::vector<double> Oracle::expectations(
    const std::vector<std::function<double(const std::vector<double>&)>>& gs) const {
    const auto coarse = integrate(gs, 12);
    const auto fine = integrate(gs, 24);
    if (!(coarse.second > 0.0) || !(fine.second > 0.0))
        throw QuadratureError("Oracle: vanishing normalization integral");
    std::vector<double> out(gs.size());
    last_error_ = 0.0;
    for (std::size_t q = 0; q < gs.size(); ++q) {
        const double a = coarse.first[q] / coarse.second;
        const double b = fine.first[q] / fine.second;
        // Scale floor 1: for observables whose expectation vanishes by
        // symmetry a literal relative error is ill-defined, so treat the
        // disagreement as absolute there.
        const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
        last_error_ = std::max(last_error_, std::fabs(a - b) / scale);
        out[q] = b;
    }
    if (last_error_ > 1e-6)
        throw QuadratureError("Oracle: refinement disagreement " + std::to_string(last_error_) +
                              " exceeds 1e-6");
    return out;
}

double Oracle::expectation(const std::function<double(const std::vector<double>&)>& g) const {
    return expectations({g})[0];
}

double exact_expectation(const std::function<double(const std::vector<double>&)>& g, double beta,
                         int N, const Potential& potential) {
    return Oracle(beta, N, potential).expectation(g);
}

}  // namespace loggas
