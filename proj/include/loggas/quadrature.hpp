#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <vector>

namespace loggas {

/// Nodes/weights of an n-point Gauss-Legendre rule on [-1,1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached Gauss-Legendre rule (Newton iteration on Legendre polynomials).
const Rule& gauss_legendre(int n);

/// Fixed-order Gauss-Legendre integral of f over [a,b].
template <typename F>
auto integrate_gl(F&& f, double a, double b, int n) -> decltype(f(0.0)) {
    const Rule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
    decltype(f(0.0)) acc{};
    for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(mid + rad * rule.nodes[i]);
    return rad * acc;
}

namespace detail {
double magnitude(double v);
double magnitude(std::complex<double> v);

template <typename F, typename V>
void adaptive_impl(F& f, double a, double b, double tol, double floor_global, int depth,
                   int max_depth, V coarse, V& acc, bool& converged) {
    V left = integrate_gl(f, a, 0.5 * (a + b), 15);
    V right = integrate_gl(f, 0.5 * (a + b), b, 15);
    V fine = left + right;
    // Accept on the local tolerance or at a roundoff floor tied to the
    // global integral scale; without the floor, the halved tolerances drop
    // below machine precision and cancellation noise in the integrand makes
    // every panel subdivide.
    const double err = magnitude(fine - coarse);
    const double floor =
        std::max(floor_global, 1e-15 * (magnitude(fine) + magnitude(coarse)));
    if (err <= tol || err <= floor || depth >= max_depth) {
        if (depth >= max_depth && err > tol && err > floor) converged = false;
        acc += fine;
        return;
    }
    adaptive_impl(f, a, 0.5 * (a + b), 0.5 * tol, floor_global, depth + 1, max_depth, left, acc,
                  converged);
    adaptive_impl(f, 0.5 * (a + b), b, 0.5 * tol, floor_global, depth + 1, max_depth, right, acc,
                  converged);
}
}  // namespace detail

/// Adaptive bisection with a 15-point Gauss-Legendre panel rule; the error
/// indicator is the change under bisection.  Absolute tolerance for the whole
/// interval.  Handles integrable endpoint/interior log and sqrt singularities.
/// Sets *converged_out = false (if provided) when max_depth is hit without
/// meeting the tolerance.
template <typename F>
auto integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 48,
                        bool* converged_out = nullptr) -> decltype(f(0.0)) {
    using V = decltype(f(0.0));
    V coarse = integrate_gl(f, a, b, 15);
    V acc{};
    bool converged = true;
    const double floor_global = 1e-13 * detail::magnitude(coarse);
    detail::adaptive_impl(f, a, b, tol, floor_global, 0, max_depth, coarse, acc, converged);
    if (converged_out) *converged_out = converged;
    return acc;
}

/// First-kind Gauss-Chebyshev abscissae on [A,B]: t_j = mid + rad*cos((2j-1)pi/(2n)).
/// The rule  integral_A^B g(t)/sqrt((t-A)(B-t)) dt = (pi/n) * sum_j g(t_j)
/// is exact for polynomial g of degree <= 2n-1.
std::vector<double> chebyshev1_nodes(int n, double A, double B);

/// Second-kind Gauss-Chebyshev rule on [A,B] for the weight sqrt((t-A)(B-t)):
/// nodes mid + rad*cos(i pi/(n+1)), weights (pi/(n+1)) rad^2 sin^2(i pi/(n+1)).
struct Chebyshev2Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Chebyshev2Rule chebyshev2_rule(int n, double A, double B);

}  // namespace loggas
