#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "loggas/equilibrium.hpp"

namespace loggas {

/// One evaluation of the centered log-characteristic-polynomial field.
struct FieldValue {
    double re = 0.0;
    double im = 0.0;
    std::complex<double> at;  // evaluation point
};

/// Empirical Stieltjes transform s_N(z) = (1/N) sum 1/(lambda_k - z)
/// (order 0) or its first/second z-derivative (orders 1, 2).
/// Throws ObservableError if z collides with an eigenvalue (distance
/// < 1e-300) and std::invalid_argument for an unsupported order.
std::complex<double> stieltjes_emp(const std::vector<double>& lambdas, std::complex<double> z,
                                   int order = 0);

/// Number of eigenvalues in [a, b] (0 if a > b); binary search on the
/// sorted vector.
int count_interval(const std::vector<double>& lambdas, double a, double b);

/// L_N(z) = sum log(z - lambda_j) - N * U(z), with U the logarithmic
/// potential of the equilibrium measure.  Both parts take the principal log
/// extended from above: for real z - lambda < 0 the imaginary part is +pi,
/// so Im L_N / pi counts eigenvalues above a real z exactly.
FieldValue log_char(const std::vector<double>& lambdas, const EquilibriumMeasure& m,
                    std::complex<double> z);

/// Centered linear statistic S_N(f) = sum f(lambda_j) - N ∫ f d mu_V; the
/// deterministic part by adaptive Gauss-Legendre in the arcsine angle.
/// Throws QuadratureError if the integral does not converge.
double linear_stat(const std::vector<double>& lambdas, const EquilibriumMeasure& m,
                   const std::function<double(double)>& f);

/// Normalized displacement of the n-th (1-based) eigenvalue from its
/// classical location:  Y_N(n) = pi N sqrt(beta/log N) rho(gamma_n)
/// (lambda_n - gamma_n).  Requires N >= 2 and 1 <= n <= N.
double displacement(const std::vector<double>& lambdas, const EquilibriumMeasure& m, double beta,
                    int n);

/// The two-point kernel f(z,w) = d/dw [(s(z)-s(w))/(z-w)]
///   = (s(z)-s(w))/(z-w)^2 - s'(w)/(z-w),
/// with the diagonal value s''(z)/2 taken when |z-w| < 1e-12.
std::complex<double> f_kernel(const std::vector<double>& lambdas, std::complex<double> z,
                              std::complex<double> w);

/// Loop-equation diagnostics at (z, w).
struct LoopObservables {
    std::complex<double> P;      // s(z)^2 + V'(z) s(z) + h(z)
    std::complex<double> Delta;  // (1/N) sum (V'(l_k)-V'(z))/(l_k-z) - h(z)
    std::complex<double> fzw;    // the two-point kernel above
};
LoopObservables loop_observables(const std::vector<double>& lambdas, const EquilibriumMeasure& m,
                                 std::complex<double> z, std::complex<double> w);

}  // namespace loggas
