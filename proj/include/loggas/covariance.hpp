#pragma once

#include <complex>
#include <functional>

#include "loggas/equilibrium.hpp"

namespace loggas {

/// Limiting variance of the centered linear statistic S_N(f):
///
///   sigma^2(f) = (1/(pi^2 beta)) int int f'(s) ((f(s)-f(t))/(s-t))
///                                       (tau(s)/tau(t)) ds dt
///
/// over [A,B]^2 with tau(x) = sqrt((x-A)(B-x)).  Evaluated by a tensor
/// Gauss-Chebyshev rule: first kind in t (weight 1/tau), second kind in s
/// (weight tau); the diagonal is regular because the difference quotient is
/// replaced by f'((s+t)/2) when s and t coincide to rounding.
/// The rule is evaluated at two resolutions; a relative disagreement above
/// 1e-6 throws QuadratureError.
double sigma2_quadrature(const EquilibriumMeasure& m, double beta,
                         const std::function<double(double)>& f,
                         const std::function<double(double)>& fprime);

/// Limiting mean shift of S_N(f):
///
///   delta(f) = (2/beta - 1) [ (f(A)+f(B))/4
///              - (1/(2 pi^2)) int_A^B f(x)/tau(x)
///                  ( pi + p.v. int_A^B r'(s) tau(s) / (r(s)(x-s)) ds ) dx ]
///
/// The outer integral uses first-kind Gauss-Chebyshev nodes; the inner
/// principal value is removed by subtraction,
///   p.v. int psi(s)/(x-s) ds = int (psi(s)-psi(x))/(x-s) ds
///                              + psi(x) log((x-A)/(B-x)),
/// with psi = r' tau / r, and the regular remainder integrated adaptively
/// after the substitution s = mid + rad*cos(phi).  Refinement disagreement
/// above 1e-6 throws QuadratureError.
double delta_quadrature(const EquilibriumMeasure& m, double beta,
                        const std::function<double(double)>& f);

/// Predicted mean of Re L_N(E + i eta(E)): (1/4)(2/beta - 1) log(kappa(E) v N^{-2/3}).
double clt_mean_shift(double beta, double kappa, long N);

/// Predicted Cov(Re L_N(z_l), Re L_N(z_j)) = -(1/beta) log|conj(z_l) - z_j|.
double clt_cov_rere(double beta, std::complex<double> zl, std::complex<double> zj);

/// A covariance prediction that is asymmetric in its two arguments before
/// symmetrization: value = average of the two orderings, discrepancy =
/// |difference| / max(|value|, 1e-12).
struct SymmetrizedCov {
    double value;
    double discrepancy;
};

/// Predicted Cov(Im L_N(z_l), Im L_N(z_j)) =
///   -(1/beta) log( (|conj(z_l) - z_j| / (kappa_l v eta_l)) ^ 1 ),
/// where cut_l = kappa(E_l) v eta(E_l).  The cut depends on which point is
/// taken first; the two orderings are averaged.
SymmetrizedCov clt_cov_imim(double beta, std::complex<double> zl, double cut_l,
                            std::complex<double> zj, double cut_j);

/// Finite-N surrogate for the eigenvalue-displacement covariance matrix:
///   b_ij = log( ((|gamma_i - gamma_j| v ell(gamma_i)) / kappa(gamma_i)) ^ 1 )
///          / (-log N),
/// averaged over the two orderings of (i,j).
SymmetrizedCov displacement_cov(const EquilibriumMeasure& m, long N, long ni, long nj);

}  // namespace loggas
