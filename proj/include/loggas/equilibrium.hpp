#pragma once

#include <complex>
#include <vector>

#include "loggas/potential.hpp"

namespace loggas {

/// Single support interval [A,B] of a one-cut equilibrium measure.
struct SupportInterval {
    double A = -1.0;
    double B = 1.0;
};

/// Local scale functions at an energy E for ensemble size N:
/// kappa = distance of E to the nearer edge, ell = typical eigenvalue
/// spacing at E, eta = exp((log N)^{1/4}) * ell.
struct Scales {
    double kappa;
    double ell;
    double eta;
};

/// Branch selector for the two roots of u^2 + V'(z)u + h(z) = 0.
enum class Branch { principal, second };

/// sqrt(z-A)*sqrt(z-B), principal square roots extended to the negative real
/// axis by continuity from the upper half-plane (sqrt(-x) = i sqrt(x)).
std::complex<double> b_of(const SupportInterval& s, std::complex<double> z);

/// Solves the two endpoint moment equations
///   (1/2pi) int_A^B V'(t) / sqrt((t-A)(B-t)) dt = 0
///   (1/2pi) int_A^B t V'(t) / sqrt((t-A)(B-t)) dt = 1
/// (the conditions making -V'/2 + r*b decay like -1/z) by a damped 2d Newton
/// iteration with an analytic Jacobian; integrals by first-kind
/// Gauss-Chebyshev quadrature, exact for polynomial V'.
/// Throws EquilibriumError on non-convergence or a singular Jacobian.
SupportInterval solve_support(const Potential& p, SupportInterval guess, double tol);

/// The equilibrium measure of a confining polynomial potential, with density
/// rho(t) = (1/pi) r(t) sqrt((t-A)(B-t)) on [A,B].  Immutable after
/// construction; all evaluations are pure and thread-safe.
class EquilibriumMeasure {
  public:
    explicit EquilibriumMeasure(const Potential& p, SupportInterval guess = {-1.0, 1.0},
                                double tol = 1e-12);

    const Potential& potential() const { return potential_; }
    const SupportInterval& support() const { return support_; }
    double A() const { return support_.A; }
    double B() const { return support_.B; }
    /// Monomial coefficients of the polynomial r (ascending powers).
    const std::vector<double>& r_coeffs() const { return r_coeffs_; }
    int quad_order() const { return quad_order_; }

    /// r(z) = (1/2pi) int (V'(z)-V'(t))/(z-t) dt/tau(t), a polynomial.
    double r_of(double t) const;
    std::complex<double> r_of(std::complex<double> z) const;

    /// b on this measure's support (see free function b_of).
    std::complex<double> b(std::complex<double> z) const;

    /// Density of the measure; 0 outside [A,B].
    double density(double t) const;

    /// Cumulative distribution; 0 below A, 1 above B.
    double cdf(double x) const;

    /// Stieltjes transform m(z) = int rho(t)/(t-z) dt = -V'(z)/2 + r(z)b(z)
    /// (principal) or the second root -V'(z)/2 - r(z)b(z).  Real z inside
    /// [A,B] is interpreted as the limit from the upper half-plane.
    std::complex<double> stieltjes(std::complex<double> z, Branch which = Branch::principal) const;

    /// h(z) = int (V'(t)-V'(z))/(t-z) rho(t) dt, a polynomial; satisfies the
    /// fixed-point identity m(z)^2 + V'(z)m(z) + h(z) = 0.
    std::complex<double> h_of(std::complex<double> z) const;
    const std::vector<double>& h_coeffs() const { return h_coeffs_; }

    /// Moments mu_0..mu_kmax of the measure (mu_0 = 1).
    std::vector<double> moments(int kmax) const;

    /// Classical location gamma_k solving cdf(gamma_k) = k/N, 1 <= k <= N.
    double quantile(int k, int N) const;
    /// Same, for a mass q in (0,1].
    double quantile_q(double q) const;

    /// kappa/ell/eta at energy E (N >= 2).
    Scales scales(double E, int N) const;

    /// U(z) = int log(z-x) rho(x) dx with the principal log extended from
    /// above; for real E inside the support the imaginary part is
    /// pi*(1 - cdf(E)) exactly.
    std::complex<double> log_potential(std::complex<double> z) const;

  private:
    Potential potential_;
    SupportInterval support_;
    int quad_order_;
    std::vector<double> r_coeffs_;
    std::vector<double> h_coeffs_;
    std::vector<double> central_moments_;  // moments about the support midpoint
    std::vector<double> cdf_grid_;         // ascending abscissae in [A,B]
    std::vector<double> cdf_vals_;         // cdf at the grid points

    double cdf_raw(double x) const;
};

/// One-cut validity check: r(t) > 0 at grid_size Chebyshev points of [A,B].
struct OneCutCheck {
    bool one_cut;
    double min_r;
};
OneCutCheck check_one_cut(const Potential& p, const EquilibriumMeasure& m, int grid_size);

}  // namespace loggas
