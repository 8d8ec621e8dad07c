#pragma once

#include <complex>
#include <string>
#include <vector>

namespace loggas {

/// External-field potential V entering the ensemble weight exp(-(beta*N/2) * sum V(lambda_k)).
///
/// Restricted to polynomials of even degree >= 2 with positive leading coefficient,
/// which guarantees confinement for every beta and N and makes the divided difference
/// (V'(z) - V'(t))/(z - t) a polynomial, so all downstream singular integrals reduce
/// to exact Chebyshev quadrature.
class Potential {
public:
    enum class Kind { quadratic, quartic, polynomial };

    /// V(x) = x^2/2.
    static Potential quadratic();
    /// V(x) = x^4/4 + t*x^2/2.  One-cut validity for strongly negative t is not
    /// enforced here; callers check it on the solved equilibrium measure.
    static Potential quartic(double t);
    /// V(x) = sum coeffs[j] x^j.  Requires even degree >= 2, positive leading coefficient.
    static Potential polynomial(std::vector<double> coeffs);

    Kind kind() const { return kind_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    double quartic_coupling() const { return quartic_t_; }

    /// Monomial coefficients of V (index = power).
    const std::vector<double>& coefficients() const { return coeffs_; }
    /// Monomial coefficients of the order-th derivative of V.
    std::vector<double> derivative_coefficients(int order) const;

    /// V(x), V'(x) or V''(x); the only supported orders are 0, 1, 2.
    double evaluate(double x, int order) const;
    std::complex<double> evaluate(std::complex<double> z, int order) const;

    double operator()(double x) const { return evaluate(x, 0); }
    double derivative(double x) const { return evaluate(x, 1); }

    /// "quadratic", "quartic(t=...)", or "polynomial(degree=...)".
    std::string describe() const;

private:
    Potential(Kind kind, std::vector<double> coeffs, double quartic_t);

    Kind kind_;
    std::vector<double> coeffs_;    // V
    std::vector<double> dcoeffs_;   // V'
    std::vector<double> ddcoeffs_;  // V''
    double quartic_t_ = 0.0;
};

/// Horner evaluation of a monomial-coefficient polynomial.
double polyval(const std::vector<double>& coeffs, double x);
std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> z);

/// Coefficients of the derivative of a monomial-coefficient polynomial.
std::vector<double> polyder(const std::vector<double>& coeffs);

/// Stable evaluation of the divided difference (P(z) - P(t))/(z - t) for the
/// polynomial P given by coeffs; exact polynomial form, no cancellation as t -> z.
std::complex<double> divided_difference(const std::vector<double>& coeffs, double t,
                                        std::complex<double> z);

}  // namespace loggas
