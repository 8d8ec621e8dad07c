#include "loggas/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "loggas/errors.hpp"
#include "loggas/quadrature.hpp"

namespace loggas {

namespace {

constexpr double kRefineTol = 1e-6;
constexpr double kPi = 3.14159265358979323846;

/// Relative disagreement between two resolutions, floored by the quadrature's
/// own L1 mass so exact cancellations (symmetric integrands summing to zero)
/// are judged on an absolute scale instead of a vanishing relative one.
double refinement_disagreement(double coarse, double fine, double l1_mass) {
    const double denom =
        std::max({std::abs(coarse), std::abs(fine), 1e-9 * l1_mass, 1e-300});
    return std::abs(fine - coarse) / denom;
}

struct Sigma2Pass {
    double value;
    double l1;
};

Sigma2Pass sigma2_pass(const EquilibriumMeasure& m, double beta,
                       const std::function<double(double)>& f,
                       const std::function<double(double)>& fprime, int n) {
    const double A = m.A(), B = m.B();
    const double rad = 0.5 * (B - A);
    const Chebyshev2Rule outer = chebyshev2_rule(n, A, B);  // s, weight tau
    const std::vector<double> inner = chebyshev1_nodes(n, A, B);  // t, weight 1/tau
    const double w_inner = kPi / static_cast<double>(n);
    // Nodes of the two families can approach each other like O(rad/n^3) near
    // the edges; below this separation the difference quotient loses digits to
    // cancellation, so switch to its limit f'((s+t)/2).
    const double coincide = 1e-6 * rad;

    std::vector<double> ft(inner.size());
    for (std::size_t j = 0; j < inner.size(); ++j) ft[j] = f(inner[j]);

    double total = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
        const double s = outer.nodes[i];
        const double fs = f(s), dfs = fprime(s);
        double row = 0.0, row_l1 = 0.0;
        for (std::size_t j = 0; j < inner.size(); ++j) {
            const double t = inner[j];
            const double dq = (std::abs(s - t) < coincide)
                                  ? fprime(0.5 * (s + t))
                                  : (fs - ft[j]) / (s - t);
            row += dq;
            row_l1 += std::abs(dq);
        }
        total += outer.weights[i] * dfs * w_inner * row;
        l1 += outer.weights[i] * std::abs(dfs) * w_inner * row_l1;
    }
    const double scale = 1.0 / (kPi * kPi * beta);
    return {scale * total, scale * l1};
}

}  // namespace

double sigma2_quadrature(const EquilibriumMeasure& m, double beta,
                         const std::function<double(double)>& f,
                         const std::function<double(double)>& fprime) {
    const Sigma2Pass coarse = sigma2_pass(m, beta, f, fprime, 128);
    const Sigma2Pass fine = sigma2_pass(m, beta, f, fprime, 256);
    const double dis = refinement_disagreement(coarse.value, fine.value, fine.l1);
    if (dis > kRefineTol)
        throw QuadratureError("sigma2_quadrature: refinement disagreement " +
                              std::to_string(dis));
    return fine.value;
}

namespace {

/// psi(x) = r'(x) tau(x) / r(x) and its derivative, with
/// tau(x) = sqrt((x-A)(B-x)) (interior x only).
struct PsiEval {
    const EquilibriumMeasure& m;
    std::vector<double> rp;   // coefficients of r'
    std::vector<double> rpp;  // coefficients of r''
    double mid, rad;

    explicit PsiEval(const EquilibriumMeasure& meas)
        : m(meas),
          rp(polyder(meas.r_coeffs())),
          rpp(polyder(rp)),
          mid(0.5 * (meas.A() + meas.B())),
          rad(0.5 * (meas.B() - meas.A())) {}

    double tau(double x) const {
        const double u = x - mid;
        return std::sqrt(std::max(0.0, rad * rad - u * u));
    }
    double value(double x) const { return polyval(rp, x) * tau(x) / m.r_of(x); }
    double derivative(double x) const {
        const double r = m.r_of(x);
        const double d1 = polyval(rp, x), d2 = polyval(rpp, x);
        const double tx = tau(x);
        const double taup = (mid - x) / tx;
        return d2 * tx / r + d1 * taup / r - d1 * d1 * tx / (r * r);
    }
};

/// Regularized Hilbert-transform remainder
///   R(x) = int_A^B (psi(s)-psi(x))/(x-s) ds  (the principal value already
/// subtracted), evaluated through s = mid + rad cos(phi) where the integrand
/// is smooth.
double pv_remainder(const PsiEval& psi, double x, double tol) {
    const double px = psi.value(x);
    const double rad = psi.rad, mid = psi.mid;
    const double coincide = 1e-7 * rad;
    bool converged = true;
    const double val = integrate_adaptive(
        [&](double phi) {
            const double sphi = std::sin(phi);
            const double s = mid + rad * std::cos(phi);
            if (std::abs(x - s) < coincide) return -psi.derivative(x) * rad * sphi;
            // psi(s(phi)) = r'(s) * rad*sin(phi) / r(s): tau in closed form.
            const double ps = polyval(psi.rp, s) * rad * sphi / psi.m.r_of(s);
            return (ps - px) / (x - s) * rad * sphi;
        },
        0.0, kPi, tol, 48, &converged);
    if (!converged)
        throw QuadratureError("delta_quadrature: inner principal value did not converge");
    return val;
}

struct DeltaPass {
    double bracket;
    double l1;
};

DeltaPass delta_pass(const EquilibriumMeasure& m, const PsiEval& psi,
                     const std::function<double(double)>& f, int n) {
    const double A = m.A(), B = m.B();
    const std::vector<double> xs = chebyshev1_nodes(n, A, B);
    const double w = kPi / static_cast<double>(n);
    double integral = 0.0, l1 = 0.0;
    for (double x : xs) {
        const double hil =
            pv_remainder(psi, x, 1e-12) + psi.value(x) * std::log((x - A) / (B - x));
        const double term = f(x) * (kPi + hil);
        integral += w * term;
        l1 += w * std::abs(term);
    }
    const double edge = 0.25 * (f(A) + f(B));
    const double scale = 1.0 / (2.0 * kPi * kPi);
    return {edge - scale * integral, std::abs(edge) + scale * l1};
}

}  // namespace

double delta_quadrature(const EquilibriumMeasure& m, double beta,
                        const std::function<double(double)>& f) {
    const PsiEval psi(m);
    const DeltaPass coarse = delta_pass(m, psi, f, 64);
    const DeltaPass fine = delta_pass(m, psi, f, 128);
    const double dis = refinement_disagreement(coarse.bracket, fine.bracket, fine.l1);
    if (dis > kRefineTol)
        throw QuadratureError("delta_quadrature: refinement disagreement " +
                              std::to_string(dis));
    return (2.0 / beta - 1.0) * fine.bracket;
}

double clt_mean_shift(double beta, double kappa, long N) {
    const double floor = std::pow(static_cast<double>(N), -2.0 / 3.0);
    return 0.25 * (2.0 / beta - 1.0) * std::log(std::max(kappa, floor));
}

double clt_cov_rere(double beta, std::complex<double> zl, std::complex<double> zj) {
    return -std::log(std::abs(std::conj(zl) - zj)) / beta;
}

namespace {

double symmetrize(double first, double second, SymmetrizedCov* out) {
    out->value = 0.5 * (first + second);
    out->discrepancy =
        std::abs(first - second) / std::max(std::abs(out->value), 1e-12);
    return out->value;
}

}  // namespace

SymmetrizedCov clt_cov_imim(double beta, std::complex<double> zl, double cut_l,
                            std::complex<double> zj, double cut_j) {
    const double sep = std::abs(std::conj(zl) - zj);
    const double v_l = -std::log(std::min(sep / cut_l, 1.0)) / beta;
    const double v_j = -std::log(std::min(sep / cut_j, 1.0)) / beta;
    SymmetrizedCov out{};
    symmetrize(v_l, v_j, &out);
    return out;
}

SymmetrizedCov displacement_cov(const EquilibriumMeasure& m, long N, long ni, long nj) {
    const double gi = m.quantile(static_cast<int>(ni), static_cast<int>(N));
    const double gj = m.quantile(static_cast<int>(nj), static_cast<int>(N));
    const double logN = std::log(static_cast<double>(N));
    auto one_sided = [&](double ga, double gb) {
        const Scales sc = m.scales(ga, static_cast<int>(N));
        const double ratio = std::max(std::abs(ga - gb), sc.ell) / sc.kappa;
        return std::log(std::min(ratio, 1.0)) / (-logN);
    };
    SymmetrizedCov out{};
    symmetrize(one_sided(gi, gj), one_sided(gj, gi), &out);
    return out;
}

}  // namespace loggas
