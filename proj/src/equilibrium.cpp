#include "loggas/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "loggas/errors.hpp"
#include "loggas/quadrature.hpp"

namespace loggas {

namespace {

// Principal square root extended to the negative real axis by continuity
// from the upper half-plane: sqrt(-x) = i sqrt(x) for x > 0.
std::complex<double> sqrt_up(std::complex<double> w) {
    if (w.imag() == 0.0) w = std::complex<double>(w.real(), +0.0);
    return std::sqrt(w);
}

int chebyshev_order(const Potential& p) { return std::max(64, 4 * p.degree()); }

}  // namespace

std::complex<double> b_of(const SupportInterval& s, std::complex<double> z) {
    return sqrt_up(z - s.A) * sqrt_up(z - s.B);
}

SupportInterval solve_support(const Potential& p, SupportInterval guess, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_support: tol must be positive");
    if (!(guess.A < guess.B)) throw EquilibriumError("solve_support: guess requires A < B");

    const int n = chebyshev_order(p);
    std::vector<double> ct(n);
    for (int j = 0; j < n; ++j) ct[j] = std::cos((2.0 * j + 1.0) * M_PI / (2.0 * n));

    // F1 = (1/2n) sum V'(t_j), F2 = (1/2n) sum t_j V'(t_j) with
    // t_j = mid + rad*cos(theta_j); targets are 0 and 1.
    struct Eval {
        double F1, F2;
        double J11, J12, J21, J22;  // d(F1,F2)/d(A,B)
    };
    auto evaluate = [&](double A, double B) {
        const double mid = 0.5 * (A + B), rad = 0.5 * (B - A);
        Eval e{0, 0, 0, 0, 0, 0};
        for (int j = 0; j < n; ++j) {
            const double t = mid + rad * ct[j];
            const double v1 = p.evaluate(t, 1);
            const double v2 = p.evaluate(t, 2);
            const double dA = 0.5 * (1.0 - ct[j]);  // dt/dA
            const double dB = 0.5 * (1.0 + ct[j]);  // dt/dB
            e.F1 += v1;
            e.F2 += t * v1;
            e.J11 += v2 * dA;
            e.J12 += v2 * dB;
            e.J21 += (v1 + t * v2) * dA;
            e.J22 += (v1 + t * v2) * dB;
        }
        const double w = 0.5 / n;
        e.F1 *= w;
        e.F2 *= w;
        e.J11 *= w;
        e.J12 *= w;
        e.J21 *= w;
        e.J22 *= w;
        return e;
    };

    double A = guess.A, B = guess.B;
    Eval e = evaluate(A, B);
    double res = std::hypot(e.F1, e.F2 - 1.0);
    for (int iter = 0; iter < 100; ++iter) {
        if (res < tol) return {A, B};
        const double det = e.J11 * e.J22 - e.J12 * e.J21;
        const double scale = std::abs(e.J11) + std::abs(e.J12) + std::abs(e.J21) +
                             std::abs(e.J22) + 1e-300;
        if (std::abs(det) < 1e-14 * scale * scale)
            throw EquilibriumError("solve_support: Newton Jacobian singular");
        const double g1 = e.F1, g2 = e.F2 - 1.0;
        const double dA = -(e.J22 * g1 - e.J12 * g2) / det;
        const double dB = -(-e.J21 * g1 + e.J11 * g2) / det;
        // Damped step: halve until the residual decreases and A < B holds.
        double s = 1.0;
        bool accepted = false;
        while (s > 1e-14) {
            const double An = A + s * dA, Bn = B + s * dB;
            if (Bn - An > 1e-12) {
                Eval en = evaluate(An, Bn);
                const double rn = std::hypot(en.F1, en.F2 - 1.0);
                if (rn < res || rn < tol) {
                    A = An;
                    B = Bn;
                    e = en;
                    res = rn;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if (!accepted) break;
    }
    if (res < tol) return {A, B};
    std::ostringstream msg;
    msg << "solve_support: no convergence after 100 iterations; last residual " << res;
    throw EquilibriumError(msg.str());
}

EquilibriumMeasure::EquilibriumMeasure(const Potential& p, SupportInterval guess, double tol)
    : potential_(p), support_(solve_support(p, guess, tol)), quad_order_(chebyshev_order(p)) {
    const int deg = potential_.degree();
    const std::vector<double> c = potential_.derivative_coefficients(1);  // V' coefficients

    // r(z) = sum_a z^a sum_{j>=a+1} c_j I_{j-1-a} with the Chebyshev power
    // sums I_p = (1/2pi) int t^p / tau(t) dt, evaluated exactly.
    {
        const auto nodes = chebyshev1_nodes(quad_order_, support_.A, support_.B);
        const int pmax = std::max(0, deg - 2);
        std::vector<double> I(pmax + 1, 0.0);
        for (double t : nodes) {
            double tp = 1.0;
            for (int q = 0; q <= pmax; ++q) {
                I[q] += tp;
                tp *= t;
            }
        }
        for (double& v : I) v *= 0.5 / quad_order_;
        r_coeffs_.assign(std::max(1, deg - 1), 0.0);
        for (int a = 0; a + 1 < static_cast<int>(c.size()); ++a)
            for (int j = a + 1; j < static_cast<int>(c.size()); ++j)
                r_coeffs_[a] += c[j] * I[j - 1 - a];
    }

    // h(z) = sum_a z^a sum_{j>=a+1} c_j mu_{j-1-a} with mu_k the moments of
    // the measure itself.
    {
        const std::vector<double> mu = moments(std::max(0, deg - 2));
        if (std::abs(mu[0] - 1.0) > 1e-10) {
            std::ostringstream msg;
            msg << "equilibrium measure not normalized: total mass " << mu[0];
            throw EquilibriumError(msg.str());
        }
        h_coeffs_.assign(std::max(1, deg - 1), 0.0);
        for (int a = 0; a + 1 < static_cast<int>(c.size()); ++a)
            for (int j = a + 1; j < static_cast<int>(c.size()); ++j)
                h_coeffs_[a] += c[j] * mu[j - 1 - a];
    }

    // Central moments about the support midpoint feed the far-field series
    // of the Stieltjes transform, where the direct -V'/2 + r*b formula loses
    // all significance to cancellation.
    {
        const int kmax = 40;
        const double mid = 0.5 * (support_.A + support_.B);
        const int degr = static_cast<int>(r_coeffs_.size()) - 1;
        const int n2 = std::max(quad_order_, (kmax + degr) / 2 + 2);
        const auto rule = chebyshev2_rule(n2, support_.A, support_.B);
        central_moments_.assign(kmax + 1, 0.0);
        for (int i = 0; i < n2; ++i) {
            const double w = rule.weights[i] * r_of(rule.nodes[i]) / M_PI;
            double tp = 1.0;
            for (int k = 0; k <= kmax; ++k) {
                central_moments_[k] += w * tp;
                tp *= rule.nodes[i] - mid;
            }
        }
    }

    // Eager CDF table on a Chebyshev-spaced grid, used to seed quantile().
    {
        const int m = 1024;
        const double mid = 0.5 * (support_.A + support_.B), rad = 0.5 * (support_.B - support_.A);
        cdf_grid_.resize(m + 1);
        cdf_vals_.resize(m + 1);
        for (int k = 0; k <= m; ++k) {
            const double theta = M_PI * (m - k) / m;
            cdf_grid_[k] = mid + rad * std::cos(theta);
            cdf_vals_[k] = cdf_raw(cdf_grid_[k]);
        }
        cdf_grid_.front() = support_.A;
        cdf_grid_.back() = support_.B;
        cdf_vals_.front() = 0.0;
        cdf_vals_.back() = 1.0;
        for (int k = 1; k <= m; ++k) cdf_vals_[k] = std::max(cdf_vals_[k], cdf_vals_[k - 1]);
    }
}

double EquilibriumMeasure::r_of(double t) const {
    return polyval(r_coeffs_, t);
}

std::complex<double> EquilibriumMeasure::r_of(std::complex<double> z) const {
    return polyval(r_coeffs_, z);
}

std::complex<double> EquilibriumMeasure::b(std::complex<double> z) const {
    return b_of(support_, z);
}

double EquilibriumMeasure::density(double t) const {
    if (t <= support_.A || t >= support_.B) return 0.0;
    const double tau2 = (t - support_.A) * (support_.B - t);
    return r_of(t) * std::sqrt(tau2) / M_PI;
}

double EquilibriumMeasure::cdf_raw(double x) const {
    if (x <= support_.A) return 0.0;
    if (x >= support_.B) return 1.0;
    const double mid = 0.5 * (support_.A + support_.B), rad = 0.5 * (support_.B - support_.A);
    const double u = std::clamp((x - mid) / rad, -1.0, 1.0);
    const double theta_x = std::acos(u);
    // cdf(x) = (rad^2/pi) int_{theta_x}^{pi} r(mid+rad cos) sin^2 dtheta,
    // a trigonometric polynomial: the fixed rule below is exact.
    auto g = [&](double theta) {
        const double s = std::sin(theta);
        return r_of(mid + rad * std::cos(theta)) * s * s;
    };
    const double val = rad * rad / M_PI * integrate_gl(g, theta_x, M_PI, 64);
    return std::clamp(val, 0.0, 1.0);
}

double EquilibriumMeasure::cdf(double x) const { return cdf_raw(x); }

std::complex<double> EquilibriumMeasure::stieltjes(std::complex<double> z, Branch which) const {
    const double mid = 0.5 * (support_.A + support_.B), rad = 0.5 * (support_.B - support_.A);
    const std::complex<double> zeta = z - mid;
    if (std::abs(zeta) > 8.0 * rad) {
        // Far field: -V'/2 + r*b cancels catastrophically, so sum the
        // convergent moment series m(z) = -sum_k nu_k / zeta^{k+1} instead
        // (ratio <= 1/8, machine-exact at 40 terms).  The second root follows
        // from the exact root sum m + m~ = -V'.
        const std::complex<double> invz = 1.0 / zeta;
        std::complex<double> series = 0.0;
        for (int k = static_cast<int>(central_moments_.size()) - 1; k >= 0; --k)
            series = (series + central_moments_[k]) * invz;
        const std::complex<double> principal = -series;
        if (which == Branch::principal) return principal;
        return -potential_.evaluate(z, 1) - principal;
    }
    const std::complex<double> rb = r_of(z) * b(z);
    const std::complex<double> v1 = potential_.evaluate(z, 1);
    return (which == Branch::principal) ? -0.5 * v1 + rb : -0.5 * v1 - rb;
}

std::complex<double> EquilibriumMeasure::h_of(std::complex<double> z) const {
    return polyval(h_coeffs_, z);
}

std::vector<double> EquilibriumMeasure::moments(int kmax) const {
    if (kmax < 0) throw std::invalid_argument("moments: kmax must be >= 0");
    const int degr = static_cast<int>(r_coeffs_.size()) - 1;
    const int n2 = std::max(quad_order_, (kmax + degr) / 2 + 2);
    const auto rule = chebyshev2_rule(n2, support_.A, support_.B);
    std::vector<double> mu(kmax + 1, 0.0);
    for (int i = 0; i < n2; ++i) {
        const double w = rule.weights[i] * r_of(rule.nodes[i]) / M_PI;
        double tp = 1.0;
        for (int k = 0; k <= kmax; ++k) {
            mu[k] += w * tp;
            tp *= rule.nodes[i];
        }
    }
    return mu;
}

double EquilibriumMeasure::quantile(int k, int N) const {
    if (N < 1 || k < 1 || k > N) throw std::invalid_argument("quantile: require 1 <= k <= N");
    return quantile_q(static_cast<double>(k) / N);
}

double EquilibriumMeasure::quantile_q(double q) const {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_q: require q in (0,1]");
    if (q == 1.0) return support_.B;
    // Bracket from the table, then safeguarded Newton with derivative rho.
    auto it = std::lower_bound(cdf_vals_.begin(), cdf_vals_.end(), q);
    std::size_t hi_idx = std::min<std::size_t>(it - cdf_vals_.begin(), cdf_vals_.size() - 1);
    std::size_t lo_idx = hi_idx > 0 ? hi_idx - 1 : 0;
    double lo = cdf_grid_[lo_idx], hi = cdf_grid_[hi_idx];
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = cdf_raw(x) - q;
        if (std::abs(f) <= 1e-13) return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double rho = density(x);
        double xn = (rho > 1e-300) ? x - f / rho : x;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (xn == x) break;
        x = xn;
    }
    if (std::abs(cdf_raw(x) - q) > 1e-10)
        throw EquilibriumError("quantile: inversion did not reach tolerance");
    return x;
}

Scales EquilibriumMeasure::scales(double E, int N) const {
    if (N < 2) throw std::invalid_argument("scales: require N >= 2");
    const double kappa = std::min(std::abs(support_.A - E), std::abs(support_.B - E));
    const double edge = std::pow(static_cast<double>(N), -2.0 / 3.0);
    double ell;
    if (E >= support_.A + edge && E <= support_.B - edge)
        ell = 1.0 / (N * std::sqrt(kappa));
    else
        ell = edge;
    const double eta = std::exp(std::pow(std::log(static_cast<double>(N)), 0.25)) * ell;
    return {kappa, ell, eta};
}

std::complex<double> EquilibriumMeasure::log_potential(std::complex<double> z) const {
    const double mid = 0.5 * (support_.A + support_.B), rad = 0.5 * (support_.B - support_.A);
    const double scale = rad * rad / M_PI;
    auto weight = [&](double theta) {
        const double s = std::sin(theta);
        return r_of(mid + rad * std::cos(theta)) * s * s;
    };
    if (z.imag() != 0.0) {
        auto f = [&](double theta) {
            return std::log(z - (mid + rad * std::cos(theta))) * weight(theta);
        };
        return scale * integrate_adaptive(f, 0.0, M_PI, 1e-13, 52);
    }
    // Real E: imaginary part is exactly pi*(mass above E); real part is the
    // integral of log|E - t|, split at the (integrable) singularity.
    const double E = z.real();
    auto fre = [&](double theta) {
        const double d = std::max(std::abs(E - (mid + rad * std::cos(theta))), 1e-300);
        return std::log(d) * weight(theta);
    };
    double re;
    if (E <= support_.A || E >= support_.B) {
        re = scale * integrate_adaptive(fre, 0.0, M_PI, 1e-13, 52);
    } else {
        const double theta_E = std::acos(std::clamp((E - mid) / rad, -1.0, 1.0));
        re = scale * (integrate_adaptive(fre, 0.0, theta_E, 1e-13, 52) +
                      integrate_adaptive(fre, theta_E, M_PI, 1e-13, 52));
    }
    return {re, M_PI * (1.0 - cdf_raw(E))};
}

OneCutCheck check_one_cut(const Potential& p, const EquilibriumMeasure& m, int grid_size) {
    if (p.describe() != m.potential().describe())
        throw std::invalid_argument("check_one_cut: measure was solved for a different potential");
    const auto nodes = chebyshev1_nodes(grid_size, m.A(), m.B());
    double min_r = std::numeric_limits<double>::infinity();
    for (double t : nodes) min_r = std::min(min_r, m.r_of(t));
    return {min_r > 0.0, min_r};
}

}  // namespace loggas
