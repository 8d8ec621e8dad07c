#include "loggas/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loggas/errors.hpp"
#include "loggas/quadrature.hpp"

namespace loggas {

namespace {

/// Principal log extended from above: for w on the negative real axis the
/// argument is +pi (limit from the upper half-plane).
std::complex<double> log_up(std::complex<double> w) {
    if (w.imag() == 0.0) {
        if (w.real() < 0.0) return {std::log(-w.real()), M_PI};
        return {std::log(w.real()), 0.0};
    }
    return std::log(w);
}

void check_collision(const std::vector<double>& lambdas, std::complex<double> z) {
    for (const double l : lambdas)
        if (std::abs(std::complex<double>(l, 0.0) - z) < 1e-300)
            throw ObservableError("evaluation point collides with an eigenvalue");
}

}  // namespace

std::complex<double> stieltjes_emp(const std::vector<double>& lambdas, std::complex<double> z,
                                   int order) {
    if (lambdas.empty()) throw std::invalid_argument("stieltjes_emp: empty sample");
    if (order < 0 || order > 2)
        throw std::invalid_argument("stieltjes_emp: unsupported order " + std::to_string(order));
    check_collision(lambdas, z);
    std::complex<double> acc = 0.0;
    for (const double l : lambdas) {
        const std::complex<double> inv = 1.0 / (std::complex<double>(l, 0.0) - z);
        if (order == 0)
            acc += inv;
        else if (order == 1)
            acc += inv * inv;
        else
            acc += inv * inv * inv;
    }
    const double n = static_cast<double>(lambdas.size());
    return order == 2 ? 2.0 * acc / n : acc / n;
}

int count_interval(const std::vector<double>& lambdas, double a, double b) {
    if (a > b) return 0;
    const auto lo = std::lower_bound(lambdas.begin(), lambdas.end(), a);
    const auto hi = std::upper_bound(lambdas.begin(), lambdas.end(), b);
    return static_cast<int>(hi - lo);
}

FieldValue log_char(const std::vector<double>& lambdas, const EquilibriumMeasure& m,
                    std::complex<double> z) {
    if (lambdas.empty()) throw std::invalid_argument("log_char: empty sample");
    check_collision(lambdas, z);
    std::complex<double> sum = 0.0;
    for (const double l : lambdas) sum += log_up(z - l);
    const std::complex<double> val =
        sum - static_cast<double>(lambdas.size()) * m.log_potential(z);
    FieldValue out;
    out.re = val.real();
    out.im = val.imag();
    out.at = z;
    return out;
}

double linear_stat(const std::vector<double>& lambdas, const EquilibriumMeasure& m,
                   const std::function<double(double)>& f) {
    if (lambdas.empty()) throw std::invalid_argument("linear_stat: empty sample");
    double emp = 0.0;
    for (const double l : lambdas) emp += f(l);
    // ∫ f dmu = (rad^2/pi) ∫_0^pi f(t(θ)) r(t(θ)) sin²θ dθ with
    // t(θ) = mid + rad cosθ: the edge square roots become smooth in θ.
    const double mid = 0.5 * (m.A() + m.B());
    const double rad = 0.5 * (m.B() - m.A());
    const auto g = [&](double theta) {
        const double s = std::sin(theta);
        const double t = mid + rad * std::cos(theta);
        return f(t) * m.r_of(t) * s * s;
    };
    bool converged = true;
    const double integral =
        rad * rad / M_PI * integrate_adaptive(g, 0.0, M_PI, 1e-12, 48, &converged);
    if (!converged) throw QuadratureError("linear_stat: deterministic integral did not converge");
    return emp - static_cast<double>(lambdas.size()) * integral;
}

double displacement(const std::vector<double>& lambdas, const EquilibriumMeasure& m, double beta,
                    int n) {
    const int N = static_cast<int>(lambdas.size());
    if (N < 2) throw std::invalid_argument("displacement: needs N >= 2");
    if (n < 1 || n > N) throw std::invalid_argument("displacement: index out of range");
    if (!(beta > 0.0)) throw std::invalid_argument("displacement: beta must be positive");
    const double gamma = m.quantile(n, N);
    const double rho = m.density(gamma);
    return M_PI * N * std::sqrt(beta / std::log(static_cast<double>(N))) * rho *
           (lambdas[n - 1] - gamma);
}

std::complex<double> f_kernel(const std::vector<double>& lambdas, std::complex<double> z,
                              std::complex<double> w) {
    if (lambdas.empty()) throw std::invalid_argument("f_kernel: empty sample");
    check_collision(lambdas, z);
    check_collision(lambdas, w);
    // d/dw [(s(z)-s(w))/(z-w)] = (1/N) sum 1/((l-z)(l-w)^2) exactly; unlike
    // the difference-of-transforms form this has no cancellation as w -> z,
    // and it reduces to s''(z)/2 on the diagonal.
    std::complex<double> acc = 0.0;
    for (const double l : lambdas) {
        const std::complex<double> dz = std::complex<double>(l, 0.0) - z;
        const std::complex<double> dw = std::complex<double>(l, 0.0) - w;
        acc += 1.0 / (dz * dw * dw);
    }
    return acc / static_cast<double>(lambdas.size());
}

LoopObservables loop_observables(const std::vector<double>& lambdas, const EquilibriumMeasure& m,
                                 std::complex<double> z, std::complex<double> w) {
    check_collision(lambdas, z);
    check_collision(lambdas, w);
    const Potential& V = m.potential();
    const std::complex<double> s = stieltjes_emp(lambdas, z, 0);
    const std::complex<double> vp = V.evaluate(z, 1);
    LoopObservables out;
    out.P = s * s + vp * s + m.h_of(z);
    const std::vector<double> dcoeffs = V.derivative_coefficients(1);
    std::complex<double> dd = 0.0;
    for (const double l : lambdas) dd += divided_difference(dcoeffs, l, z);
    out.Delta = dd / static_cast<double>(lambdas.size()) - m.h_of(z);
    out.fzw = f_kernel(lambdas, z, w);
    return out;
}

}  // namespace loggas
