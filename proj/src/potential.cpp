#include "loggas/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace loggas {

double polyval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::vector<double> polyder(const std::vector<double>& coeffs) {
    if (coeffs.size() <= 1) return {0.0};
    std::vector<double> d(coeffs.size() - 1);
    for (size_t j = 1; j < coeffs.size(); ++j) d[j - 1] = static_cast<double>(j) * coeffs[j];
    return d;
}

std::complex<double> divided_difference(const std::vector<double>& coeffs, double t,
                                        std::complex<double> z) {
    // (P(z)-P(t))/(z-t) = sum_{j>=1} c_j sum_{a+b=j-1} z^a t^b, evaluated by a
    // synthetic-division style recurrence: q_{d-1} = c_d, q_{k-1} = c_k + z*q_k,
    // then DD = sum_k q_k t^k over k = 0..d-1.
    const int d = static_cast<int>(coeffs.size()) - 1;
    if (d < 1) return 0.0;
    std::complex<double> q = coeffs[d];
    std::complex<double> acc = q;  // Horner in t, highest power first
    for (int k = d - 1; k >= 1; --k) {
        q = coeffs[k] + z * q;
        acc = acc * t + q;
    }
    return acc;
}

Potential::Potential(Kind kind, std::vector<double> coeffs, double quartic_t)
    : kind_(kind), coeffs_(std::move(coeffs)), quartic_t_(quartic_t) {
    const int deg = static_cast<int>(coeffs_.size()) - 1;
    if (deg < 2 || deg % 2 != 0)
        throw std::invalid_argument("potential degree must be even and >= 2, got " +
                                    std::to_string(deg));
    if (!(coeffs_.back() > 0.0))
        throw std::invalid_argument("potential leading coefficient must be positive");
    dcoeffs_ = polyder(coeffs_);
    ddcoeffs_ = polyder(dcoeffs_);
}

Potential Potential::quadratic() { return Potential(Kind::quadratic, {0.0, 0.0, 0.5}, 0.0); }

Potential Potential::quartic(double t) {
    return Potential(Kind::quartic, {0.0, 0.0, t / 2.0, 0.0, 0.25}, t);
}

Potential Potential::polynomial(std::vector<double> coeffs) {
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    return Potential(Kind::polynomial, std::move(coeffs), 0.0);
}

std::vector<double> Potential::derivative_coefficients(int order) const {
    if (order < 0) throw std::invalid_argument("unsupported derivative order");
    std::vector<double> c = coeffs_;
    for (int k = 0; k < order; ++k) c = polyder(c);
    return c;
}

double Potential::evaluate(double x, int order) const {
    switch (order) {
        case 0: return polyval(coeffs_, x);
        case 1: return polyval(dcoeffs_, x);
        case 2: return polyval(ddcoeffs_, x);
        default: throw std::invalid_argument("unsupported order " + std::to_string(order));
    }
}

std::complex<double> Potential::evaluate(std::complex<double> z, int order) const {
    switch (order) {
        case 0: return polyval(coeffs_, z);
        case 1: return polyval(dcoeffs_, z);
        case 2: return polyval(ddcoeffs_, z);
        default: throw std::invalid_argument("unsupported order " + std::to_string(order));
    }
}

std::string Potential::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::quadratic: os << "quadratic"; break;
        case Kind::quartic: os << "quartic(t=" << quartic_t_ << ")"; break;
        case Kind::polynomial:
            os << "polynomial(";
            for (size_t j = 0; j < coeffs_.size(); ++j) os << (j ? "," : "") << coeffs_[j];
            os << ")";
            break;
    }
    return os.str();
}

}  // namespace loggas
