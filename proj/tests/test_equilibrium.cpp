#include <cmath>
#include <complex>

#include "doctest.h"
#include "loggas/equilibrium.hpp"
#include "loggas/errors.hpp"
#include "loggas/rng.hpp"

using loggas::Branch;
using loggas::EquilibriumMeasure;
using loggas::Potential;
using loggas::SupportInterval;
using cplx = std::complex<double>;

namespace {
const double kQuarticEdge = std::pow(16.0 / 3.0, 0.25);

// Closed-form log-potential of the semicircle on [-2,2], branches from above.
cplx semicircle_log_potential(cplx z) {
    const cplx b = loggas::b_of({-2.0, 2.0}, z);
    return 0.25 * z * z - 0.25 * z * b + std::log(z + b) - 0.5 - std::log(2.0);
}
}  // namespace

TEST_CASE("endpoints of the semicircle measure") {
    const SupportInterval s =
        loggas::solve_support(Potential::quadratic(), {-1.0, 1.0}, 1e-13);
    CHECK(std::abs(s.A + 2.0) < 1e-10);
    CHECK(std::abs(s.B - 2.0) < 1e-10);
}

TEST_CASE("endpoints of the pure quartic measure") {
    const SupportInterval s = loggas::solve_support(Potential::quartic(0.0), {-1.0, 1.0}, 1e-13);
    CHECK(std::abs(s.B - kQuarticEdge) < 1e-10);
    CHECK(std::abs(s.A + kQuarticEdge) < 1e-10);
}

TEST_CASE("endpoints of the coupled quartic measure") {
    // 3a^4 + 4a^2 - 16 = 0 for V = x^4/4 + x^2/2, so B = 1.3179659265863665.
    const SupportInterval s = loggas::solve_support(Potential::quartic(1.0), {-1.0, 1.0}, 1e-13);
    CHECK(std::abs(s.B - 1.3179659265863665) < 1e-10);
    CHECK(std::abs(s.A + 1.3179659265863665) < 1e-10);
}

TEST_CASE("an exact guess is returned unchanged") {
    const SupportInterval s = loggas::solve_support(Potential::quadratic(), {-2.0, 2.0}, 1e-12);
    CHECK(std::abs(s.A + 2.0) < 1e-14);
    CHECK(std::abs(s.B - 2.0) < 1e-14);
}

TEST_CASE("solve_support input validation") {
    CHECK_THROWS_AS(loggas::solve_support(Potential::quadratic(), {1.0, -1.0}, 1e-12),
                    loggas::EquilibriumError);
    CHECK_THROWS_AS(loggas::solve_support(Potential::quadratic(), {-1.0, 1.0}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("r is constant one half for the quadratic potential") {
    const EquilibriumMeasure m(Potential::quadratic());
    CHECK(std::abs(m.r_of(0.0) - 0.5) < 1e-13);
    CHECK(std::abs(m.r_of(cplx(7.0, 3.0)) - 0.5) < 1e-13);
    REQUIRE(m.r_coeffs().size() == 1);
    CHECK(m.r_coeffs()[0] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("r of the pure quartic is (z^2 + a^2/2)/2") {
    const EquilibriumMeasure m(Potential::quartic(0.0));
    const double a = kQuarticEdge;
    CHECK(std::abs(m.r_of(0.0) - a * a / 4.0) < 1e-10);
    const cplx z(0.3, 1.1);
    CHECK(std::abs(m.r_of(z) - 0.5 * (z * z + a * a / 2.0)) < 1e-10);
}

TEST_CASE("b uses principal branches extended from above") {
    const SupportInterval s{-2.0, 2.0};
    CHECK(std::abs(loggas::b_of(s, 3.0) - std::sqrt(5.0)) < 1e-14);
    CHECK(std::abs(loggas::b_of(s, 2.0)) < 1e-14);
    CHECK(std::abs(loggas::b_of(s, 0.0) - cplx(0.0, 2.0)) < 1e-14);
    CHECK(std::abs(loggas::b_of(s, -3.0) + std::sqrt(5.0)) < 1e-14);
    // A negative zero imaginary part means the same as +0 (limit from above).
    CHECK(std::abs(loggas::b_of(s, cplx(0.0, -0.0)) - cplx(0.0, 2.0)) < 1e-14);
}

TEST_CASE("density matches the semicircle") {
    const EquilibriumMeasure m(Potential::quadratic());
    CHECK(std::abs(m.density(0.0) - 1.0 / M_PI) < 1e-12);
    CHECK(m.density(m.B()) == 0.0);  // vanishes at the (solved) edge
    CHECK(std::abs(m.density(2.0)) < 1e-7);
    CHECK(m.density(2.5) == 0.0);
    CHECK(m.density(-7.0) == 0.0);
    CHECK(std::abs(m.density(1.0) - std::sqrt(3.0) / (2.0 * M_PI)) < 1e-12);
}

TEST_CASE("density is nonnegative on a 512-point grid for built-ins") {
    for (const Potential& p :
         {Potential::quadratic(), Potential::quartic(0.0), Potential::quartic(1.0)}) {
        const EquilibriumMeasure m(p);
        for (int i = 0; i <= 511; ++i) {
            const double t = m.A() + (m.B() - m.A()) * i / 511.0;
            CHECK(m.density(t) >= 0.0);
        }
    }
}

TEST_CASE("cdf of the semicircle") {
    const EquilibriumMeasure m(Potential::quadratic());
    // F(x) = 1/2 + x sqrt(4-x^2)/(4 pi) + asin(x/2)/pi.
    CHECK(std::abs(m.cdf(1.0) - 0.8044988905221147) < 1e-12);
    CHECK(std::abs(m.cdf(0.0) - 0.5) < 1e-13);
    CHECK(m.cdf(m.A()) == 0.0);
    CHECK(m.cdf(m.B()) == 1.0);
    CHECK(std::abs(m.cdf(-2.0)) < 1e-12);
    CHECK(std::abs(m.cdf(2.0) - 1.0) < 1e-12);
    CHECK(m.cdf(-5.0) == 0.0);
    CHECK(m.cdf(9.0) == 1.0);
    // Mass of [-1,1] is 1/3 + sqrt(3)/(2 pi).
    const double mass = m.cdf(1.0) - m.cdf(-1.0);
    CHECK(std::abs(mass - (1.0 / 3.0 + std::sqrt(3.0) / (2.0 * M_PI))) < 1e-12);
}

TEST_CASE("cdf is monotone for built-ins") {
    for (const Potential& p : {Potential::quadratic(), Potential::quartic(1.0)}) {
        const EquilibriumMeasure m(p);
        double prev = -1.0;
        for (int i = 0; i <= 200; ++i) {
            const double x = m.A() - 0.1 + (m.B() - m.A() + 0.2) * i / 200.0;
            const double F = m.cdf(x);
            CHECK(F >= prev - 1e-14);
            prev = F;
        }
    }
}

TEST_CASE("stieltjes transform closed forms for the semicircle") {
    const EquilibriumMeasure m(Potential::quadratic());
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    CHECK(std::abs(m.stieltjes(cplx(0.0, 1.0)) - cplx(0.0, golden)) < 1e-13);
    CHECK(std::abs(m.stieltjes(cplx(10.0, 0.0)) - 0.5 * (-10.0 + std::sqrt(96.0))) < 1e-13);
    CHECK(std::abs(m.stieltjes(cplx(0.0, 1.0), Branch::second) -
                   cplx(0.0, -(std::sqrt(5.0) + 1.0) / 2.0)) < 1e-13);
}

TEST_CASE("h is the unit constant for the quadratic potential") {
    const EquilibriumMeasure m(Potential::quadratic());
    for (cplx z : {cplx(0.0, 1.0), cplx(3.0, -2.0), cplx(-15.0, 0.4)})
        CHECK(std::abs(m.h_of(z) - 1.0) < 1e-12);
}

TEST_CASE("fixed-point identity holds off the support") {
    loggas::RngStream rng(101, 0);
    for (const Potential& p : {Potential::quadratic(), Potential::quartic(0.0)}) {
        const EquilibriumMeasure m(p);
        for (int i = 0; i < 50; ++i) {
            const double re = -4.0 + 8.0 * rng.uniform01();
            const double im = 0.2 + 3.0 * rng.uniform01();
            const cplx z(re, i % 2 ? im : -im);
            const cplx mv = m.stieltjes(z);
            const cplx resid = mv * mv + p.evaluate(z, 1) * mv + m.h_of(z);
            CHECK(std::abs(resid) <= 1e-8 * (1.0 + std::norm(mv)));
        }
    }
}

TEST_CASE("specific fixed-point residuals are tiny") {
    const EquilibriumMeasure quad(Potential::quadratic());
    const cplx z1(0.0, 1.0);
    const cplx m1 = quad.stieltjes(z1);
    CHECK(std::abs(m1 * m1 + quad.potential().evaluate(z1, 1) * m1 + quad.h_of(z1)) < 1e-12);
    const EquilibriumMeasure quart(Potential::quartic(0.0));
    const cplx z2(0.0, 2.0);
    const cplx m2 = quart.stieltjes(z2);
    CHECK(std::abs(m2 * m2 + quart.potential().evaluate(z2, 1) * m2 + quart.h_of(z2)) < 1e-10);
}

TEST_CASE("quadratic factorization into the two roots") {
    loggas::RngStream rng(77, 0);
    for (const Potential& p : {Potential::quadratic(), Potential::quartic(1.0)}) {
        const EquilibriumMeasure m(p);
        for (int i = 0; i < 100; ++i) {
            const cplx z(-3.0 + 6.0 * rng.uniform01(), 0.1 + 2.0 * rng.uniform01());
            const cplx u(-2.0 + 4.0 * rng.uniform01(), -2.0 + 4.0 * rng.uniform01());
            const cplx mv = m.stieltjes(z, Branch::principal);
            const cplx mt = m.stieltjes(z, Branch::second);
            const cplx zeta = u * u + p.evaluate(z, 1) * u + m.h_of(z);
            const cplx fact = (u - mv) * (u - mt);
            CHECK(std::abs(zeta - fact) <= 1e-9 * (1.0 + std::norm(u)));
        }
    }
}

TEST_CASE("stieltjes decays like -1/z") {
    for (const Potential& p : {Potential::quadratic(), Potential::quartic(0.0)}) {
        const EquilibriumMeasure m(p);
        for (double y : {1e2, 1e3, 1e4}) {
            const cplx z(0.0, y);
            CHECK(std::abs(m.stieltjes(z) + 1.0 / z) <= 10.0 / (y * y));
        }
    }
}

TEST_CASE("stieltjes is Herglotz in the upper half-plane") {
    loggas::RngStream rng(55, 0);
    for (const Potential& p : {Potential::quadratic(), Potential::quartic(1.0)}) {
        const EquilibriumMeasure m(p);
        for (int i = 0; i < 100; ++i) {
            const cplx z(-5.0 + 10.0 * rng.uniform01(), 1e-3 + 4.0 * rng.uniform01());
            CHECK(m.stieltjes(z).imag() > 0.0);
        }
    }
}

TEST_CASE("boundary values recover pi times the density") {
    for (const Potential& p : {Potential::quadratic(), Potential::quartic(0.0)}) {
        const EquilibriumMeasure m(p);
        for (double frac : {0.1, 0.35, 0.5, 0.72, 0.94}) {
            const double E = m.A() + (m.B() - m.A()) * frac;
            const double im = m.stieltjes(cplx(E, 1e-8)).imag();
            CHECK(std::abs(im - M_PI * m.density(E)) < 1e-6);
        }
    }
}

TEST_CASE("real energies inside the support use the limit from above") {
    const EquilibriumMeasure m(Potential::quadratic());
    const double E = 0.5;
    const cplx lim = m.stieltjes(cplx(E, 1e-10));
    const cplx direct = m.stieltjes(cplx(E, 0.0));
    CHECK(std::abs(lim - direct) < 1e-8);
    CHECK(direct.imag() > 0.0);
}

TEST_CASE("moments of the semicircle are Catalan numbers") {
    const EquilibriumMeasure m(Potential::quadratic());
    const auto mu = m.moments(6);
    CHECK(std::abs(mu[0] - 1.0) < 1e-12);
    CHECK(std::abs(mu[1]) < 1e-12);
    CHECK(std::abs(mu[2] - 1.0) < 1e-12);
    CHECK(std::abs(mu[3]) < 1e-12);
    CHECK(std::abs(mu[4] - 2.0) < 1e-12);
    CHECK(std::abs(mu[6] - 5.0) < 1e-11);
}

TEST_CASE("second moment of the pure quartic measure") {
    const EquilibriumMeasure m(Potential::quartic(0.0));
    // mu_2 = a^6/16 with a^4 = 16/3.
    CHECK(std::abs(m.moments(2)[2] - std::pow(16.0 / 3.0, 1.5) / 16.0) < 1e-11);
}

TEST_CASE("quantiles of the semicircle") {
    const EquilibriumMeasure m(Potential::quadratic());
    CHECK(std::abs(m.quantile(512, 1024)) < 1e-10);
    CHECK(m.quantile(1024, 1024) == m.B());
    CHECK(std::abs(m.quantile_q(0.25) - (-0.8079455065990344)) < 1e-9);
    for (int k : {1, 13, 300, 700, 1023}) {
        const double g = m.quantile(k, 1024);
        CHECK(std::abs(m.cdf(g) - k / 1024.0) < 1e-10);
    }
    CHECK_THROWS_AS(m.quantile(0, 16), std::invalid_argument);
    CHECK_THROWS_AS(m.quantile(17, 16), std::invalid_argument);
}

TEST_CASE("quantiles are monotone in k") {
    const EquilibriumMeasure m(Potential::quartic(1.0));
    double prev = m.A();
    for (int k = 1; k <= 64; ++k) {
        const double g = m.quantile(k, 64);
        CHECK(g > prev - 1e-12);
        prev = g;
    }
}

TEST_CASE("scale functions") {
    const EquilibriumMeasure m(Potential::quadratic());
    const auto s0 = m.scales(0.0, 10000);
    CHECK(s0.kappa == doctest::Approx(2.0));
    CHECK(s0.ell == doctest::Approx(1.0 / (10000.0 * std::sqrt(2.0))).epsilon(1e-14));
    CHECK(s0.eta / s0.ell ==
          doctest::Approx(std::exp(std::pow(std::log(10000.0), 0.25))).epsilon(1e-14));
    const auto sedge = m.scales(2.0, 1000000);
    CHECK(sedge.kappa == doctest::Approx(0.0));
    CHECK(sedge.ell == doctest::Approx(1e-4).epsilon(1e-12));
    // N = round(e^16): eta/ell = exp((log N)^{1/4}) = e^2 up to 2e-9 relative.
    const auto s16 = m.scales(0.0, 8886111);
    CHECK(s16.eta / s16.ell == doctest::Approx(std::exp(2.0)).epsilon(1e-7));
    CHECK_THROWS_AS(m.scales(0.0, 1), std::invalid_argument);
}

TEST_CASE("log-potential of the semicircle matches the closed form") {
    const EquilibriumMeasure m(Potential::quadratic());
    SUBCASE("outside the support") {
        const cplx got = m.log_potential(cplx(3.0, 0.0));
        CHECK(std::abs(got.real() - 1.0353726669943646) < 1e-11);
        CHECK(std::abs(got.imag()) < 1e-13);
    }
    SUBCASE("left of the support") {
        const cplx got = m.log_potential(cplx(-3.0, 0.0));
        CHECK(std::abs(got.real() - 1.0353726669943646) < 1e-11);
        CHECK(std::abs(got.imag() - M_PI) < 1e-13);
    }
    SUBCASE("inside the support") {
        const cplx got = m.log_potential(cplx(0.0, 0.0));
        CHECK(std::abs(got.real() + 0.5) < 1e-11);
        CHECK(std::abs(got.imag() - M_PI / 2.0) < 1e-12);
        const cplx at07 = m.log_potential(cplx(0.7, 0.0));
        CHECK(std::abs(at07.real() - (0.7 * 0.7 / 4.0 - 0.5)) < 1e-10);
        CHECK(std::abs(at07.imag() - M_PI * (1.0 - m.cdf(0.7))) < 1e-13);
    }
    SUBCASE("complex arguments") {
        for (cplx z : {cplx(2.0, 1.0), cplx(-0.3, 0.05), cplx(0.9, 2.4), cplx(1.1, 1e-3)}) {
            CHECK(std::abs(m.log_potential(z) - semicircle_log_potential(z)) < 1e-10);
        }
    }
}

TEST_CASE("one-cut check distinguishes valid and broken couplings") {
    const Potential quad = Potential::quadratic();
    const EquilibriumMeasure mq(quad);
    const auto cq = loggas::check_one_cut(quad, mq, 512);
    CHECK(cq.one_cut);
    CHECK(cq.min_r == doctest::Approx(0.5).epsilon(1e-12));

    const Potential q0 = Potential::quartic(0.0);
    const EquilibriumMeasure m0(q0);
    const auto c0 = loggas::check_one_cut(q0, m0, 512);
    CHECK(c0.one_cut);
    // The 512-point grid does not contain t=0 exactly, so the observed
    // minimum sits ~1e-5 above the true minimum a^2/4.
    CHECK(c0.min_r == doctest::Approx(kQuarticEdge * kQuarticEdge / 4.0).epsilon(5e-5));

    const Potential qm5 = Potential::quartic(-5.0);
    const EquilibriumMeasure mm5(qm5, {-3.0, 3.0});
    const auto cm5 = loggas::check_one_cut(qm5, mm5, 512);
    CHECK_FALSE(cm5.one_cut);
    CHECK(cm5.min_r < 0.0);

    CHECK_THROWS_AS(loggas::check_one_cut(quad, m0, 64), std::invalid_argument);
}
