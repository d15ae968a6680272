#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlrb/affine_s.hpp"
#include "nlrb/kernel.hpp"
#include "nlrb/quadrature.hpp"

using namespace nlrb;

TEST_CASE("kernel evaluation") {
    KernelSpec k1 = KernelSpec::fractional(0.5, 1.0);
    CHECK(kernel_eval(k1, 2.0) == 0.0);
    CHECK(kernel_eval(k1, 1.0) == 0.0);  // zero at and beyond the truncation
    CHECK(kernel_eval(k1, 0.5) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(kernel_eval(k1, 0.0), std::domain_error);

    KernelSpec k2 = KernelSpec::fractional(0.25, std::numeric_limits<double>::infinity());
    CHECK(kernel_eval(k2, 1.0) == doctest::Approx(1.0));

    KernelSpec kc = KernelSpec::custom([](double r) { return std::exp(-r); }, 1.0);
    CHECK(kernel_eval(kc, 0.5) == doctest::Approx(std::exp(-0.5)));
    CHECK(kernel_eval(kc, 1.5) == 0.0);
}

TEST_CASE("scaling constant c_{n,s}") {
    CHECK(scaling_constant(1, 0.5) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
    // independent route through tgamma
    auto direct = [](int n, double s) {
        return std::pow(2.0, 2 * s) * s * std::tgamma(s + 0.5 * n) /
               (std::pow(M_PI, 0.5 * n) * std::tgamma(1.0 - s));
    };
    for (double s : {0.1, 1.0 / 3.0, 0.5, 0.7, 0.9})
        CHECK(scaling_constant(1, s) == doctest::Approx(direct(1, s)).epsilon(1e-13));
    CHECK(scaling_constant(2, 0.5) == doctest::Approx(direct(2, 0.5)).epsilon(1e-13));
    CHECK(scaling_constant(2, 0.5) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-13));
    // c_{1,s} vanishes linearly as s -> 0 (the formula's limit is s itself)
    CHECK(scaling_constant(1, 1e-4) == doctest::Approx(1e-4).epsilon(1e-3));
    CHECK_THROWS_AS(scaling_constant(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scaling_constant(1, 1.0), std::invalid_argument);
}

TEST_CASE("splitting constant") {
    CHECK(splitting_constant(1.0, 1, 0.5, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(splitting_constant(2.0, 1, 0.5, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(splitting_constant(1.0, 1, 1.0 / 3.0, 1.0) == doctest::Approx(6.0).epsilon(1e-13));
    CHECK_THROWS_AS(splitting_constant(0.5, 1, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("gauss rules integrate polynomials exactly") {
    for (int order : {2, 4, 8, 12}) {
        for (int p = 0; p <= 2 * order - 1; ++p) {
            const double got =
                gauss_integrate([p](double x) { return std::pow(x, p); }, 0.0, 1.0, order);
            CHECK(got == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("adaptive integrator handles endpoint singularities") {
    const double v = adaptive_integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                                        1e-10);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
    const double w =
        adaptive_integrate([](double x) { return std::log(x); }, 0.0, 1.0, 1e-10);
    CHECK(w == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("stable power primitives") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> U(0.1, 3.0);

    // pow_int against adaptive quadrature
    for (int t = 0; t < 50; ++t) {
        double t0 = U(eng), t1 = t0 + U(eng);
        double mu = U(eng) - 2.0;  // in (-1.9, 1.0)
        const double ref =
            adaptive_integrate([mu](double x) { return std::pow(x, mu); }, t0, t1, 1e-12);
        CHECK(pow_int(t0, t1, mu) == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(pow_int(0.5, 2.0, -1.0) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    CHECK(pow_int(0.0, 2.0, 0.5) == doctest::Approx(std::pow(2.0, 1.5) / 1.5).epsilon(1e-14));

    // powm1_over_e_int against adaptive quadrature, including e near and at 0
    for (double e : {-1.0, -0.5, -1e-5, -1e-9, 0.0, 1e-9, 1e-5, 0.75}) {
        for (int j = 0; j <= 2; ++j) {
            const double t0 = 0.25, t1 = 1.75;
            auto f = [e, j](double x) {
                const double core = e == 0.0 ? std::log(x) : std::expm1(e * std::log(x)) / e;
                return std::pow(x, j) * core;
            };
            const double ref = adaptive_integrate(f, t0, t1, 1e-12);
            CHECK(powm1_over_e_int(j, e, t0, t1) == doctest::Approx(ref).epsilon(1e-9));
        }
    }
    // lower limit at zero (needs j + e > -1)
    const double ref0 = adaptive_integrate(
        [](double x) { return x * std::expm1(-0.8 * std::log(x)) / -0.8; }, 0.0, 1.0, 1e-12);
    CHECK(powm1_over_e_int(1, -0.8, 0.0, 1.0) == doctest::Approx(ref0).epsilon(1e-9));
}

TEST_CASE("appendix bound examples") {
    CHECK(log_sup_bound(1.0, 1, 0.8) == doctest::Approx(1.0 / M_E).epsilon(1e-14));
    // numeric maximizer of xi |log xi| on [0, delta<=1] attains 1/e
    double sup = 0.0;
    for (int i = 1; i <= 200000; ++i) {
        const double xi = 0.8 * i / 200000.0;
        sup = std::max(sup, xi * std::abs(std::log(xi)));
    }
    CHECK(sup <= 1.0 / M_E + 1e-12);

    const double b = log_sup_bound(1.0 / 6.0, 2, 0.25);
    CHECK(b == doctest::Approx(std::pow(12.0 / M_E, 2)).epsilon(1e-13));
    double sup2 = 0.0;
    for (int i = 1; i <= 200000; ++i) {
        const double xi = 0.25 * std::pow(10.0, -12.0 * (1.0 - i / 200000.0));
        sup2 = std::max(sup2, std::pow(xi, 1.0 / 6.0) * std::pow(std::log(xi), 2));
    }
    CHECK(sup2 <= b);

    // delta > 1 keeps the second addend
    CHECK(log_sup_bound(1.0, 1, 2.0) >= 2.0 * std::log(2.0));

    CHECK(derivative_bound_constant(1, 1.0 / 6.0, 0.5) ==
          doctest::Approx(2.0 * 6.0 / M_E).epsilon(1e-13));
    // log_+ term vanishes for delta <= 1
    CHECK(derivative_bound_constant(3, 0.2, 1.0) ==
          doctest::Approx(std::pow(2.0, 3) * std::pow(3.0 / (M_E * 0.2), 3)).epsilon(1e-13));
    // monotone increasing in k for this configuration
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        const double c = derivative_bound_constant(k, 1.0 / 6.0, 0.25);
        CHECK(c > prev);
        prev = c;
    }
}
