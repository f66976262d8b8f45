#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chsep/potential.hpp"
#include "chsep/rng.hpp"

using namespace chsep;

namespace {
const SingularPotential kLog = SingularPotential::flory_huggins(1.0, 2.0);
}

TEST_CASE("beta of the logarithmic potential") {
    CHECK(kLog.beta(0.0) == 0.0);
    CHECK(kLog.beta(0.5) == doctest::Approx(0.5493061443340548).epsilon(1e-15));
    CHECK(kLog.beta(-0.5) == -kLog.beta(0.5)); // exactly odd
    CHECK(kLog.beta(0.6) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK_THROWS_AS(kLog.beta(1.0), DomainError);
    CHECK_THROWS_AS(kLog.beta(-1.0), DomainError);
    CHECK_THROWS_AS(kLog.beta(1.5), DomainError);
}

TEST_CASE("beta is strictly increasing") {
    SplitMix64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        double a = rng.uniform(-0.999999, 0.999999);
        double b = rng.uniform(-0.999999, 0.999999);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(kLog.beta(a) < kLog.beta(b));
    }
}

TEST_CASE("F and its derivatives") {
    CHECK(kLog.F(0.0) == 0.0);
    CHECK(kLog.F(1.0) == doctest::Approx(-0.3068528194400547).epsilon(1e-14));
    CHECK(kLog.F(-1.0) == doctest::Approx(-0.3068528194400547).epsilon(1e-14));
    CHECK(kLog.F_second(0.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(kLog.F_prime(0.3) == doctest::Approx(-0.29048039579688828).epsilon(1e-14));
    CHECK_THROWS_AS(kLog.F(1.0000001), DomainError);
    CHECK_THROWS_AS(kLog.F_prime(1.0), DomainError);
    CHECK_THROWS_AS(kLog.F_second(-1.0), DomainError);
}

TEST_CASE("F' matches a centered difference of F") {
    const double eps = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const double r = -0.9 + 1.8 * (i + 0.5) / 100.0;
        const double fd = (kLog.F(r + eps) - kLog.F(r - eps)) / (2.0 * eps);
        CHECK(std::abs(kLog.F_prime(r) - fd) <= 10.0 * eps * eps);
    }
}

TEST_CASE("regularized beta") {
    CHECK(kLog.beta_reg(0.0, 1e-6) == 0.0);
    // inside the clip the extension coincides with beta
    CHECK(kLog.beta_reg(0.5, 0.4) == kLog.beta(0.5));
    // outside: linear continuation with slope beta'(1-clip)
    CHECK(kLog.beta_reg(2.0, 0.5) == doctest::Approx(2.5493061443340548).epsilon(1e-15));
    CHECK(kLog.beta_reg(-2.0, 0.5) == doctest::Approx(-2.5493061443340548).epsilon(1e-15));
    // C^1 junction
    const double rc = 0.6;
    CHECK(kLog.beta_reg(rc + 1e-9, 0.4) == doctest::Approx(kLog.beta(rc)).epsilon(1e-7));
    CHECK_THROWS_AS(kLog.beta_reg(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(kLog.beta_reg(0.0, 1.0), DomainError);
}

TEST_CASE("sharp constants") {
    SharpConstants c = sharp_constants(1.0 / 3.0);
    CHECK(c.c_beta == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.C_beta == doctest::Approx(3.0).epsilon(1e-15));
    c = sharp_constants(0.9);
    CHECK(c.c_beta == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(c.C_beta == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
    c = sharp_constants(0.5);
    CHECK(c.c_beta == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.C_beta == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(sharp_constants(0.0), DomainError);
    CHECK_THROWS_AS(sharp_constants(1.0), DomainError);
}

TEST_CASE("sharp inequality at sample points") {
    InequalityCheck c = check_sharp_inequality(kLog, 0.9, -0.9, 1.0 / 3.0);
    CHECK(c.holds);
    CHECK(c.lhs == doctest::Approx(0.073610974479161012).epsilon(1e-13));
    CHECK(c.rhs == doctest::Approx(6.6799128919924075).epsilon(1e-13));

    // r = r0: the pairing term vanishes and the bracket dominates
    c = check_sharp_inequality(kLog, -0.99, -0.99, 1.0 / 3.0);
    CHECK(c.holds);

    // r0 -> -1: lhs vanishes while the bracket diverges
    c = check_sharp_inequality(kLog, 0.0, -1.0 + 1e-12, 1.0 / 3.0);
    CHECK(c.holds);

    CHECK_THROWS_AS(check_sharp_inequality(kLog, 0.5, -0.5, 1.0 / 3.0), DomainError); // r0 too high
    CHECK_THROWS_AS(check_sharp_inequality(kLog, 1.0, -0.9, 1.0 / 3.0), DomainError);
}

TEST_CASE("sharp inequality universality over seeded samples") {
    for (double delta : {0.1, 1.0 / 3.0, 0.9}) {
        SplitMix64 rng(42);
        int violations = 0;
        for (int i = 0; i < 10000; ++i) {
            const double r = rng.uniform(-1.0 + 1e-15, 1.0);
            const double r0 = rng.uniform(-1.0 + 1e-15, -1.0 + delta);
            violations += !check_sharp_inequality(kLog, r, r0, delta).holds;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("four-case bound behind the sharp inequality") {
    // case boundaries: r_low = (r0-1)/2, r_up = -1 + (r0+1)/delta
    SplitMix64 rng(99);
    for (int i = 0; i < 20000; ++i) {
        const double delta = rng.uniform(0.05, 0.95);
        const double r0 = rng.uniform(-1.0 + 1e-12, -1.0 + delta);
        const double r = rng.uniform(-1.0 + 1e-15, 1.0);
        const double r_low = 0.5 * (r0 - 1.0);
        const double r_up = -1.0 + (r0 + 1.0) / delta;
        const double pair = kLog.beta(r) * (r - r0);
        const double half = 0.5 * (r0 + 1.0) * std::abs(kLog.beta(r));
        const double b_low = std::abs(kLog.beta(r_low));
        const double tol = 1e-12;
        if (r < r_low) {
            CHECK(pair >= half - tol);
        } else if (r <= r_up) {
            CHECK(pair >= half - (r0 + 1.0) / delta * b_low - tol);
        } else if (r <= 0.0) {
            CHECK(pair >= half - (r + 1.0) * b_low - tol);
        } else {
            CHECK(pair >= (1.0 - delta) / delta * (r0 + 1.0) * std::abs(kLog.beta(r)) - tol);
        }
    }
}

TEST_CASE("integral form of the sharp inequality on random fields") {
    Grid g{16, 16, 1.0, 1.0};
    SplitMix64 rng(2024);
    int checked = 0;
    while (checked < 100) {
        const double delta = (checked % 3 == 0) ? 0.1 : (checked % 3 == 1) ? 1.0 / 3.0 : 0.9;
        ScalarField phi(g);
        const double center = -1.0 + rng.uniform(1e-6, delta * 0.9);
        const double spread = rng.uniform(0.0, 1.0 + center);
        for (double& v : phi.values) {
            v = center + spread * rng.symmetric();
            v = std::clamp(v, -1.0 + 1e-14, 1.0 - 1e-14);
        }
        const double m = mean(phi);
        if (!(m > -1.0 && m < -1.0 + delta)) continue;
        ++checked;
        CHECK(check_sharp_inequality_integral(kLog, phi, delta).holds);
    }
}

TEST_CASE("beta is square integrable near the pure phase") {
    // midpoint quadrature of |beta|^2 over (-1,-1+rho), rho = 1/2, stabilizes
    auto quad = [&](int n) {
        double sum = 0.0;
        const double h = 0.5 / n;
        for (int i = 0; i < n; ++i) {
            const double r = -1.0 + (i + 0.5) * h;
            const double b = kLog.beta(r);
            sum += b * b * h;
        }
        return sum;
    };
    const double q1 = quad(2048), q2 = quad(4096), q3 = quad(8192);
    CHECK(std::isfinite(q3));
    CHECK(std::abs(q3 - q2) < std::abs(q2 - q1));
    CHECK(std::abs(q3 - q2) < 0.01 * q3);
}

TEST_CASE("classical inequality constants certify their grid") {
    const int grid_n = 10000;
    ClassicalConstants c = discover_classical_constants(kLog, -0.5, 0.5, grid_n);
    CHECK(c.c_star >= std::ldexp(1.0, -40));
    CHECK(c.c_star <= 1.0);
    // re-scan: the returned pair must hold on the whole grid
    int bad = 0;
    for (int i = 0; i < grid_n; ++i) {
        const double r = -1.0 + (i + 0.5) * (2.0 / grid_n);
        const double b = kLog.beta(r);
        for (int j = 0; j < grid_n; ++j) {
            const double r0 = -0.5 + j * (1.0 / (grid_n - 1));
            bad += !(c.c_star * std::abs(b) <= b * (r - r0) + c.C_star + 1e-12);
        }
    }
    CHECK(bad == 0);
    // constants certified on a refinement are still valid on the coarse grid
    ClassicalConstants fine = discover_classical_constants(kLog, -0.5, 0.5, 2 * grid_n);
    CHECK(fine.c_star <= c.c_star);
    CHECK(fine.C_star >= c.C_star);

    // r0 = 0: the sign structure beta(r)*r >= 0 keeps the defect below 1,
    // so the lattice maximum c_* = 1 certifies with C_* = 1
    ClassicalConstants at_zero = discover_classical_constants(kLog, 0.0, 0.0, 1000);
    CHECK(at_zero.c_star == 1.0);
    CHECK(at_zero.C_star == 1.0);

    // degenerate single-point grid: r = r0 = 0 makes both sides trivial
    ClassicalConstants d = discover_classical_constants(kLog, 0.0, 0.0, 1);
    CHECK(d.c_star == 1.0);

    CHECK_THROWS_AS(discover_classical_constants(kLog, 0.5, -0.5, 100), DomainError);
}

TEST_CASE("coercivity margin") {
    CHECK(coercivity_margin(kLog, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(coercivity_margin(kLog, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    const SingularPotential tight = SingularPotential::flory_huggins(1.0, 1.0001);
    CHECK(coercivity_margin(tight, 0.0) == doctest::Approx(-0.0001).epsilon(1e-9));
}

TEST_CASE("custom potential routes through the callables") {
    // quartic stand-in: beta = r^3/(1-r^2) style singular part is overkill;
    // use a genuinely singular monotone choice
    CustomPotential funcs;
    funcs.beta = [](double r) { return std::tan(0.5 * std::numbers::pi * r); };
    funcs.beta_prime = [](double r) {
        const double c = std::cos(0.5 * std::numbers::pi * r);
        return 0.5 * std::numbers::pi / (c * c);
    };
    funcs.beta_hat = [](double r) {
        return -2.0 / std::numbers::pi * std::log(std::cos(0.5 * std::numbers::pi * r));
    };
    funcs.pi = [](double r) { return -2.0 * r; };
    funcs.pi_hat = [](double r) { return -r * r; };
    funcs.lipschitz_l0 = 2.0;
    const SingularPotential pot = SingularPotential::custom(funcs);
    CHECK(pot.beta(0.0) == 0.0);
    CHECK(pot.F_prime(0.25) == doctest::Approx(std::tan(std::numbers::pi / 8) - 0.5));
    CHECK_THROWS_AS(pot.F_second(0.0), DomainError); // no pi_prime supplied
    // the sharp inequality only needs the structural splitting, not the log form
    SplitMix64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double r = rng.uniform(-0.999999, 0.999999);
        const double r0 = rng.uniform(-0.999999, -1.0 + 1.0 / 3.0);
        CHECK(check_sharp_inequality(pot, r, r0, 1.0 / 3.0).holds);
    }
}
