#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "chsep/field_ops.hpp"
#include "chsep/rng.hpp"

using namespace chsep;

namespace {

constexpr double kPi = std::numbers::pi;
const Grid kTorus{64, 64, 2.0 * kPi, 2.0 * kPi};

ScalarField sample(const Grid& g, double (*f)(double, double)) {
    ScalarField v(g);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) v.at(i, j) = f(i * g.dx(), j * g.dy());
    return v;
}

/// random band-limited field: modes |kx|,|ky| <= 4 with seeded amplitudes
ScalarField random_band_limited(const Grid& g, SplitMix64& rng, bool zero_mean) {
    ScalarField v(g, zero_mean ? 0.0 : rng.symmetric());
    for (int kx = 0; kx <= 4; ++kx) {
        for (int ky = -4; ky <= 4; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            const double a = rng.symmetric(), b = rng.symmetric();
            for (int i = 0; i < g.nx; ++i) {
                for (int j = 0; j < g.ny; ++j) {
                    const double phase = 2.0 * kPi * (kx * i / double(g.nx) + ky * j / double(g.ny));
                    v.at(i, j) += a * std::cos(phase) + b * std::sin(phase);
                }
            }
        }
    }
    return v;
}

} // namespace

TEST_CASE("mean") {
    CHECK(mean(ScalarField::constant(kTorus, 0.37)) == doctest::Approx(0.37).epsilon(1e-16));
    const ScalarField c = sample(kTorus, [](double x, double) { return std::cos(x); });
    CHECK(std::abs(mean(c)) < 1e-14);
    ScalarField half(kTorus);
    for (int i = 0; i < kTorus.nx; ++i)
        for (int j = 0; j < kTorus.ny; ++j) half.at(i, j) = (i < kTorus.nx / 2) ? 1.0 : 0.0;
    CHECK(mean(half) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("laplacian on eigenfunctions") {
    SpectralOps ops(kTorus);
    const ScalarField c = sample(kTorus, [](double x, double) { return std::cos(x); });
    const ScalarField lap = ops.laplacian(c);
    for (std::size_t i = 0; i < c.values.size(); ++i)
        CHECK(lap.values[i] == doctest::Approx(-c.values[i]).epsilon(1e-10));
    const ScalarField flat = ops.laplacian(ScalarField::constant(kTorus, 3.0));
    CHECK(max_abs(flat) < 1e-12);
}

TEST_CASE("inverse Laplacian") {
    SpectralOps ops(kTorus);
    const ScalarField c = sample(kTorus, [](double x, double) { return std::cos(x); });
    const ScalarField inv = ops.inv_laplacian_zero_mean(c);
    for (std::size_t i = 0; i < c.values.size(); ++i)
        CHECK(inv.values[i] == doctest::Approx(c.values[i]).epsilon(1e-10));
    CHECK_THROWS_AS(ops.inv_laplacian_zero_mean(ScalarField::constant(kTorus, 1.0)), MeanNotZero);

    // Lap(N v) = v on zero-mean band-limited fields
    SplitMix64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const ScalarField v = random_band_limited(kTorus, rng, true);
        const ScalarField back = ops.laplacian(ops.inv_laplacian_zero_mean(v));
        double worst = 0.0;
        for (std::size_t i = 0; i < v.values.size(); ++i)
            worst = std::max(worst, std::abs(back.values[i] + v.values[i]));
        CHECK(worst <= 1e-12 * std::max(1.0, max_abs(v)));
    }
}

TEST_CASE("star and H^-1 norms on single modes") {
    SpectralOps ops(kTorus);
    const ScalarField c1 = sample(kTorus, [](double x, double) { return std::cos(x); });
    CHECK(ops.star_norm(c1) == doctest::Approx(4.442882938158366).epsilon(1e-12));
    const ScalarField c2 = sample(kTorus, [](double x, double) { return std::cos(2.0 * x); });
    CHECK(ops.star_norm(c2) == doctest::Approx(4.442882938158366 / 2.0).epsilon(1e-12));
    CHECK(ops.hminus1_norm(ScalarField::constant(kTorus, -0.25)) ==
          doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(ops.star_norm(ScalarField::constant(kTorus, 1.0)), MeanNotZero);
}

TEST_CASE("Parseval and duality") {
    SpectralOps ops(kTorus);
    SplitMix64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const ScalarField v = random_band_limited(kTorus, rng, trial % 2 == 0);
        const double phys = ops.l2_norm(v);
        const double spec = ops.spectral_l2_norm(v);
        CHECK(spec == doctest::Approx(phys).epsilon(1e-12));
    }
    for (int trial = 0; trial < 10; ++trial) {
        const ScalarField v = random_band_limited(kTorus, rng, true);
        const ScalarField nv = ops.inv_laplacian_zero_mean(v);
        double inner = 0.0;
        for (std::size_t i = 0; i < v.values.size(); ++i) inner += v.values[i] * nv.values[i];
        inner *= kTorus.cell_area();
        const double star = ops.star_norm(v);
        CHECK(inner == doctest::Approx(star * star).epsilon(1e-12));
    }
}

TEST_CASE("Poincare-Wirtinger and interpolation inequalities") {
    SpectralOps ops(kTorus);
    SplitMix64 rng(31);
    const double c_omega = std::max(kTorus.lx, kTorus.ly) / (2.0 * kPi);
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField v = random_band_limited(kTorus, rng, false);
        const double m = mean(v);
        ScalarField centered = v;
        for (double& x : centered.values) x -= m;
        CHECK(ops.l2_norm(centered) <= c_omega * ops.grad_l2_norm(v) + 1e-10);
        CHECK(ops.l2_norm(centered) <=
              std::sqrt(ops.h1_norm(centered) * ops.star_norm(centered)) + 1e-10);
    }
}

TEST_CASE("convolution") {
    SpectralOps ops(kTorus);
    // discrete delta of mass 1: identity element
    ScalarField delta(kTorus);
    delta.at(0, 0) = 1.0 / kTorus.cell_area();
    const KernelSpec id_kernel = make_kernel(kTorus, delta);
    SplitMix64 rng(41);
    const ScalarField v = random_band_limited(kTorus, rng, false);
    const ScalarField conv = ops.convolve(id_kernel, v);
    for (std::size_t i = 0; i < v.values.size(); ++i)
        CHECK(conv.values[i] == doctest::Approx(v.values[i]).epsilon(1e-12));

    // symmetric kernels are self-adjoint
    const KernelSpec gauss = make_gaussian_kernel(kTorus, 1.0, 0.4);
    const ScalarField u = random_band_limited(kTorus, rng, false);
    const ScalarField ku = ops.convolve(gauss, u);
    const ScalarField kv = ops.convolve(gauss, v);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        a += ku.values[i] * v.values[i];
        b += u.values[i] * kv.values[i];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-12));

    // K*1 is the constant a
    const ScalarField ones = ScalarField::constant(kTorus, 1.0);
    const ScalarField a_field = ops.convolve(gauss, ones);
    CHECK(min_value(a_field) == doctest::Approx(gauss.a_const).epsilon(1e-12));
    CHECK(max_value(a_field) == doctest::Approx(gauss.a_const).epsilon(1e-12));

    const Grid other{32, 32, 1.0, 1.0};
    CHECK_THROWS_AS(ops.convolve(gauss, ScalarField::constant(other, 1.0)), GridMismatch);
}

TEST_CASE("gaussian kernel constants") {
    const double sigma = 0.2, mass = 1.5;
    const KernelSpec k = make_gaussian_kernel_with_mass(kTorus, mass, sigma);
    CHECK(k.a_const == doctest::Approx(mass).epsilon(1e-13));
    CHECK(k.a_star == doctest::Approx(mass).epsilon(1e-13));
    CHECK(k.a_upper == doctest::Approx(mass).epsilon(1e-13)); // K >= 0
    // closed form for int |grad K| of a mass-M Gaussian: M*sqrt(pi/2)/sigma
    CHECK(k.b_upper == doctest::Approx(9.39985602986625).epsilon(0.01));

    CHECK_THROWS_AS(make_gaussian_kernel(kTorus, 1.0, 0.1), ResolutionError);

    const KernelSpec zero = make_gaussian_kernel(kTorus, 0.0, 0.5);
    CHECK(zero.a_star == 0.0);
    SpectralOps ops(kTorus);
    CHECK(max_abs(ops.convolve(zero, ScalarField::constant(kTorus, 1.0))) < 1e-14);
}

TEST_CASE("snapshot errors") {
    CHECK_THROWS_AS(read_snapshot("does_not_exist.txt"), Error);
    {
        std::ofstream out("truncated_test.txt");
        out << "4 4 1.0 1.0 0.0\n1 2 3\n"; // too few values
    }
    CHECK_THROWS_AS(read_snapshot("truncated_test.txt"), Error);
    std::filesystem::remove("truncated_test.txt");
}

TEST_CASE("snapshot round trip") {
    SplitMix64 rng(51);
    const Grid g{12, 8, 1.5, 2.5};
    ScalarField v(g);
    for (double& x : v.values) x = rng.symmetric() * 1e3;
    const std::string path = "snapshot_test.txt";
    write_snapshot(path, v, 0.125);
    auto [back, t] = read_snapshot(path);
    CHECK(t == 0.125);
    CHECK(back.grid == g);
    for (std::size_t i = 0; i < v.values.size(); ++i) CHECK(back.values[i] == v.values[i]);
    std::filesystem::remove(path);
}
