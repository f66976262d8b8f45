#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chsep/reaction.hpp"
#include "chsep/rng.hpp"

using namespace chsep;

namespace {
const Grid kGrid{16, 16, 1.0, 1.0};

ScalarField half_mask() {
    ScalarField m(kGrid);
    for (int i = 0; i < kGrid.nx / 2; ++i)
        for (int j = 0; j < kGrid.ny; ++j) m.at(i, j) = 1.0;
    return m;
}
} // namespace

TEST_CASE("oono constants") {
    const ReactionSpec s = ReactionSpec::oono(1.0, 0.3, kGrid);
    CHECK(s.h_bound() == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s.m_mean() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.c0() == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(s.compatibility_margin() == doctest::Approx(0.7).epsilon(1e-15));

    const ReactionSpec z = ReactionSpec::oono(2.0, 0.0, kGrid);
    CHECK(z.h_bound() == 0.0);
    CHECK(z.c0() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(ReactionSpec::oono(1.0, 1.0, kGrid), CompatibilityError);
    CHECK_THROWS_AS(ReactionSpec::oono(0.0, 0.5, kGrid), CompatibilityError);
}

TEST_CASE("inpainting constants") {
    const ReactionSpec s =
        ReactionSpec::inpainting(half_mask(), ScalarField::constant(kGrid, 0.4), 1.0);
    CHECK(s.m_mean() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.h_bound() == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(s.c0() == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(s.compatibility_margin() == doctest::Approx(0.1).epsilon(1e-13));

    const ReactionSpec z =
        ReactionSpec::inpainting(half_mask(), ScalarField::constant(kGrid, 0.0), 1.0);
    CHECK(z.h_bound() == 0.0);
    CHECK(z.c0() == doctest::Approx(0.5).epsilon(1e-15)); // |U|/|Omega|

    CHECK_THROWS_AS(
        ReactionSpec::inpainting(ScalarField::constant(kGrid, 1.0),
                                 ScalarField::constant(kGrid, 0.0), 1.0),
        CompatibilityError); // mask all ones
    CHECK_THROWS_AS(
        ReactionSpec::inpainting(half_mask(), ScalarField::constant(kGrid, 0.6), 1.0),
        CompatibilityError); // sup|c| >= |U|/|Omega|
    CHECK_THROWS_AS(
        ReactionSpec::inpainting(half_mask(), ScalarField::constant(kGrid, 1.5), 1.0),
        CompatibilityError); // image outside [-1,1]
}

TEST_CASE("tumor constants") {
    const ReactionSpec s = ReactionSpec::tumor(1.0, 0.2, kGrid);
    CHECK(s.h_bound() == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(s.c0() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK_THROWS_AS(ReactionSpec::tumor(0.5, 0.2, kGrid), CompatibilityError);
    CHECK_THROWS_AS(ReactionSpec::tumor(1.0, 1.5, kGrid), CompatibilityError);
}

TEST_CASE("source evaluation") {
    const ReactionSpec oono = ReactionSpec::oono(1.0, 0.0, kGrid);
    const ScalarField pure = ScalarField::constant(kGrid, -1.0);
    const ScalarField s = oono.eval(pure);
    CHECK(min_value(s) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(max_value(s) == doctest::Approx(1.0).epsilon(1e-15));

    // tumor at the pure healthy phase: the proliferation term is switched off
    const ReactionSpec tum = ReactionSpec::tumor(2.0, 0.0, kGrid);
    const ScalarField n = ScalarField::constant(kGrid, 1.0);
    const ScalarField st = tum.eval(pure, &n);
    CHECK(min_value(st) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(tum.eval(pure), DomainError); // nutrient missing

    // inpainting fixed point: phi = c on U gives S = 0 everywhere
    ScalarField image(kGrid);
    for (int i = 0; i < kGrid.nx; ++i)
        for (int j = 0; j < kGrid.ny; ++j) image.at(i, j) = 0.3 * std::sin(j * 0.5);
    for (double& v : image.values) v = std::clamp(v, -0.45, 0.45);
    const ReactionSpec inp = ReactionSpec::inpainting(half_mask(), image, 1.0);
    const ScalarField si = inp.eval(image);
    CHECK(max_abs(si) < 1e-15);

    ScalarField bad = pure;
    bad.values[0] = -1.1;
    CHECK_THROWS_AS(oono.eval(bad), DomainError);
}

TEST_CASE("source is bounded by m_sup + h_bound") {
    SplitMix64 rng(8);
    const ReactionSpec specs[] = {
        ReactionSpec::oono(1.7, -0.4, kGrid),
        ReactionSpec::inpainting(half_mask(), ScalarField::constant(kGrid, 0.3), 2.5),
        ReactionSpec::tumor(1.3, 0.4, kGrid),
    };
    for (const ReactionSpec& spec : specs) {
        for (int trial = 0; trial < 20; ++trial) {
            ScalarField phi(kGrid);
            for (double& v : phi.values) v = rng.symmetric();
            ScalarField n(kGrid);
            for (double& v : n.values) v = rng.next_double();
            const ScalarField s = spec.eval(phi, &n);
            CHECK(max_abs(s) <= spec.m_sup() + spec.h_bound() + 1e-12);
        }
    }
}

TEST_CASE("pure phase detaches: source mean at phi = -1") {
    const ReactionSpec specs[] = {
        ReactionSpec::oono(1.0, 0.3, kGrid),
        ReactionSpec::inpainting(half_mask(), ScalarField::constant(kGrid, 0.4), 1.0),
    };
    const ScalarField pure = ScalarField::constant(kGrid, -1.0);
    for (const ReactionSpec& spec : specs) {
        const ScalarField s = spec.eval(pure);
        CHECK(mean(s) >= spec.compatibility_margin() - 1e-12);
    }
}

TEST_CASE("custom reaction") {
    auto h = [](double phi, double) { return 0.25 * std::sin(phi); };
    const ReactionSpec s =
        ReactionSpec::custom(ScalarField::constant(kGrid, 1.0), h, 0.25, 0.25);
    CHECK(s.c0() == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(s.lipschitz().value() == 0.25);
    const ScalarField phi = ScalarField::constant(kGrid, 0.5);
    const ScalarField out = s.eval(phi);
    CHECK(out.values[0] == doctest::Approx(-0.5 + 0.25 * std::sin(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(ReactionSpec::custom(ScalarField::constant(kGrid, 1.0), h, 1.5, {}),
                    CompatibilityError);
}

TEST_CASE("truncation profile") {
    CHECK(truncation_h(-1.0) == 0.0);
    CHECK(truncation_h(1.0) == 1.0);
    CHECK(truncation_h(0.0) == 0.5);
    CHECK(truncation_h(-3.0) == 0.0);
    CHECK(truncation_h(3.0) == 1.0);
}
