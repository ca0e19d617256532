#include <doctest.h>

#include "sphw/errors.hpp"
#include "sphw/forces.hpp"

#include <cmath>
#include <random>

using namespace sphw;

TEST_CASE("pressure functions for gamma = 2 are constant") {
    const EosPolytropic eos{2.0, 1.0};
    for (double rho : {1e-6, 0.3, 1.0, 42.0}) {
        CHECK(f_theta(eos, 0, rho) == 2.0);
        CHECK(f_theta(eos, 1, rho) == 1.0);
    }
    // gamma >= 2 admits rho = 0
    CHECK(f_theta(eos, 1, 0.0) == 1.0);
}

TEST_CASE("pressure functions for gamma = 7 and gamma = 1") {
    CHECK(f_theta({7.0, 1.0}, 0, 1.0) == 7.0);
    CHECK(f_theta({7.0, 1.0}, 1, 1.0) == 1.0);
    CHECK(f_theta({7.0, 1.0}, 1, 0.5) == doctest::Approx(0.03125));
    CHECK(f_theta({1.0, 1.0}, 0, 0.5) == doctest::Approx(2.0));
    CHECK(f_theta({1.0, 1.0}, 1, 0.5) == doctest::Approx(2.0));
    CHECK(f_theta({3.0, 2.5}, 0, 2.0) == doctest::Approx(3.0 * 2.5 * 2.0));
}

TEST_CASE("F_0 equals (1/rho) d/drho (rho^2 F_1) by finite differences") {
    for (double gamma : {1.5, 2.0, 3.0, 7.0}) {
        const EosPolytropic eos{gamma, 1.7};
        for (double rho : {0.2, 0.9, 1.6}) {
            const double h = 1e-6;
            auto g = [&](double r) { return r * r * f_theta(eos, 1, r); };
            const double fd = (g(rho + h) - g(rho - h)) / (2.0 * h) / rho;
            CHECK(f_theta(eos, 0, rho) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("singular pressure function at zero density") {
    CHECK_THROWS_AS(f_theta({1.0, 1.0}, 0, 0.0), SingularityError);
    CHECK_THROWS_AS(f_theta({1.5, 1.0}, 1, 0.0), SingularityError);
    CHECK_THROWS_AS(f_theta({2.0, 1.0}, 2, 1.0), InvalidParameter);
}

TEST_CASE("symmetrized theta=1 bracket equals F_0 for gamma = 2") {
    const EosPolytropic eos{2.0, 3.5};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1e-3, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng);
        const double b = u(rng);
        REQUIRE(f_theta(eos, 1, a) + f_theta(eos, 1, b) == f_theta(eos, 0, a));
        REQUIRE(f_theta(eos, 0, a) == 2.0 * 3.5);
    }
}

TEST_CASE("EOS parameter validation") {
    CHECK_THROWS_AS((EosPolytropic{0.0, 1.0}.validate()), InvalidParameter);
    CHECK_THROWS_AS((EosPolytropic{2.0, -1.0}.validate()), InvalidParameter);
    CHECK_NOTHROW((EosPolytropic{7.0, 1.0}.validate()));
}

TEST_CASE("morse force vanishes at the origin and is odd") {
    const MorseInteraction m;
    CHECK(morse_force(m, {0.0, 0.0}) == Vec2{});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 x{u(rng), u(rng)};
        REQUIRE(morse_force(m, -x) == -morse_force(m, x));
    }
}

TEST_CASE("morse force magnitude at r = 3") {
    const MorseInteraction m; // C_a = 2, C_r = 1.5, l_a = 1, l_r = 2, r_cut = 0.1
    // |U'(3)|, evaluated with mpmath
    const double expected = 0.0677734833755944857;
    const Vec2 f = morse_force(m, {3.0, 0.0});
    CHECK(norm(f) == doctest::Approx(expected).epsilon(1e-14));
    // U'(3) < 0: the pair repels at this range, so the force points along +x.
    CHECK(f.x > 0.0);
    // U'(0.5) > 0: attraction at short range.
    CHECK(morse_force(m, {0.5, 0.0}).x < 0.0);
}

TEST_CASE("morse force is continuously differentiable across r_cut") {
    const MorseInteraction m;
    const double step = 1e-6;
    auto jac = [&](const Vec2& x) {
        // d K_x / d x along the radial direction
        return (morse_force(m, x + Vec2{step, 0.0}).x - morse_force(m, x - Vec2{step, 0.0}).x) / (2.0 * step);
    };
    const double below = jac({m.r_cut - 1e-5, 0.0});
    const double above = jac({m.r_cut + 1e-5, 0.0});
    CHECK(std::abs(below - above) <= 1e-4);
    // value continuity at the joint
    CHECK(norm(morse_force(m, {m.r_cut - 1e-12, 0.0}) - morse_force(m, {m.r_cut + 1e-12, 0.0})) < 1e-10);
    // smooth at the origin: Jacobian tends to zero
    CHECK(std::abs(jac({1e-5, 0.0})) < 1e-4);
}

TEST_CASE("morse force is globally bounded with sup away from the origin") {
    const MorseInteraction m;
    double best = 0.0;
    double where = 0.0;
    for (int i = 1; i <= 1000000; ++i) {
        const double r = 100.0 * i / 1000000.0;
        const double v = norm(morse_force(m, {r, 0.0}));
        if (v > best) {
            best = v;
            where = r;
        }
    }
    CHECK(std::isfinite(best));
    CHECK(where > 0.0);
    CHECK(m.force_sup() == doctest::Approx(best).epsilon(1e-6));
    CHECK(m.force_sup() >= best);
}

TEST_CASE("external acceleration") {
    ForceModel fm;
    fm.eta = DragField::uniform(10.0);
    CHECK(external_accel(fm, {0.0, 0.0}, {1.0, 0.0}) == Vec2{-10.0, 0.0});

    ForceModel harmonic;
    harmonic.v_ext = ExternalPotential::harmonic();
    CHECK(external_accel(harmonic, {1.0, 2.0}, {5.0, 5.0}) == Vec2{-1.0, -2.0});

    ForceModel weak;
    weak.eta = DragField::uniform(0.1);
    CHECK(external_accel(weak, {3.0, 4.0}, {0.0, 0.0}) == Vec2{});

    ForceModel field;
    field.eta = DragField::from_function([](const Vec2& y) { return y.x; }, 1.0);
    CHECK(external_accel(field, {0.5, 0.0}, {2.0, 0.0}) == Vec2{-1.0, 0.0});
}

TEST_CASE("force model validation") {
    ForceModel fm;
    fm.theta = 2;
    CHECK_THROWS_AS(fm.validate(), InvalidParameter);
    CHECK_THROWS_AS(DragField::uniform(-1.0), InvalidParameter);
    ForceModel bad_morse;
    bad_morse.interaction = MorseInteraction{2.0, 1.5, 1.0, 2.0, 0.0};
    CHECK_THROWS_AS(bad_morse.validate(), InvalidParameter);
}
