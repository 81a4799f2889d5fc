#include "doctest.h"

#include "aniso/oracle.hpp"
#include "aniso/scenario.hpp"

#include <cmath>

using namespace aniso;

TEST_CASE("oracle quarter circle: identities to adaptive-quadrature accuracy") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    CurveScenario cs = oracle_circle_sector(w, NormSpec::isotropic(2), vec2(0, 0), 1.0);

    OracleIdentity mink = curve_minkowski(cs);
    CHECK(mink.lhs == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
    CHECK(mink.residual() < 1e-11);

    OracleHk hk = curve_hk(cs);
    CHECK(hk.lhs == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
    CHECK(hk.area == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
    CHECK(std::abs(hk.gap()) < 1e-11);
}

TEST_CASE("oracle capillary circle: translated center carries the contact data") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    Vec k = vec2(-0.3, -0.4);
    CurveScenario cs = oracle_circle_sector(w, NormSpec::isotropic(2), Vec(-k), 1.0);
    cs.k = k;
    OracleIdentity mink = curve_minkowski(cs);
    CHECK(mink.residual() < 1e-11);
    OracleHk hk = curve_hk(cs);
    CHECK(std::abs(hk.gap()) < 1e-11);
}

TEST_CASE("oracle ellipse arc: wulff equality for the diagonal norm") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    Mat A = vec2(2.25, 1.0).asDiagonal();
    CurveScenario cs = oracle_ellipse_sector(w, A, vec2(0, 0), 1.0);

    // the anisotropic curvature of the generating level set is 1/r
    for (Real th : {cs.theta0 + 0.3, 0.5 * (cs.theta0 + cs.theta1), cs.theta1 - 0.2})
        CHECK(cs.aniso_form(th) * cs.curvature(th) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(curve_minkowski(cs).residual() < 1e-10);
    CHECK(std::abs(curve_hk(cs).gap()) < 1e-10);
}

TEST_CASE("oracle polar arc: strict inequality for a non-wulff curve") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    CurveScenario cs = oracle_polar_sector(w, 1.0, 0.15, 2);
    CHECK(curve_minkowski(cs).residual() < 1e-10);
    OracleHk hk = curve_hk(cs);
    CHECK(hk.gap() > 1e-3 * hk.rhs);
}

TEST_CASE("monte carlo volumes: quarter disk, ellipsoid, empty region") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    CurveScenario cs = oracle_circle_sector(w, NormSpec::isotropic(2), vec2(0, 0), 1.0);
    McResult mc = mc_volume(cs.membership, cs.box_lo, cs.box_hi, 400000, 7);
    CHECK(std::abs(mc.estimate - M_PI / 4.0) < 3.0 * mc.stderr_value);

    // 3-d ellipsoid against the closed form 4/3 pi abc
    auto ball = [](const Vec& x) {
        return x(0) * x(0) / 4.0 + x(1) * x(1) + x(2) * x(2) / 2.25 < 1.0;
    };
    McResult mc3 =
        mc_volume(ball, vec3(-2, -1, -1.5), vec3(2, 1, 1.5), 400000, 11);
    const Real exact = 4.0 * M_PI / 3.0 * 2.0 * 1.0 * 1.5;
    CHECK(std::abs(mc3.estimate - exact) < 3.0 * mc3.stderr_value);

    auto nothing = [](const Vec&) { return false; };
    McResult empty = mc_volume(nothing, vec2(0, 0), vec2(1, 1), 10000, 3);
    CHECK(empty.estimate == 0.0);
}

TEST_CASE("oracle and main path agree on shared curve fixtures") {
    for (const std::string name : {"arc_free", "arc_capillary", "arc_ellipse_free",
                                   "arc_shifted_free", "dumbbell_arc"}) {
        ScenarioSpec spec = make_fixture(name);
        spec.scenario.levels = 3;
        std::optional<CurveScenario> cs = oracle_analogue(spec);
        REQUIRE(cs.has_value());

        Report mink = minkowski_residual(spec.scenario, 1);
        OracleIdentity om = curve_minkowski(*cs);
        CHECK(std::abs(mink.checks[0].lhs - om.lhs) < 1e-9);
        CHECK(std::abs(mink.checks[0].rhs - om.rhs) < 1e-9);

        OracleHk ohk = curve_hk(*cs);
        const Real vol = enclosed_volume(spec.scenario.patch, spec.scenario.wedge, 2);
        CHECK(std::abs(2.0 * vol - ohk.rhs) < 1e-9);
    }
}

TEST_CASE("oracle suite report on the quarter circle") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    CurveScenario cs = oracle_circle_sector(w, NormSpec::isotropic(2), vec2(0, 0), 1.0);
    Report rep = oracle_suite(cs, 300000, 2222);
    CHECK(rep.ok());
}

TEST_CASE("half-disk limit: oracle area matches the closed form") {
    const Real delta = 1e-4;
    Wedge w(vec2(std::sin(delta), -std::cos(delta)), vec2(-std::sin(delta), -std::cos(delta)));
    CurveScenario cs = oracle_circle_sector(w, NormSpec::isotropic(2), vec2(0, 0), 1.0);
    CHECK(curve_enclosed_area(cs) == doctest::Approx(0.5 * (M_PI - 2.0 * delta)).epsilon(1e-10));
}
