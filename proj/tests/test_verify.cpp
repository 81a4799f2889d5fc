#include "doctest.h"

#include "aniso/scenario.hpp"
#include "aniso/verify.hpp"

#include <cmath>

using namespace aniso;

namespace {

VerificationScenario quarter_sphere_scenario() {
    VerificationScenario s;
    s.name = "qs";
    s.norm = NormSpec::isotropic(3);
    s.wedge = Wedge(vec3(1, 0, 0), vec3(0, 1, 0));
    s.patch = wulff_patch(s.norm, s.wedge, vec3(0, 0, 0), 1.0, {5, {2, 2}});
    s.is_wulff = true;
    return s;
}

}  // namespace

TEST_CASE("energy: area plus wetting terms") {
    VerificationScenario s = quarter_sphere_scenario();
    CHECK(energy(s, 3) == doctest::Approx(M_PI).epsilon(1e-11));

    // same surface weighed with nonzero wetting coefficients
    s.omega0 = {-0.5, -0.5};
    CHECK(energy(s, 3) == doctest::Approx(M_PI - M_PI / 2.0).epsilon(1e-11));

    // anisotropic area scales like r^n
    VerificationScenario s2 = quarter_sphere_scenario();
    s2.patch = wulff_patch(s2.norm, s2.wedge, vec3(0, 0, 0), 2.0, {5, {2, 2}});
    CHECK(energy(s2, 3) == doctest::Approx(4.0 * M_PI).epsilon(1e-11));
}

TEST_CASE("first variation matches the mean-curvature pairing") {
    VerificationScenario s = quarter_sphere_scenario();
    Report rep = first_variation_check(s, separable_sin2_bump(2, 0.0));
    REQUIRE(rep.checks.size() == 1);
    CHECK(rep.checks[0].verdict == Verdict::Pass);
    CHECK(rep.checks[0].residual_rel < 1e-5);

    // zero variation field gives zero slope
    BumpSpec zero;
    zero.value = [](const Vec&) { return 0.0; };
    Report rep0 = first_variation_check(s, zero);
    CHECK(std::abs(rep0.checks[0].lhs) < 1e-12);
    CHECK(std::abs(rep0.checks[0].rhs) < 1e-12);
}

TEST_CASE("minkowski identity values on the quarter sphere") {
    VerificationScenario s = quarter_sphere_scenario();
    Report r1 = minkowski_residual(s, 1);
    CHECK(r1.checks[0].verdict == Verdict::Pass);
    CHECK(r1.checks[0].lhs == doctest::Approx(M_PI).epsilon(1e-9));
    CHECK(r1.checks[0].rhs == doctest::Approx(M_PI).epsilon(1e-9));

    Report r2 = minkowski_residual(s, 2);
    CHECK(r2.checks[0].verdict == Verdict::Pass);
    CHECK(r2.checks[0].residual_rel < 1e-8);

    CHECK_THROWS_AS(minkowski_residual(s, 3), ConfigError);
}

TEST_CASE("flux vanishes under the capillary condition and detects its failure") {
    VerificationScenario s = quarter_sphere_scenario();
    Report rep = flux_vanishing_check(s);
    for (const auto& c : rep.checks) {
        CHECK(c.verdict == Verdict::Pass);
        CHECK(c.lhs < 1e-9);
    }

    // tilting the boundary normals produces a detectable flux
    ScenarioSpec bad = make_fixture("noncapillary_edge_bump");
    Report rep_bad = flux_vanishing_check(bad.scenario);
    Real worst = 0.0;
    for (const auto& c : rep_bad.checks) worst = std::max(worst, c.lhs);
    CHECK(worst > 1e-3);

    // and the minkowski precondition reports Inconclusive (residual on record)
    Report mink = minkowski_residual(bad.scenario, 1);
    CHECK(mink.checks[0].verdict == Verdict::Inconclusive);
    CHECK(!mink.checks[0].note.empty());
}

TEST_CASE("hk equality on the quarter ball") {
    VerificationScenario s = quarter_sphere_scenario();
    Report rep = hk_check(s);
    const CheckRecord* eq = nullptr;
    for (const auto& c : rep.checks)
        if (c.name == "hk_equality") eq = &c;
    REQUIRE(eq != nullptr);
    CHECK(eq->verdict == Verdict::Pass);
    CHECK(eq->lhs == doctest::Approx(M_PI).epsilon(1e-8));
    CHECK(eq->rhs == doctest::Approx(M_PI).epsilon(1e-8));
    CHECK(rep.ok());
}

TEST_CASE("hk rejects hypothesis violations with typed errors") {
    // strongly perturbed: loses mean convexity
    VerificationScenario s = quarter_sphere_scenario();
    s.patch = perturb(s.patch, separable_sin2_bump(2, 0.0), 0.12);
    s.is_wulff = false;
    CHECK_THROWS_AS(hk_check(s), NotMeanConvex);

    // edge-tilted: contact angle exceeds omega0 somewhere
    ScenarioSpec bad = make_fixture("noncapillary_edge_bump");
    CHECK_THROWS_AS(hk_check(bad.scenario), CapillarySignViolation);
}

TEST_CASE("hk strict gap on a perturbed fixture") {
    ScenarioSpec spec = make_fixture("perturbed_quarter_sphere");
    spec.scenario.levels = 2;
    Report rep = hk_check(spec.scenario);
    const CheckRecord* strict = nullptr;
    for (const auto& c : rep.checks)
        if (c.name == "hk_strict_gap") strict = &c;
    REQUIRE(strict != nullptr);
    CHECK(strict->verdict == Verdict::Pass);
    CHECK(strict->residual_rel > 1e-3);
    CHECK(rep.ok());
}

TEST_CASE("free-boundary reduction agrees nodewise") {
    ScenarioSpec spec = make_fixture("sphere_cap_capillary");
    spec.scenario.levels = 2;
    Report rep = fbar_reduction_check(spec.scenario);
    CHECK(rep.ok());
    CHECK(rep.checks[0].lhs < 1e-10);
}

TEST_CASE("monotonicity across the norm families") {
    for (NormSpec norm : {NormSpec::isotropic(3), NormSpec::shifted(vec3(0.2, -0.1, 0.15)),
                          NormSpec::ellipsoidal(Mat(vec3(4, 1, 1).asDiagonal())),
                          NormSpec::superquadric_blend(3, 0.2)}) {
        Report rep = monotonicity_check(norm, 60, 99);
        CHECK(rep.ok());
        CHECK(rep.checks[0].lhs == 0.0);  // no violations
        CHECK(rep.checks[1].lhs < 1e-6);  // derivative formula agreement
    }
}

TEST_CASE("coverage on the quarter ball") {
    VerificationScenario s = quarter_sphere_scenario();
    s.seed = 555;
    Report rep = coverage_check(s, 120);
    CHECK(rep.ok());
    CHECK(rep.checks[0].lhs == 1.0);
    CHECK(rep.checks[1].lhs == 0.0);
}

TEST_CASE("elliptic touching point on wulff and non-wulff fixtures") {
    VerificationScenario s = quarter_sphere_scenario();
    Report rep = elliptic_point_search(s);
    CHECK(rep.ok());
    // every point of the unit sphere about the corner is elliptic: kappa = 1/r0
    CHECK(rep.checks[0].lhs == doctest::Approx(rep.checks[0].rhs).epsilon(1e-7));

    ScenarioSpec dumbbell = make_fixture("dumbbell_arc");
    Report rep2 = elliptic_point_search(dumbbell.scenario);
    CHECK(rep2.ok());

    ScenarioSpec pert = make_fixture("perturbed_quarter_sphere");
    Report rep3 = elliptic_point_search(pert.scenario);
    CHECK(rep3.ok());
}

TEST_CASE("wulff fit recovers generated shapes and rejects perturbed ones") {
    Wedge w(vec3(1, 0, 0), vec3(0, 1, 0));
    NormSpec ell = NormSpec::ellipsoidal(Mat(vec3(4, 1, 1).asDiagonal()));
    Vec y = vec3(-0.25, -0.2, 0.1);
    Patch p = wulff_patch(ell, w, y, 1.3, {5, {3, 3}});
    WulffFitResult fit = fit_wulff_shape(ell, p, 1);
    CHECK(fit.rms < 1e-9);
    CHECK((fit.center - y).norm() < 1e-8);
    CHECK(fit.radius == doctest::Approx(1.3).epsilon(1e-8));

    Patch moved = perturb(p, separable_sin2_bump(2, 0.0), 0.05);
    WulffFitResult bad = fit_wulff_shape(ell, moved, 1);
    CHECK(bad.rms > 1e-3);
}

TEST_CASE("constant curvature chain accepts wulff and rejects perturbed") {
    ScenarioSpec spec = make_fixture("sphere_cap_capillary");
    spec.scenario.levels = 2;
    for (int r : {1, 2}) {
        Report rep = alexandrov_pipeline(spec.scenario, r);
        CHECK(rep.ok());
        for (const auto& c : rep.checks)
            if (c.name.rfind("chain_", 0) == 0) CHECK(c.residual_rel < 1e-7);
    }

    ScenarioSpec pert = make_fixture("perturbed_quarter_sphere");
    pert.scenario.levels = 2;
    CHECK_THROWS_AS(alexandrov_pipeline(pert.scenario, 1), NotConstantCurvature);
}

TEST_CASE("flow law suite on a capillary fixture") {
    ScenarioSpec spec = make_fixture("sphere_cap_capillary");
    spec.scenario.levels = 2;
    Report rep = flow_law_check(spec.scenario, {0.1, -0.3});
    CHECK(rep.ok());
    for (const auto& c : rep.checks)
        if (c.name.rfind("flow_curvature_law", 0) == 0) CHECK(c.lhs < 1e-6);
}

TEST_CASE("tolerance overrides are named") {
    Tolerances tol;
    tol.set("hk_eq_rel", 1e-5);
    CHECK(tol.get("hk_eq_rel") == 1e-5);
    CHECK_THROWS_AS(tol.set("nope", 1.0), ConfigError);
}
