#include "doctest.h"

#include "aniso/norms.hpp"

#include <cmath>

using namespace aniso;

namespace {

// Independent brute-force dual: dense sphere grid followed by a crude local
// ascent on <x,xi>/F(xi). Slow but free of the production solver's machinery.
Real dual_brute(const NormSpec& norm, const Vec& x, int grid = 40000) {
    Real best = -1e300;
    Vec best_xi;
    for (const Vec& xi : sphere_grid(norm.ambient_dim(), grid)) {
        const Real v = x.dot(xi) / norm.value(xi);
        if (v > best) {
            best = v;
            best_xi = xi;
        }
    }
    // Local refinement: shrinking random-axis polish around the best point.
    Vec xi = best_xi;
    Real step = 2.0 * M_PI / std::sqrt(static_cast<Real>(grid));
    for (int round = 0; round < 60; ++round) {
        bool improved = false;
        Mat t = tangent_basis(xi);
        for (int dir = 0; dir < t.cols(); ++dir) {
            for (Real s : {step, -step}) {
                Vec cand = (xi + s * t.col(dir)).normalized();
                const Real v = x.dot(cand) / norm.value(cand);
                if (v > best) {
                    best = v;
                    xi = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step < 1e-10) break;
    }
    return best;
}

}  // namespace

TEST_CASE("evaluate on the named families") {
    NormSpec iso = NormSpec::isotropic(3);
    CHECK(evaluate(iso, vec3(0, 0, 1)) == doctest::Approx(1.0).epsilon(1e-14));

    NormSpec sh = NormSpec::shifted(vec3(0.3, 0, 0));
    CHECK(evaluate(sh, vec3(1, 0, 0)) == doctest::Approx(0.7).epsilon(1e-14));

    Mat A = vec3(4, 1, 1).asDiagonal();
    NormSpec ell = NormSpec::ellipsoidal(A);
    CHECK(evaluate(ell, vec3(1, 0, 0)) == doctest::Approx(2.0).epsilon(1e-14));
    // oracle: sqrt(xi^T A xi) on a non-axis direction
    Vec xi = vec3(1, 2, -2).normalized();
    CHECK(evaluate(ell, xi) == doctest::Approx(std::sqrt(xi.dot(A * xi))).epsilon(1e-14));

    CHECK_THROWS_AS(evaluate(iso, vec3(1, 1, 0)), NonUnitInput);
}

TEST_CASE("malformed custom norm reports positivity violations") {
    CHECK_THROWS_AS(NormSpec::custom(3, [](const Vec& xi) { return xi(0); }),
                    PositivityViolation);
}

TEST_CASE("cahn-hoffman map on the named families") {
    NormSpec iso = NormSpec::isotropic(3);
    Vec xi = vec3(1, -2, 2).normalized();
    CHECK((cahn_hoffman(iso, xi) - xi).norm() < 1e-12);

    Vec k0 = vec3(0.3, -0.1, 0.2);
    NormSpec sh = NormSpec::shifted(k0);
    CHECK((cahn_hoffman(sh, xi) - (xi - k0)).norm() < 1e-12);

    Mat A = vec3(4, 1, 2).asDiagonal();
    NormSpec ell = NormSpec::ellipsoidal(A);
    Vec expected = A * xi / std::sqrt(xi.dot(A * xi));
    CHECK((cahn_hoffman(ell, xi) - expected).norm() < 1e-12);
}

TEST_CASE("closed-form gradients agree with finite differences at order >= 2") {
    Rng rng(21);
    for (NormSpec norm : {NormSpec::shifted(vec3(0.25, 0.1, -0.2)),
                          NormSpec::ellipsoidal(Mat(vec3(4, 1.5, 1).asDiagonal())),
                          NormSpec::superquadric_blend(3, 0.2)}) {
        Real max_err_h = 0.0, max_err_h2 = 0.0;
        for (int i = 0; i < 40; ++i) {
            Vec xi = rng.unit_vector(3);
            Vec g = norm.gradient(xi);
            NormSpec fd = norm;
            fd.set_derivative_mode({DerivativeMode::Kind::FiniteDifference, 1e-4, 0});
            max_err_h = std::max(max_err_h, (fd.gradient(xi) - g).cwiseAbs().maxCoeff());
            fd.set_derivative_mode({DerivativeMode::Kind::FiniteDifference, 5e-5, 0});
            max_err_h2 = std::max(max_err_h2, (fd.gradient(xi) - g).cwiseAbs().maxCoeff());
        }
        CHECK(max_err_h < 1e-7);
        // halving the step divides the error by ~4
        CHECK(max_err_h / max_err_h2 > 3.0);
        CHECK(max_err_h / max_err_h2 < 5.0);
    }
}

TEST_CASE("spherical hessian form") {
    NormSpec iso = NormSpec::isotropic(3);
    Vec xi = vec3(0.6, -0.64, 0.48).normalized();
    SphereHessianForm f = sphere_hessian_form(iso, xi);
    CHECK((f.form - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // A linear shift changes nothing: the spherical form of the shifted norm
    // is still the identity, confirmed against finite differences.
    NormSpec sh = NormSpec::shifted(vec3(0.3, 0.1, 0.0));
    SphereHessianForm fs = sphere_hessian_form(sh, xi);
    CHECK((fs.form - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    NormSpec sh_fd = sh;
    sh_fd.set_derivative_mode({DerivativeMode::Kind::FiniteDifference, 1e-4, 1});
    SphereHessianForm fs_fd = sphere_hessian_form(sh_fd, xi);
    CHECK((fs_fd.form - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);

    // Superquadric blend: strictly positive definite across a dense sweep.
    NormSpec blend = NormSpec::superquadric_blend(3, 0.2);
    Real min_eig = 1e300;
    for (const Vec& p : sphere_grid(3, 3000))
        min_eig = std::min(min_eig, sphere_hessian_form(blend, p).min_eigenvalue);
    CHECK(min_eig > 1e-3);
    // the isotropic part alone guarantees 1 - eps
    CHECK(min_eig > 1.0 - 0.2 - 1e-9);
}

TEST_CASE("dual norm closed forms") {
    NormSpec iso = NormSpec::isotropic(3);
    DualNorm iso_dual(iso);
    CHECK(iso_dual(vec3(0, 2, 0)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(iso_dual(vec3(0, 0, 0)), ZeroVector);

    Mat A = vec3(4, 1, 1).asDiagonal();
    NormSpec ell = NormSpec::ellipsoidal(A);
    DualNorm ell_dual(ell);
    Rng rng(5);
    Mat Ainv = A.inverse();
    for (int i = 0; i < 20; ++i) {
        Vec x = rng.gaussian_vector(3);
        if (x.norm() < 1e-6) continue;
        CHECK(ell_dual(x) == doctest::Approx(std::sqrt(x.dot(Ainv * x))).epsilon(1e-12));
    }
    // and against the independent brute-force maximizer
    Vec x = vec3(0.8, -1.1, 0.4);
    CHECK(ell_dual(x) == doctest::Approx(dual_brute(ell, x)).epsilon(1e-7));
}

TEST_CASE("shifted dual via the translated gauge") {
    NormSpec sh = NormSpec::shifted(vec3(0.3, 0, 0));
    DualNorm dual(sh);
    // one-dimensional sup over the sphere, by brute force grid + refinement
    CHECK(dual(vec3(1, 0, 0)) == doctest::Approx(1.0 / 0.7).epsilon(1e-10));
    CHECK(dual(vec3(1, 0, 0)) == doctest::Approx(dual_brute(sh, vec3(1, 0, 0))).epsilon(1e-7));
    Vec q = vec3(-0.3, 0.8, 0.1);
    CHECK(dual(q) == doctest::Approx(dual_brute(sh, q)).epsilon(1e-7));
}

TEST_CASE("numerical dual matches brute force on the blend family") {
    NormSpec blend = NormSpec::superquadric_blend(3, 0.2);
    DualNorm dual(blend);
    CHECK(dual.mode() == DualNorm::Mode::NumericalSup);
    Rng rng(17);
    for (int i = 0; i < 6; ++i) {
        Vec x = rng.gaussian_vector(3);
        if (x.norm() < 1e-6) continue;
        CHECK(dual(x) == doctest::Approx(dual_brute(blend, x)).epsilon(1e-7));
    }
}

TEST_CASE("duality identity suites per family") {
    Report iso = verify_duality(NormSpec::isotropic(3), 1000, 11);
    for (const auto& c : iso.checks) CHECK(c.residual_abs < 1e-10);
    CHECK(iso.ok());

    Report ell =
        verify_duality(NormSpec::ellipsoidal(Mat(vec3(4, 1, 1).asDiagonal())), 1000, 12);
    CHECK(ell.ok());
    for (const auto& c : ell.checks) CHECK(c.residual_abs < 1e-8);

    Report blend = verify_duality(NormSpec::superquadric_blend(3, 0.2), 300, 13);
    CHECK(blend.ok());
    for (const auto& c : blend.checks) CHECK(c.residual_abs < 1e-6);

    Report planar = verify_duality(NormSpec::shifted(vec2(0.2, -0.3)), 500, 14);
    CHECK(planar.ok());
}

TEST_CASE("shift_norm composes and preserves the spherical hessian") {
    Mat A = vec3(4, 1, 1).asDiagonal();
    NormSpec ell = NormSpec::ellipsoidal(A);
    DualNorm dual(ell);

    // pick k with dual norm exactly 0.5
    Vec dir = vec3(1.0, 0.5, -0.2);
    Vec k = 0.5 * dir / dual(dir);
    CHECK(dual(k) == doctest::Approx(0.5).epsilon(1e-12));

    NormSpec barred = shift_norm(ell, k);
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        Vec xi = rng.unit_vector(3);
        CHECK((cahn_hoffman(barred, xi) - (cahn_hoffman(ell, xi) - k)).norm() < 1e-12);
        Mat da = sphere_hessian_form(barred, xi).form - sphere_hessian_form(ell, xi).form;
        CHECK(da.cwiseAbs().maxCoeff() < 1e-9);
    }

    // zero shift is the identity
    NormSpec same = shift_norm(ell, vec3(0, 0, 0));
    Vec xi = rng.unit_vector(3);
    CHECK(same.value(xi) == doctest::Approx(ell.value(xi)).epsilon(1e-15));

    // inadmissible shifts are rejected
    Vec big = 2.2 * dir / dual(dir);
    CHECK_THROWS_AS(shift_norm(ell, big), NotAdmissibleShift);

    // shifting the isotropic norm gives the shifted family
    NormSpec sh = shift_norm(NormSpec::isotropic(3), vec3(0.3, 0, 0));
    CHECK(sh.family() == NormFamily::Shifted);
    CHECK(sh.value(vec3(1, 0, 0)) == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("custom norms run entirely on finite differences") {
    // a mild ellipsoidal profile fed in as a black-box sphere function
    Mat A = vec3(2.0, 1.0, 1.3).asDiagonal();
    NormSpec custom = NormSpec::custom(3, [A](const Vec& xi) {
        return std::sqrt(xi.dot(A * xi));
    });
    NormSpec exact = NormSpec::ellipsoidal(A);
    Rng rng(41);
    for (int i = 0; i < 10; ++i) {
        Vec xi = rng.unit_vector(3);
        CHECK((custom.gradient(xi) - exact.gradient(xi)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((custom.hessian(xi) - exact.hessian(xi)).cwiseAbs().maxCoeff() < 1e-6);
    }
}
