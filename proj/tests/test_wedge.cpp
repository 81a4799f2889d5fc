#include "doctest.h"

#include "aniso/wedge.hpp"

#include <cmath>

using namespace aniso;

namespace {

Wedge right_angle_wedge() { return Wedge(vec3(1, 0, 0), vec3(0, 1, 0)); }

}  // namespace

TEST_CASE("wedge construction rejects bad normals") {
    CHECK_THROWS_AS(Wedge(vec3(1, 0, 0), vec3(2, 0, 0)), NonUnitInput);
    CHECK_THROWS_AS(Wedge(vec3(1, 0, 0), vec3(1, 0, 0)), ConfigError);
    CHECK_THROWS_AS(Wedge(vec3(1, 0, 0), vec3(-1, 0, 0)), ConfigError);
}

TEST_CASE("point classification") {
    Wedge w = right_angle_wedge();
    CHECK(classify_point(w, vec3(-1, -1, 0)) == Stratum::Interior);
    CHECK(classify_point(w, vec3(0, -1, 0)) == Stratum::P1);
    CHECK(classify_point(w, vec3(-1, 0, 2)) == Stratum::P2);
    CHECK(classify_point(w, vec3(0, 0, 5)) == Stratum::L);
    CHECK(classify_point(w, vec3(1, -1, 0)) == Stratum::Outside);
    CHECK(classify_point(w, vec3(0, 1, 0)) == Stratum::Outside);
}

TEST_CASE("face frame on P1") {
    Wedge w = right_angle_wedge();
    BoundaryFrame f = boundary_frame(w, vec3(0, 0, 1), Stratum::P1);
    REQUIRE(f.mu[0].has_value());
    REQUIRE(f.m[0].has_value());
    CHECK((*f.mu[0] - vec3(1, 0, 0)).norm() < 1e-12);
    CHECK((*f.m[0] - vec3(0, 0, -1)).norm() < 1e-12);
}

TEST_CASE("tangency is a typed error") {
    Wedge w = right_angle_wedge();
    CHECK_THROWS_AS(boundary_frame(w, vec3(1, 0, 0), Stratum::P1), TangencyError);
    // nu in span{n1,n2} on L: the sign condition for l degenerates
    Vec nu = vec3(-std::sqrt(0.5), -std::sqrt(0.5), 0.0);
    CHECK_THROWS_AS(boundary_frame(w, nu, Stratum::L), TangencyError);
}

TEST_CASE("corner frame at the top of a quarter sphere") {
    Wedge w = right_angle_wedge();
    BoundaryFrame f = boundary_frame(w, vec3(0, 0, 1), Stratum::L);
    REQUIRE(f.l.has_value());
    CHECK((*f.l - vec3(0, 0, -1)).norm() < 1e-12);
    REQUIRE(f.tau[0].has_value());
    REQUIRE(f.tau[1].has_value());
    CHECK((*f.tau[0] - vec3(0, 1, 0)).norm() < 1e-12);
    CHECK((*f.tau[1] - vec3(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("frame sign and orthogonality conditions hold for random data") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        Vec n1 = rng.unit_vector(3);
        Vec n2 = rng.unit_vector(3);
        if (std::abs(n1.dot(n2)) > 0.95) continue;
        Wedge w(n1, n2);
        Vec nu = rng.unit_vector(3);

        for (int i = 1; i <= 2; ++i) {
            const Vec& n = w.normal(i);
            if (std::abs(std::abs(nu.dot(n)) - 1.0) < 1e-6) continue;
            BoundaryFrame f = boundary_frame(w, nu, i == 1 ? Stratum::P1 : Stratum::P2);
            const Vec& mu = *f.mu[i - 1];
            const Vec& m = *f.m[i - 1];
            CHECK(std::abs(mu.norm() - 1.0) < 1e-10);
            CHECK(std::abs(m.norm() - 1.0) < 1e-10);
            CHECK(std::abs(mu.dot(nu)) < 1e-10);
            CHECK(mu.dot(n) >= -1e-10);
            CHECK(std::abs(m.dot(n)) < 1e-10);
            CHECK(m.dot(nu) <= 1e-10);
        }

        Mat span(3, 3);
        span.col(0) = nu;
        span.col(1) = n1;
        span.col(2) = n2;
        Eigen::JacobiSVD<Mat> svd(span);
        if (svd.singularValues()(2) < 1e-3) continue;
        if (std::abs(w.edge_basis().col(0).dot(nu)) < 1e-6) continue;
        BoundaryFrame f = boundary_frame(w, nu, Stratum::L);
        CHECK(std::abs(f.l->dot(n1)) < 1e-10);
        CHECK(std::abs(f.l->dot(n2)) < 1e-10);
        CHECK(f.l->dot(nu) <= 1e-10);
        for (int i = 0; i < 2; ++i) {
            const Vec& tau = *f.tau[i];
            CHECK(std::abs(tau.dot(nu)) < 1e-10);
            CHECK(std::abs(tau.dot(w.normal(i + 1))) < 1e-10);
            CHECK(tau.dot(w.normal(2 - i)) >= -1e-10);
        }
    }
}

TEST_CASE("planar frames for curve fixtures") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    Vec nu = vec2(std::cos(-2.0), std::sin(-2.0));
    BoundaryFrame f = boundary_frame(w, nu, Stratum::P1);
    CHECK(std::abs(f.mu[0]->dot(nu)) < 1e-12);
    CHECK(f.mu[0]->dot(w.normal(1)) >= 0.0);
    CHECK(std::abs(f.m[0]->dot(w.normal(1))) < 1e-12);
    CHECK(f.m[0]->dot(nu) <= 0.0);
}

TEST_CASE("transversality window") {
    Wedge w = right_angle_wedge();
    NormSpec iso = NormSpec::isotropic(3);
    CHECK(transversality_check(iso, w, {0.0, 0.0}));
    CHECK_FALSE(transversality_check(iso, w, {1.0, 0.0}));
    CHECK_FALSE(transversality_check(iso, w, {0.0, -1.0}));

    NormSpec ell = NormSpec::ellipsoidal(Mat(vec3(4, 1, 1).asDiagonal()));
    CHECK(transversality_check(ell, w, {1.9, 0.0}));
    CHECK_FALSE(transversality_check(ell, w, {2.0, 0.0}));
}

TEST_CASE("k-vector solve: free boundary returns zero") {
    Wedge w = right_angle_wedge();
    NormSpec iso = NormSpec::isotropic(3);
    KVectorResult r = solve_k_vector(iso, w, {0.0, 0.0});
    REQUIRE(r.found);
    CHECK(r.k.norm() == 0.0);
    CHECK(r.dual_value == 0.0);
}

TEST_CASE("k-vector solve: orthogonal decomposition") {
    Wedge w = right_angle_wedge();
    NormSpec iso = NormSpec::isotropic(3);
    KVectorResult r = solve_k_vector(iso, w, {-0.3, -0.4});
    REQUIRE(r.found);
    CHECK((r.k - vec3(-0.3, -0.4, 0)).norm() < 1e-10);
    CHECK(r.dual_value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(r.k.dot(w.normal(1)) + 0.3) < 1e-12);
    CHECK(std::abs(r.k.dot(w.normal(2)) + 0.4) < 1e-12);
}

TEST_CASE("k-vector solve: not found when the minimum is above one") {
    Wedge w = right_angle_wedge();
    NormSpec iso = NormSpec::isotropic(3);
    KVectorResult r = solve_k_vector(iso, w, {-0.8, -0.8});
    CHECK_FALSE(r.found);
    CHECK(r.dual_value == doctest::Approx(std::sqrt(1.28)).epsilon(1e-9));
}

TEST_CASE("k-vector solve on a non-orthogonal wedge with an anisotropic norm") {
    Vec n1 = vec3(1, 0, 0);
    Vec n2 = vec3(-0.5, std::sqrt(3.0) / 2.0, 0);
    Wedge w(n1, n2);
    NormSpec ell = NormSpec::ellipsoidal(Mat(vec3(4, 1, 1).asDiagonal()));
    KVectorResult r = solve_k_vector(ell, w, {-0.25, -0.35});
    REQUIRE(r.found);
    CHECK(std::abs(r.k.dot(n1) + 0.25) < 1e-10);
    CHECK(std::abs(r.k.dot(n2) + 0.35) < 1e-10);
    DualNorm dual(ell);
    CHECK(r.dual_value == doctest::Approx(dual(r.k)).epsilon(1e-10));
    CHECK(r.dual_value < 1.0 - 1e-9);
}

TEST_CASE("planar wedge forces the particular solution") {
    Wedge w(vec2(1, 0), vec2(0, 1));
    NormSpec iso = NormSpec::isotropic(2);
    KVectorResult r = solve_k_vector(iso, w, {-0.3, -0.4});
    REQUIRE(r.found);
    CHECK((r.k - vec2(-0.3, -0.4)).norm() < 1e-12);
}
