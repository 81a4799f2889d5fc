#include "doctest.h"

#include "aniso/numerics.hpp"
#include "aniso/types.hpp"

#include <cmath>
#include <numeric>

using namespace aniso;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    for (int order : {1, 2, 3, 5, 8, 12}) {
        GaussRule rule = gauss_legendre_on(order, 0.0, 1.0);
        for (int deg = 0; deg <= 2 * order - 1; ++deg) {
            Real sum = 0.0;
            for (std::size_t i = 0; i < rule.points.size(); ++i)
                sum += rule.weights[i] * std::pow(rule.points[i], deg);
            CHECK(sum == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("gauss-legendre high order on smooth integrand") {
    GaussRule rule = gauss_legendre_on(16, 0.0, M_PI);
    Real sum = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i)
        sum += rule.weights[i] * std::sin(rule.points[i]);
    CHECK(std::abs(sum - 2.0) < 1e-14);
}

TEST_CASE("centered differences with Richardson stay near roundoff on analytic maps") {
    auto f = [](Real t) { return std::sin(3.0 * t) * std::exp(0.5 * t); };
    auto df = [](Real t) {
        return std::exp(0.5 * t) * (3.0 * std::cos(3.0 * t) + 0.5 * std::sin(3.0 * t));
    };
    for (Real t : {0.0, 0.3, 1.1}) CHECK(std::abs(fd_derivative(f, t) - df(t)) < 5e-10);
}

TEST_CASE("plain central differences converge at second order") {
    auto f = [](Real t) { return std::cos(2.0 * t); };
    const Real t0 = 0.7;
    const Real exact = -2.0 * std::sin(2.0 * t0);
    FdSpec coarse{1e-3, 0}, fine{5e-4, 0};
    const Real e1 = std::abs(fd_derivative(f, t0, coarse) - exact);
    const Real e2 = std::abs(fd_derivative(f, t0, fine) - exact);
    const Real order = std::log2(e1 / e2);
    CHECK(order > 1.9);
    CHECK(order < 2.2);
}

TEST_CASE("fd hessian of a quadratic form is the matrix") {
    Mat A(3, 3);
    A << 4, 1, 0, 1, 3, -1, 0, -1, 2;
    auto f = [&](const Vec& x) { return 0.5 * x.dot(A * x); };
    Vec x0 = vec3(0.3, -0.2, 0.9);
    Mat H = fd_hessian(f, x0);
    CHECK((H - A).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("monotone root solve") {
    auto f = [](Real t) { return std::cos(t) - 0.3; };
    Real root = solve_monotone(f, 0.0, 2.0);
    CHECK(std::abs(root - std::acos(0.3)) < 1e-13);
}

TEST_CASE("unimodal minimization") {
    auto f = [](Real t) { return (t - 1.3) * (t - 1.3) + 0.7; };
    auto [x, v] = minimize_unimodal(f, -4.0, 5.0);
    CHECK(std::abs(x - 1.3) < 5e-8);
    CHECK(std::abs(v - 0.7) < 1e-14);
}

TEST_CASE("adaptive simpson reaches 1e-12") {
    Real v = adaptive_simpson([](Real t) { return std::sin(t); }, 0.0, M_PI, 1e-13);
    CHECK(std::abs(v - 2.0) < 1e-12);
    Real w = adaptive_simpson([](Real t) { return std::exp(-t * t); }, -6.0, 6.0, 1e-13);
    CHECK(std::abs(w - std::sqrt(M_PI)) < 1e-11);
}

TEST_CASE("compensated summation is partition-stable") {
    Rng rng(99);
    std::vector<Real> xs(200000);
    for (auto& x : xs) x = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-8.0, 8.0));

    KahanSum fwd;
    for (Real x : xs) fwd.add(x);
    KahanSum bwd;
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) bwd.add(*it);
    KahanSum s1, s2;
    for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 ? s1 : s2).add(xs[i]);
    KahanSum merged;
    merged.add(s1.value());
    merged.add(s2.value());

    const Real scale = std::abs(fwd.value()) + 1.0;
    CHECK(std::abs(fwd.value() - bwd.value()) / scale < 1e-12);
    CHECK(std::abs(fwd.value() - merged.value()) / scale < 1e-12);
}

TEST_CASE("tangent basis spans the orthogonal complement") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        for (int d : {2, 3}) {
            Vec nu = rng.unit_vector(d);
            Mat t = tangent_basis(nu);
            CHECK((t.transpose() * nu).cwiseAbs().maxCoeff() < 1e-14);
            Mat gram = t.transpose() * t;
            CHECK((gram - Mat::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}
