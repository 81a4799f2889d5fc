#pragma once

#include "aniso/errors.hpp"
#include "aniso/types.hpp"

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace aniso {

struct GaussRule {
    std::vector<Real> points;   // on [-1, 1]
    std::vector<Real> weights;
};

// Gauss-Legendre nodes by Newton iteration on the Legendre polynomial,
// seeded with the Chebyshev asymptotic. Cached per order.
const GaussRule& gauss_legendre(int order);

// Nodes/weights of the order-q rule mapped to [a, b].
GaussRule gauss_legendre_on(int order, Real a, Real b);

// --- finite differences -----------------------------------------------------
//
// Central differences with one Richardson level by default. The step is
// relative to scale 1; callers pass analytic maps so truncation dominates.

struct FdSpec {
    Real step = 1e-5;
    int richardson = 1;  // 0 = plain central difference
};

// d/dt f(t) at t.
Real fd_derivative(const std::function<Real(Real)>& f, Real t, const FdSpec& spec = {});

// Directional derivative of a vector map g: R^m -> R^d along direction e.
Vec fd_directional(const std::function<Vec(const Vec&)>& g, const Vec& u, const Vec& e,
                   const FdSpec& spec = {});

// Gradient of a scalar field on R^d.
Vec fd_gradient(const std::function<Real(const Vec&)>& f, const Vec& x, const FdSpec& spec = {});

// Symmetric Hessian of a scalar field on R^d. Uses second differences of f;
// step defaults balance truncation against roundoff for |f| = O(1).
Mat fd_hessian(const std::function<Real(const Vec&)>& f, const Vec& x, Real step = 2e-4,
               int richardson = 1);

// --- 1-D solvers ------------------------------------------------------------

// Root of a strictly monotone function on [a, b]; bisection with Newton
// acceleration when a derivative is supplied. Throws OptimizerNotConverged.
Real solve_monotone(const std::function<Real(Real)>& f, Real a, Real b,
                    const std::function<Real(Real)>& df = nullptr, Real tol = 1e-14,
                    int max_iter = 200);

// Minimum of a strictly unimodal (e.g. convex) function on [a, b] by golden
// section, refined with a parabolic polish. Returns (argmin, min).
std::pair<Real, Real> minimize_unimodal(const std::function<Real(Real)>& f, Real a, Real b,
                                        Real tol = 1e-12, int max_iter = 400);

// --- adaptive Simpson (oracle-grade 1-D quadrature) -------------------------

Real adaptive_simpson(const std::function<Real(Real)>& f, Real a, Real b, Real tol = 1e-12,
                      int max_depth = 40);

// Observed convergence order between successive residuals; NaN when the pair
// sits at the roundoff floor and no rate is measurable.
Real convergence_rate(Real coarse, Real fine, Real floor_value);

}  // namespace aniso
