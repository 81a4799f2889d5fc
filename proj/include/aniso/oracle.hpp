#pragma once

#include "aniso/norms.hpp"
#include "aniso/report.hpp"
#include "aniso/types.hpp"
#include "aniso/wedge.hpp"

#include <functional>
#include <string>

namespace aniso {

// Desk-scale reference path for the planar (curve) case. Everything here is
// deliberately simple and separate from the surface machinery: closed-form
// curve geometry, adaptive Simpson quadrature, Green's theorem through the
// sector corner, and Monte-Carlo volumes. Results from this module certify
// the main pipeline on shared fixtures.
struct CurveScenario {
    std::string name;
    NormSpec norm;   // planar norm
    Wedge wedge;     // planar sector
    Real theta0 = 0.0, theta1 = 1.0;
    std::function<Vec(Real)> point;       // X(theta)
    std::function<Vec(Real)> tangent;     // X'(theta)
    std::function<Vec(Real)> normal;      // outward unit normal
    std::function<Real(Real)> curvature;  // Euclidean curvature against that normal
    std::function<Real(Real)> aniso_form; // A_F(nu) as a 1x1 form, closed form
    Vec k;                                 // capillary vector (zero when free)
    std::function<bool(const Vec&)> membership;
    Vec box_lo, box_hi;
};

// Circle of radius r about center (isotropic or shifted norm; the shifted
// Wulff circle is the translated unit circle).
CurveScenario oracle_circle_sector(const Wedge& w, const NormSpec& norm, const Vec& center,
                                   Real r);

// Axis-aligned Wulff ellipse of the diagonal ellipsoidal norm.
CurveScenario oracle_ellipse_sector(const Wedge& w, const Mat& A, const Vec& center, Real r);

// Convex polar graph rho0 (1 + a cos(m alpha)) under the isotropic norm.
CurveScenario oracle_polar_sector(const Wedge& w, Real rho0, Real a, int m);

Real arc_integral(const CurveScenario& cs, const std::function<Real(Real)>& f,
                  Real tol = 1e-12);

struct OracleIdentity {
    Real lhs = 0.0;
    Real rhs = 0.0;
    Real residual() const { return std::abs(lhs - rhs); }
};

// Curve Minkowski identity: integral (F(nu) - <k, nu>) ds = integral
// kappa_F <x, nu> ds.
OracleIdentity curve_minkowski(const CurveScenario& cs);

struct OracleHk {
    Real lhs = 0.0;       // integral (F(nu) - <k, nu>) / kappa_F ds
    Real rhs = 0.0;       // 2 |Omega|
    Real gap() const { return lhs - rhs; }
    Real area = 0.0;      // |Omega| by Green's theorem
};

OracleHk curve_hk(const CurveScenario& cs);

// Sector-area by Green's theorem; the closing segments run through the
// corner and contribute nothing.
Real curve_enclosed_area(const CurveScenario& cs);

struct McResult {
    Real estimate = 0.0;
    Real stderr_value = 0.0;
};

McResult mc_volume(const std::function<bool(const Vec&)>& member, const Vec& box_lo,
                   const Vec& box_hi, long samples, std::uint64_t seed);

// Bundle the identities plus a Monte-Carlo area cross-check into a report.
Report oracle_suite(const CurveScenario& cs, long mc_samples = 2000000,
                    std::uint64_t seed = 424242);

}  // namespace aniso
