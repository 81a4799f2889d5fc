#pragma once

#include "aniso/norms.hpp"
#include "aniso/surfaces.hpp"
#include "aniso/types.hpp"
#include "aniso/wedge.hpp"

#include <vector>

namespace aniso {

// Pointwise anisotropic curvature data. The shape operator S_F = A_F(nu) o dnu
// acts on the common tangent plane nu^perp; its eigenvalues are obtained from
// the congruent symmetric problem A^(1/2) W A^(1/2), which is real by
// construction.
struct CurvatureData {
    Vec u;
    Vec nu;
    Vec nuF;              // Phi(nu), the anisotropic normal
    Mat dnuF;             // (n+1) x n: chart-direction derivatives of nuF
    Mat basis;            // orthonormal tangent basis (n+1) x n
    Mat shape;            // S_F in that basis
    Vec kappa;            // anisotropic principal curvatures, ascending
    std::vector<Real> H;  // H_0 .. H_n, normalized elementary symmetric means
};

CurvatureData anisotropic_shape(const NormSpec& norm, const SurfaceFrame& frame);
CurvatureData anisotropic_shape(const NormSpec& norm, const Patch& p, const Vec& u);

// H_r = e_r(kappa) / binom(n, r), r = 0..n.
std::vector<Real> higher_mean_curvatures(const Vec& kappa);

// Coefficients of prod_i (1 + t kappa_i), ascending in t.
std::vector<Real> curvature_polynomial(const Vec& kappa);

Real binomial(int n, int r);

// Tangential Jacobian of the outward parallel translation, prod(1 + t kappa).
Real flow_jacobian_forward(const Vec& kappa, Real t);

// Full-dimensional Jacobian of the inward normal sweep (x, t) -> x - t nuF:
// F(nu) * prod(1 - t kappa).
Real flow_jacobian_zeta(const Vec& kappa, Real t, Real F_at_nu);

// Parallel hypersurface x + t (nuF(x) - k). Preserves normals and boundary
// faces when <k, n_i> matches the capillary data; throws ImmersionLost when
// 1 + t kappa_i loses positivity, BoundaryEscape when a tagged edge leaves
// its face (the supplied k is inconsistent).
Patch parallel_flow(const NormSpec& norm, const Patch& p, Real t, const Vec& k,
                    const Wedge* w = nullptr);

// Per-node curvature cache on top of a quadrature table.
struct CurvedNode {
    QuadNode node;
    CurvatureData cd;
    Real F_nu;
};

std::vector<CurvedNode> curvature_table(const NormSpec& norm, const Patch& p,
                                        const PatchTable& table);

// Independent derivative check: centered differences of u -> Phi(nu(u)).
Mat dnuF_fd(const NormSpec& norm, const Patch& p, const Vec& u);

}  // namespace aniso
