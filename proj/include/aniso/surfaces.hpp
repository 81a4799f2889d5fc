#pragma once

#include "aniso/norms.hpp"
#include "aniso/types.hpp"
#include "aniso/wedge.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace aniso {

struct QuadratureSpec {
    int order = 8;
    std::array<int, 2> cells{4, 4};  // per parameter direction; cells[1] unused for curves

    QuadratureSpec at_level(int level) const {
        QuadratureSpec q = *this;
        q.cells[0] <<= level;
        q.cells[1] <<= level;
        return q;
    }
};

struct EdgeTag {
    int axis;  // parameter axis held fixed on the edge
    int side;  // 0 -> coordinate = 0, 1 -> coordinate = 1
    int face;  // wedge face index, 1 or 2
};

// A smooth parametric hypersurface piece over [0,1]^n (n = 1 curve in the
// plane, n = 2 surface in space). Charts must extend smoothly a little past
// the parameter box so centered differences stay valid on the edges.
//
// Derivative oracles default to Richardson-extrapolated central differences
// of the chart; constructions that know better (assembled perturbations,
// parallel translates) install exact-to-roundoff functors instead.
struct Patch {
    int dim = 2;  // n
    std::function<Vec(const Vec&)> chart;
    std::function<Mat(const Vec&)> jacobian;          // (n+1) x n
    std::function<Mat(const Vec&)> second_jacobian;   // columns: uu | uv | vv
    std::function<Vec(const Vec&)> normal_oracle;     // optional exact outward normal
    std::vector<EdgeTag> edges;
    std::array<bool, 2> periodic{false, false};
    QuadratureSpec quad;
    Real orient_sign = 1.0;
    Vec interior_point;                                // reference point inside Omega
    std::optional<Vec> star_center;                    // rays from here hit Sigma once
    std::function<bool(const Vec&)> membership;        // x in Omega (open region)
    std::vector<Vec> corner_points;                    // Sigma cap L (codim-2 corners)
    std::vector<Vec> corner_params;

    int ambient_dim() const { return dim + 1; }
};

// --- pointwise evaluation ----------------------------------------------------

struct SurfaceFrame {
    Vec u;
    Vec x;
    Mat J;              // (n+1) x n
    Real area_element;  // sqrt(det J^T J)
    Vec nu;             // outward unit normal
    Mat dnu;            // (n+1) x n, columns d(nu)/du_i
};

Mat default_jacobian(const Patch& p, const Vec& u);
Mat default_second_jacobian(const Patch& p, const Vec& u);
Vec patch_position(const Patch& p, const Vec& u);
Mat patch_jacobian(const Patch& p, const Vec& u);
Mat patch_second_jacobian(const Patch& p, const Vec& u);
Vec patch_normal(const Patch& p, const Vec& u);

SurfaceFrame frame_at(const Patch& p, const Vec& u, bool need_dnu = true);

// --- quadrature tables -------------------------------------------------------

struct QuadNode {
    SurfaceFrame frame;
    Real weight;  // parameter-space weight; dA = weight * area_element
};

struct EdgeNode {
    Vec u;
    Real weight;  // parameter-space weight along the edge
    Vec x;
    Vec tangent;  // unnormalized edge velocity
    Real speed;
    Vec nu;
};

struct PatchTable {
    int level = 0;
    std::vector<QuadNode> nodes;
    std::map<int, std::vector<EdgeNode>> edges;  // face -> nodes
};

PatchTable build_patch_table(const Patch& p, int level, bool need_dnu = true);

// Integral of a frame functional over the patch (compensated summation).
Real integrate(const PatchTable& table, const std::function<Real(const QuadNode&)>& f);

// --- constructions -----------------------------------------------------------

// Truncated Wulff shape W_r(y) cap closed wedge, parameterized over the unit
// normal sphere through the Cahn-Hoffman map. Throws EmptyIntersection /
// ChartFailure per the region topology.
Patch wulff_patch(const NormSpec& norm, const Wedge& w, const Vec& y, Real r,
                  QuadratureSpec quad = {});

struct BumpSpec {
    // value on the parameter box; vanishes together with its first
    // derivatives on tagged edges (and on degenerate corner edges)
    std::function<Real(const Vec&)> value;
    std::string name = "separable_sin2";
    Real skew = 0.0;  // catalog parameter, recorded for serialization
};

BumpSpec separable_sin2_bump(int dim, Real skew = 0.0);

// Normal perturbation X + eps * bump * nu with re-assembled derivative
// oracles; throws ImmersionLost when eps destroys the immersion.
Patch perturb(const Patch& base, const BumpSpec& bump, Real eps);

// Planar polar graph rho(alpha) = rho0 * (1 + a cos(m alpha)) over a sector;
// free-boundary when the angular span aligns with the face directions.
Patch polar_graph_patch(const Wedge& w, Real rho0, Real a, int m, QuadratureSpec quad = {});

// --- measured quantities -----------------------------------------------------

struct CapillaryField {
    int face = 0;
    std::vector<Real> values;     // omega^i at edge quadrature nodes
    Real mean = 0.0;
    Real max_deviation = 0.0;     // max |omega - mean|
    bool constant = false;        // within const_tol
    Real max_value = 0.0;
};

CapillaryField capillary_angle(const Patch& p, const NormSpec& norm, const Wedge& w, int face,
                               int level = 0, Real const_tol = 1e-8);

// |Omega| by the divergence theorem; wetted faces contribute nothing because
// the position field is tangent there.
Real enclosed_volume(const Patch& p, const Wedge& w, int level = 0);

// Anisotropic area integral F(nu) dA.
Real anisotropic_area(const Patch& p, const NormSpec& norm, int level = 0);

// Area of the wetted region on face i, bounded by the patch edge curve and L.
Real wetted_area(const Patch& p, const Wedge& w, int face, int level = 0);

// Immersion/tag/orientation sweep; throws on violation.
void validate_patch(const Patch& p, const Wedge& w, Real rank_tol = 1e-8,
                    Real boundary_tol = 1e-9);

// Radius along the ray from the star center through direction dir (unit);
// used for membership tests of perturbed star-shaped patches.
Real ray_cast_radius(const Patch& p, const Vec& center, const Vec& dir);

}  // namespace aniso
