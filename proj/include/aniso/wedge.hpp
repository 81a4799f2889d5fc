#pragma once

#include "aniso/norms.hpp"
#include "aniso/types.hpp"

#include <array>
#include <optional>
#include <variant>

namespace aniso {

enum class Stratum { Interior, P1, P2, L, Outside };

const char* to_string(Stratum s);

// The region {x : <x, n1> < 0 and <x, n2> < 0} between two half-hyperplanes
// P1, P2 that meet along the codimension-2 subspace L.
class Wedge {
public:
    Wedge() : Wedge(vec3(1, 0, 0), vec3(0, 1, 0)) {}
    Wedge(const Vec& n1, const Vec& n2);

    int ambient_dim() const { return static_cast<int>(n_[0].size()); }
    const Vec& normal(int i) const { return n_[i - 1]; }  // i in {1, 2}

    // Orthonormal basis of L = n1^perp cap n2^perp (empty for ambient dim 2).
    const Mat& edge_basis() const { return edge_basis_; }

    // A direction strictly inside the wedge.
    Vec interior_direction() const;

private:
    std::array<Vec, 2> n_;
    Mat edge_basis_;
};

Stratum classify_point(const Wedge& w, const Vec& x, Real tol = 1e-9);

// Frame of Lemma-style sign/orthogonality conditions at a boundary point with
// surface normal nu. On P_i the pair (mu_i, m_i) is filled; on L the pair
// (tau_1, tau_2) and l. Fields left empty when not defined for the stratum.
struct BoundaryFrame {
    Stratum stratum = Stratum::Interior;
    Vec nu;
    std::optional<Vec> mu[2];   // outward conormal of the boundary in the surface
    std::optional<Vec> m[2];    // conormal of the boundary inside P_i
    std::optional<Vec> tau[2];  // outward normal of the corner stratum in d_iSigma
    std::optional<Vec> l;       // direction along L pointing into the wetted edge
};

BoundaryFrame boundary_frame(const Wedge& w, const Vec& nu, Stratum stratum, Real tol = 1e-9);

// Admissible capillary data: omega0_i strictly between -F(-n_i) and F(n_i).
bool transversality_check(const NormSpec& norm, const Wedge& w,
                          const std::array<Real, 2>& omega0);

struct KVectorResult {
    bool found = false;
    Vec k;               // valid when found
    Real dual_value = 0; // F_dual at k (or at the constrained minimizer)
};

// Constant vector with <k, n_i> = omega0_i and dual norm < 1, obtained by
// minimizing the dual norm over the affine constraint set. The dual norm is
// convex, so the global minimum decides existence.
KVectorResult solve_k_vector(const NormSpec& norm, const Wedge& w,
                             const std::array<Real, 2>& omega0);

}  // namespace aniso
