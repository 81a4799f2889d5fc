#include "aniso/wedge.hpp"

#include <cmath>

namespace aniso {

const char* to_string(Stratum s) {
    switch (s) {
        case Stratum::Interior: return "interior";
        case Stratum::P1: return "P1";
        case Stratum::P2: return "P2";
        case Stratum::L: return "L";
        default: return "outside";
    }
}

Wedge::Wedge(const Vec& n1, const Vec& n2) {
    if (n1.size() != n2.size())
        throw ConfigError("wedge normals have mismatched dimensions");
    if (std::abs(n1.norm() - 1.0) > 1e-12 || std::abs(n2.norm() - 1.0) > 1e-12)
        throw NonUnitInput("wedge normals must be unit vectors");
    if (std::abs(n1.dot(n2)) >= 1.0 - 1e-9)
        throw ConfigError("wedge normals must be linearly independent");
    n_[0] = n1;
    n_[1] = n2;

    const int d = static_cast<int>(n1.size());
    // Null space of [n1^T; n2^T] via full SVD.
    Mat constraints(2, d);
    constraints.row(0) = n1.transpose();
    constraints.row(1) = n2.transpose();
    Eigen::JacobiSVD<Mat> svd(constraints, Eigen::ComputeFullV);
    edge_basis_ = svd.matrixV().rightCols(d - 2);
}

Vec Wedge::interior_direction() const {
    return (-(n_[0] + n_[1])).normalized();
}

Stratum classify_point(const Wedge& w, const Vec& x, Real tol) {
    const Real a1 = x.dot(w.normal(1));
    const Real a2 = x.dot(w.normal(2));
    const bool on1 = std::abs(a1) <= tol, on2 = std::abs(a2) <= tol;
    if (on1 && on2) return Stratum::L;
    if (on1 && a2 < -tol) return Stratum::P1;
    if (on2 && a1 < -tol) return Stratum::P2;
    if (a1 < -tol && a2 < -tol) return Stratum::Interior;
    return Stratum::Outside;
}

namespace {

// Unit vector in span{a, b} orthogonal to b-component... removes the nu
// component of n and fixes the sign against reference.
Vec orthonormal_against(const Vec& n, const Vec& nu, Real tol) {
    Vec v = n - n.dot(nu) * nu;
    const Real len = v.norm();
    if (len < tol)
        throw TangencyError("surface normal is parallel to a wedge normal; frame not unique");
    return v / len;
}

}  // namespace

BoundaryFrame boundary_frame(const Wedge& w, const Vec& nu, Stratum stratum, Real tol) {
    if (std::abs(nu.norm() - 1.0) > 1e-10) throw NonUnitInput("boundary_frame: nu must be unit");
    BoundaryFrame frame;
    frame.stratum = stratum;
    frame.nu = nu;
    const int d = w.ambient_dim();

    auto fill_face = [&](int i) {
        const Vec& n = w.normal(i + 1);
        // mu_i: unit, orthogonal to nu, nonnegative against n_i.
        frame.mu[i] = orthonormal_against(n, nu, tol);
        // m_i: unit, orthogonal to n_i, nonpositive against nu.
        Vec m = nu - nu.dot(n) * n;
        const Real len = m.norm();
        if (len < tol) throw TangencyError("nu parallel to wedge normal; m_i not unique");
        frame.m[i] = -m / len;
    };

    switch (stratum) {
        case Stratum::P1: fill_face(0); break;
        case Stratum::P2: fill_face(1); break;
        case Stratum::L: {
            // Transversality along L: nu, n1, n2 independent.
            Mat span(d, 3);
            span.col(0) = nu;
            span.col(1) = w.normal(1);
            span.col(2) = w.normal(2);
            Eigen::JacobiSVD<Mat> svd(span);
            if (svd.singularValues()(2) < tol)
                throw TangencyError("nu, n1, n2 linearly dependent on L; frame not unique");
            fill_face(0);
            fill_face(1);
            if (d == 3) {
                for (int i = 0; i < 2; ++i) {
                    const Vec& ni = w.normal(i + 1);
                    const Vec& nj = w.normal(2 - i);
                    Vec t = cross3(nu, ni).normalized();
                    const Real side = t.dot(nj);
                    if (std::abs(side) < tol)
                        throw TangencyError("tau_i sign condition degenerate");
                    frame.tau[i] = side >= 0.0 ? t : Vec(-t);
                }
                Vec ell = w.edge_basis().col(0);
                const Real side = ell.dot(nu);
                if (std::abs(side) < tol)
                    throw TangencyError("nu orthogonal to L; l not determined");
                frame.l = side <= 0.0 ? ell : Vec(-ell);
            }
            break;
        }
        default:
            throw ConfigError("boundary_frame expects a boundary stratum");
    }
    return frame;
}

bool transversality_check(const NormSpec& norm, const Wedge& w,
                          const std::array<Real, 2>& omega0) {
    for (int i = 0; i < 2; ++i) {
        const Vec& n = w.normal(i + 1);
        const Real lo = -norm.value(-n);
        const Real hi = norm.value(n);
        if (!(omega0[i] > lo && omega0[i] < hi)) return false;
    }
    return true;
}

KVectorResult solve_k_vector(const NormSpec& norm, const Wedge& w,
                             const std::array<Real, 2>& omega0) {
    const int d = norm.ambient_dim();
    if (!transversality_check(norm, w, omega0))
        throw CapillaryViolation("omega0 outside the admissible open interval");

    // Exact affine solve for the particular solution, then convex
    // minimization of the dual norm along the edge directions.
    Mat constraints(2, d);
    constraints.row(0) = w.normal(1).transpose();
    constraints.row(1) = w.normal(2).transpose();
    Vec rhs(2);
    rhs << omega0[0], omega0[1];
    Vec kp = constraints.colPivHouseholderQr().solve(rhs);

    KVectorResult out;
    if (omega0[0] == 0.0 && omega0[1] == 0.0) {
        out.found = true;
        out.k = Vec::Zero(d);
        out.dual_value = 0.0;
        return out;
    }

    DualNorm dual(norm);
    Vec k_best = kp;
    Real val_best = dual(kp);
    const Mat& edge = w.edge_basis();
    if (edge.cols() == 1) {
        // One free direction: the dual norm restricted to the line is convex.
        Vec e = edge.col(0);
        auto f = [&](Real z) { return dual.eval(kp + z * e); };
        Real lo = -1.0, hi = 1.0;
        while (f(lo) < f(lo + 1e-3) && lo > -64.0) lo *= 2.0;
        while (f(hi) < f(hi - 1e-3) && hi < 64.0) hi *= 2.0;
        auto [zstar, fstar] = minimize_unimodal(f, lo, hi, 1e-13);
        if (fstar < val_best) {
            val_best = fstar;
            k_best = kp + zstar * e;
        }
    } else if (edge.cols() > 1) {
        throw OptimizerNotConverged("k-vector search implemented for ambient dimension <= 3");
    }

    out.dual_value = val_best;
    if (val_best < 1.0 - 1e-9) {
        out.found = true;
        out.k = k_best;
    }
    return out;
}

}  // namespace aniso
