#include "aniso/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aniso {

namespace {

constexpr Real kChartFdStep = 1e-5;
constexpr Real kSecondFdStep = 1e-4;

int second_col(int dim, int i, int j) {
    if (dim == 1) return 0;
    return i + j;  // (0,0)->0, (0,1)->1, (1,1)->2
}

Vec unit_param(int dim, int axis) {
    Vec e = Vec::Zero(dim);
    e(axis) = 1.0;
    return e;
}

}  // namespace

Mat default_jacobian(const Patch& p, const Vec& u) {
    Mat J(p.ambient_dim(), p.dim);
    FdSpec fd{kChartFdStep, 1};
    for (int i = 0; i < p.dim; ++i)
        J.col(i) = fd_directional(p.chart, u, unit_param(p.dim, i), fd);
    return J;
}

// Second derivatives difference the chart values directly (their noise is a
// few ulp) rather than an FD jacobian, whose own roundoff would be amplified
// by the outer step. One Richardson level on top of the h^2 formulas.
Mat default_second_jacobian(const Patch& p, const Vec& u) {
    const int d = p.ambient_dim();
    auto pure = [&](Real h, const Vec& e) -> Vec {
        return (p.chart(u + h * e) - 2.0 * p.chart(u) + p.chart(u - h * e)) / (h * h);
    };
    auto mixed = [&](Real h, const Vec& ei, const Vec& ej) -> Vec {
        return (p.chart(u + h * ei + h * ej) - p.chart(u + h * ei - h * ej) -
                p.chart(u - h * ei + h * ej) + p.chart(u - h * ei - h * ej)) /
               (4.0 * h * h);
    };
    const Real h = 5e-4;
    Mat out(d, p.dim == 1 ? 1 : 3);
    Vec e0 = unit_param(p.dim, 0);
    out.col(0) = (4.0 * pure(0.5 * h, e0) - pure(h, e0)) / 3.0;
    if (p.dim == 2) {
        Vec e1 = unit_param(p.dim, 1);
        out.col(1) = (4.0 * mixed(0.5 * h, e0, e1) - mixed(h, e0, e1)) / 3.0;
        out.col(2) = (4.0 * pure(0.5 * h, e1) - pure(h, e1)) / 3.0;
    }
    return out;
}

Vec patch_position(const Patch& p, const Vec& u) { return p.chart(u); }

Mat patch_jacobian(const Patch& p, const Vec& u) {
    return p.jacobian ? p.jacobian(u) : default_jacobian(p, u);
}

Mat patch_second_jacobian(const Patch& p, const Vec& u) {
    return p.second_jacobian ? p.second_jacobian(u) : default_second_jacobian(p, u);
}

Vec patch_normal(const Patch& p, const Vec& u) {
    if (p.normal_oracle) return p.normal_oracle(u).normalized();
    Mat J = patch_jacobian(p, u);
    if (p.dim == 1) return p.orient_sign * rot90(J.col(0)).normalized();
    return p.orient_sign * cross3(J.col(0), J.col(1)).normalized();
}

SurfaceFrame frame_at(const Patch& p, const Vec& u, bool need_dnu) {
    SurfaceFrame f;
    f.u = u;
    f.x = p.chart(u);
    f.J = patch_jacobian(p, u);
    Mat g = f.J.transpose() * f.J;
    f.area_element = std::sqrt(std::max(0.0, g.determinant()));

    if (p.normal_oracle) {
        f.nu = p.normal_oracle(u).normalized();
        if (need_dnu) {
            f.dnu.resize(p.ambient_dim(), p.dim);
            FdSpec fd{kChartFdStep, 1};
            for (int i = 0; i < p.dim; ++i)
                f.dnu.col(i) = fd_directional(p.normal_oracle, u, unit_param(p.dim, i), fd);
        }
        return f;
    }

    if (p.dim == 1) {
        Vec w = rot90(f.J.col(0));
        const Real len = w.norm();
        f.nu = p.orient_sign * w / len;
        if (need_dnu) {
            Mat d2 = patch_second_jacobian(p, u);
            Vec dw = rot90(d2.col(0));
            Vec wn = w / len;
            f.dnu.resize(2, 1);
            f.dnu.col(0) = p.orient_sign * (dw - wn.dot(dw) * wn) / len;
        }
        return f;
    }

    Vec c = cross3(f.J.col(0), f.J.col(1));
    const Real len = c.norm();
    Vec cn = c / len;
    f.nu = p.orient_sign * cn;
    if (need_dnu) {
        Mat d2 = patch_second_jacobian(p, u);
        f.dnu.resize(3, 2);
        for (int i = 0; i < 2; ++i) {
            Vec dc = cross3(d2.col(second_col(2, 0, i)), f.J.col(1)) +
                     cross3(f.J.col(0), d2.col(second_col(2, i, 1)));
            f.dnu.col(i) = p.orient_sign * (dc - cn.dot(dc) * cn) / len;
        }
    }
    return f;
}

// --- tables ------------------------------------------------------------------

PatchTable build_patch_table(const Patch& p, int level, bool need_dnu) {
    PatchTable table;
    table.level = level;
    const QuadratureSpec q = p.quad.at_level(level);
    const GaussRule& rule = gauss_legendre(q.order);

    if (p.dim == 1) {
        const int cells = q.cells[0];
        for (int c = 0; c < cells; ++c) {
            const Real a = Real(c) / cells, b = Real(c + 1) / cells;
            GaussRule r = gauss_legendre_on(q.order, a, b);
            for (std::size_t i = 0; i < r.points.size(); ++i) {
                Vec u(1);
                u << r.points[i];
                table.nodes.push_back({frame_at(p, u, need_dnu), r.weights[i]});
            }
        }
    } else {
        std::array<std::vector<std::pair<Real, Real>>, 2> axes;  // (point, weight)
        for (int a = 0; a < 2; ++a) {
            for (int c = 0; c < q.cells[a]; ++c) {
                GaussRule r = gauss_legendre_on(q.order, Real(c) / q.cells[a],
                                                Real(c + 1) / q.cells[a]);
                for (std::size_t i = 0; i < r.points.size(); ++i)
                    axes[a].emplace_back(r.points[i], r.weights[i]);
            }
        }
        for (const auto& [t, wt] : axes[0])
            for (const auto& [s, ws] : axes[1]) {
                Vec u(2);
                u << t, s;
                table.nodes.push_back({frame_at(p, u, need_dnu), wt * ws});
            }
    }
    (void)rule;

    for (const EdgeTag& tag : p.edges) {
        std::vector<EdgeNode>& out = table.edges[tag.face];
        if (p.dim == 1) {
            Vec u(1);
            u << Real(tag.side);
            EdgeNode node;
            node.u = u;
            node.weight = 1.0;
            node.x = p.chart(u);
            node.tangent = patch_jacobian(p, u).col(0);
            node.speed = 1.0;  // point boundary: counting measure
            node.nu = patch_normal(p, u);
            out.push_back(node);
            continue;
        }
        const int free_axis = 1 - tag.axis;
        const int cells = q.cells[free_axis];
        for (int c = 0; c < cells; ++c) {
            GaussRule r = gauss_legendre_on(q.order, Real(c) / cells, Real(c + 1) / cells);
            for (std::size_t i = 0; i < r.points.size(); ++i) {
                Vec u(2);
                u(tag.axis) = Real(tag.side);
                u(free_axis) = r.points[i];
                EdgeNode node;
                node.u = u;
                node.weight = r.weights[i];
                node.x = p.chart(u);
                node.tangent = patch_jacobian(p, u).col(free_axis);
                node.speed = node.tangent.norm();
                node.nu = patch_normal(p, u);
                out.push_back(node);
            }
        }
    }
    return table;
}

Real integrate(const PatchTable& table, const std::function<Real(const QuadNode&)>& f) {
    KahanSum sum;
    for (const QuadNode& node : table.nodes)
        sum.add(node.weight * node.frame.area_element * f(node));
    return sum.value();
}

// --- Wulff patches -----------------------------------------------------------

namespace {

// Unit-sphere geodesic interpolation; linear fallback when A and B coincide.
Vec slerp(const Vec& a, const Vec& b, Real s) {
    const Real c = std::clamp(a.dot(b), -1.0, 1.0);
    Vec axb = a.size() == 3 ? cross3(a, b) : Vec();
    const Real sn = a.size() == 3 ? axb.norm() : std::sqrt(std::max(0.0, 1.0 - c * c));
    const Real psi = std::atan2(sn, c);
    if (psi < 1e-9) return ((1.0 - s) * a + s * b).normalized();
    return ((std::sin((1.0 - s) * psi) * a + std::sin(s * psi) * b) / std::sin(psi)).normalized();
}

struct WulffGeometry {
    const NormSpec* norm;
    Vec y;
    Real r;
};

// <y + r Phi(xi), n> as a function of the polar angle from axis towards v;
// strictly decreasing in theta, so the face crossing is a clean 1-D root.
Real face_gap(const WulffGeometry& g, const Vec& axis, const Vec& v, const Vec& n, Real theta) {
    Vec xi = std::cos(theta) * axis + std::sin(theta) * v;
    return g.y.dot(n) + g.r * g.norm->gradient(xi).dot(n);
}

Real face_gap_dtheta(const WulffGeometry& g, const Vec& axis, const Vec& v, const Vec& n,
                     Real theta) {
    Vec xi = std::cos(theta) * axis + std::sin(theta) * v;
    Vec dxi = -std::sin(theta) * axis + std::cos(theta) * v;
    return g.r * (g.norm->hessian(xi) * dxi).dot(n);
}

Real solve_face_theta(const WulffGeometry& g, const Vec& axis, const Vec& v, const Vec& n) {
    Real lo = 1e-12, hi = M_PI - 1e-12;
    Real flo = face_gap(g, axis, v, n, lo);
    Real fhi = face_gap(g, axis, v, n, hi);
    if (flo <= 0.0 || fhi >= 0.0)
        throw ChartFailure("face level curve does not cross the polar arc");
    // Bisection to a safe basin, then Newton to machine precision. The
    // iteration runs to a fixed point so the chart stays smooth under
    // centered differences.
    for (int i = 0; i < 40; ++i) {
        const Real mid = 0.5 * (lo + hi);
        if (face_gap(g, axis, v, n, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    Real theta = 0.5 * (lo + hi);
    for (int i = 0; i < 30; ++i) {
        const Real f = face_gap(g, axis, v, n, theta);
        const Real df = face_gap_dtheta(g, axis, v, n, theta);
        const Real step = f / df;
        Real next = theta - step;
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        theta = next;
        if (std::abs(step) < 1e-15) break;
    }
    theta -= face_gap(g, axis, v, n, theta) / face_gap_dtheta(g, axis, v, n, theta);
    return theta;
}

void attach_wulff_common(Patch& p, const NormSpec& norm, const Wedge& w, const Vec& y, Real r,
                         std::function<Vec(const Vec&)> xi_of) {
    p.normal_oracle = xi_of;
    // The lambda owns a copy of the norm so the patch can outlive the caller.
    NormSpec owned = norm;
    p.chart = [owned, y, r, xi_of](const Vec& u) -> Vec {
        return y + r * owned.gradient(xi_of(u));
    };
    p.orient_sign = 1.0;
    p.star_center = y;

    auto dual = std::make_shared<DualNorm>(norm);
    Vec n1 = w.normal(1), n2 = w.normal(2);
    p.membership = [dual, y, r, n1, n2](const Vec& x) {
        if (x.dot(n1) >= 0.0 || x.dot(n2) >= 0.0) return false;
        return dual->eval(x - y) < r;
    };
}

void find_interior_point(Patch& p, const Wedge& w, const Vec& y, Real r) {
    std::vector<Vec> probes;
    const int dim = p.dim;
    if (dim == 1) {
        for (Real t : {0.5, 0.35, 0.65, 0.2, 0.8}) probes.push_back(Vec::Constant(1, t));
    } else {
        for (auto [a, b] : std::initializer_list<std::pair<Real, Real>>{
                 {0.5, 0.5}, {0.3, 0.5}, {0.7, 0.5}, {0.5, 0.3}, {0.5, 0.7}})
            probes.push_back(vec2(a, b));
    }
    for (Real beta : {0.98, 0.9, 0.75, 0.5}) {
        for (const Vec& u : probes) {
            Vec x = y + beta * (p.chart(u) - y);
            const Real margin1 = x.dot(w.normal(1)), margin2 = x.dot(w.normal(2));
            if (margin1 < -1e-6 * r && margin2 < -1e-6 * r) {
                p.interior_point = x;
                return;
            }
        }
    }
    throw EmptyIntersection("no interior reference point: intersection has empty interior");
}

Patch wulff_patch_curve(const NormSpec& norm, const Wedge& w, const Vec& y, Real r,
                        QuadratureSpec quad, const std::array<bool, 2>& cut) {
    Patch p;
    p.dim = 1;
    p.quad = quad;

    auto gap = [&](int face, Real alpha) {
        Vec xi = vec2(std::cos(alpha), std::sin(alpha));
        return y.dot(w.normal(face)) + r * norm.gradient(xi).dot(w.normal(face));
    };
    auto inside = [&](Real alpha) { return gap(1, alpha) <= 1e-13 && gap(2, alpha) <= 1e-13; };

    if (!cut[0] && !cut[1]) {
        auto xi_of = [](const Vec& u) -> Vec {
            return vec2(std::cos(2.0 * M_PI * u(0)), std::sin(2.0 * M_PI * u(0)));
        };
        attach_wulff_common(p, norm, w, y, r, xi_of);
        p.periodic[0] = true;
        find_interior_point(p, w, y, r);
        return p;
    }

    // Scan for the admissible angular components.
    const int M = 4096;
    std::vector<bool> in(M);
    for (int i = 0; i < M; ++i) in[i] = inside(2.0 * M_PI * i / M);
    int start = -1;
    for (int i = 0; i < M; ++i)
        if (!in[i] && in[(i + 1) % M]) {
            if (start >= 0) throw ChartFailure("admissible arc is not connected");
            start = i;
        }
    if (start < 0) throw EmptyIntersection("Wulff shape does not meet the wedge");
    int end = start;
    while (in[(end + 1) % M]) ++end;

    // Refine the two crossings; remember which face is active at each.
    auto refine = [&](Real a_out, Real a_in) -> std::pair<Real, int> {
        const int face = gap(1, a_out) > 1e-13 ? 1 : 2;
        auto h = [&](Real a) { return gap(face, a); };
        Real alpha = solve_monotone(h, a_out, a_in, nullptr, 1e-15);
        return {alpha, face};
    };
    const Real da = 2.0 * M_PI / M;
    auto [alpha_lo, face_lo] = refine(start * da, (start + 1) * da);
    auto [alpha_hi, face_hi] = refine((end + 1) * da, end * da);
    if (alpha_hi < alpha_lo) alpha_hi += 2.0 * M_PI;

    auto xi_of = [alpha_lo, alpha_hi](const Vec& u) -> Vec {
        const Real a = alpha_lo + u(0) * (alpha_hi - alpha_lo);
        return vec2(std::cos(a), std::sin(a));
    };
    attach_wulff_common(p, norm, w, y, r, xi_of);
    p.edges.push_back({0, 0, face_lo});
    p.edges.push_back({0, 1, face_hi});
    find_interior_point(p, w, y, r);
    return p;
}

Patch wulff_patch_surface(const NormSpec& norm, const Wedge& w, const Vec& y, Real r,
                          QuadratureSpec quad, const std::array<bool, 2>& cut) {
    Patch p;
    p.dim = 2;
    p.quad = quad;
    WulffGeometry g{&norm, y, r};
    const Vec ell = w.edge_basis().col(0);

    if (!cut[0] && !cut[1]) {
        Vec a = w.normal(1);
        Vec b = cross3(ell, a).normalized();
        Vec pole = ell;
        auto xi_of = [pole, a, b](const Vec& u) -> Vec {
            const Real th = M_PI * u(0), ph = 2.0 * M_PI * u(1);
            return std::cos(th) * pole + std::sin(th) * (std::cos(ph) * a + std::sin(ph) * b);
        };
        attach_wulff_common(p, norm, w, y, r, xi_of);
        p.periodic[1] = true;
        find_interior_point(p, w, y, r);
        return p;
    }

    if (cut[0] != cut[1]) {
        const int face = cut[0] ? 1 : 2;
        Vec axis = w.normal(face);
        Mat tb = tangent_basis(axis);
        Vec a = tb.col(0), b = tb.col(1);
        NormSpec owned = norm;
        Vec yl = y;
        Real rl = r;
        Vec nf = w.normal(face);
        auto xi_of = [owned, yl, rl, axis, a, b, nf](const Vec& u) -> Vec {
            const Real ph = 2.0 * M_PI * u(1);
            Vec v = std::cos(ph) * a + std::sin(ph) * b;
            WulffGeometry gg{&owned, yl, rl};
            const Real th0 = solve_face_theta(gg, axis, v, nf);
            const Real th = th0 + u(0) * (M_PI - th0);
            return std::cos(th) * axis + std::sin(th) * v;
        };
        attach_wulff_common(p, norm, w, y, r, xi_of);
        p.edges.push_back({0, 0, face});
        p.periodic[1] = true;
        find_interior_point(p, w, y, r);
        return p;
    }

    // Both faces cut: corner lune between the two face level curves.
    DualNorm dual(norm);
    auto fo_on_edge = [&](Real lam) { return dual.eval(Vec(lam * ell - y)); };
    Real bracket = y.norm() + 10.0 * r + 1.0;
    auto [lam_min, fo_min] = minimize_unimodal(fo_on_edge, -bracket, bracket, 1e-13);
    if (fo_min >= r - 1e-12)
        throw ChartFailure(
            "both faces cut but the wedge edge is not crossed (band topology unsupported)");
    Real lam_lo = lam_min - 1.0, lam_hi = lam_min + 1.0;
    while (fo_on_edge(lam_lo) < r) lam_lo -= std::max(1.0, r);
    while (fo_on_edge(lam_hi) < r) lam_hi += std::max(1.0, r);
    const Real lam_minus =
        solve_monotone([&](Real t) { return fo_on_edge(t) - r; }, lam_lo, lam_min, nullptr, 1e-15);
    const Real lam_plus =
        solve_monotone([&](Real t) { return fo_on_edge(t) - r; }, lam_min, lam_hi, nullptr, 1e-15);

    Vec x_minus = lam_minus * ell, x_plus = lam_plus * ell;
    Vec xi_minus = dual.support_direction(Vec(x_minus - y));
    Vec xi_plus = dual.support_direction(Vec(x_plus - y));

    // One boundary arc per face, each a polar graph over directions in the
    // face normal's orthogonal circle, swept corner to corner.
    struct Arc {
        Vec axis, a, b;
        Real alpha0, sweep;
        Vec n;
    };
    auto make_arc = [&](int face) -> Arc {
        Arc arc;
        arc.n = w.normal(face);
        arc.axis = arc.n;
        Vec wm = xi_minus - xi_minus.dot(arc.n) * arc.n;
        Vec wp = xi_plus - xi_plus.dot(arc.n) * arc.n;
        if (wm.norm() < 1e-9 || wp.norm() < 1e-9)
            throw ChartFailure("corner normal parallel to a face normal");
        arc.a = wm.normalized();
        arc.b = cross3(arc.n, arc.a).normalized();
        Vec wpn = wp.normalized();
        Real alpha_plus = std::atan2(wpn.dot(arc.b), wpn.dot(arc.a));
        Real ccw = alpha_plus <= 0.0 ? alpha_plus + 2.0 * M_PI : alpha_plus;
        arc.alpha0 = 0.0;

        const int other = 3 - face;
        auto curve_point = [&](Real sweep, Real t) {
            const Real al = t * sweep;
            Vec v = std::cos(al) * arc.a + std::sin(al) * arc.b;
            const Real th = solve_face_theta(g, arc.axis, v, arc.n);
            return Vec(std::cos(th) * arc.axis + std::sin(th) * v);
        };
        auto midpoint_ok = [&](Real sweep) {
            Vec xi = curve_point(sweep, 0.5);
            return y.dot(w.normal(other)) + r * norm.gradient(xi).dot(w.normal(other)) <= 1e-9;
        };
        const bool ccw_ok = midpoint_ok(ccw);
        const bool cw_ok = midpoint_ok(ccw - 2.0 * M_PI);
        if (ccw_ok == cw_ok)
            throw ChartFailure("cannot select the boundary arc between the corners");
        arc.sweep = ccw_ok ? ccw : ccw - 2.0 * M_PI;
        return arc;
    };
    Arc arc1 = make_arc(1);
    Arc arc2 = make_arc(2);

    NormSpec owned = norm;
    auto xi_of = [owned, y, r, arc1, arc2](const Vec& u) -> Vec {
        WulffGeometry gg{&owned, y, r};
        auto arc_point = [&](const Arc& arc, Real t) -> Vec {
            const Real al = t * arc.sweep;
            Vec v = std::cos(al) * arc.a + std::sin(al) * arc.b;
            const Real th = solve_face_theta(gg, arc.axis, v, arc.n);
            return Vec(std::cos(th) * arc.axis + std::sin(th) * v);
        };
        return slerp(arc_point(arc1, u(0)), arc_point(arc2, u(0)), u(1));
    };
    attach_wulff_common(p, norm, w, y, r, xi_of);
    p.edges.push_back({1, 0, 1});
    p.edges.push_back({1, 1, 2});
    p.corner_points = {x_minus, x_plus};
    p.corner_params = {vec2(0.0, 0.5), vec2(1.0, 0.5)};
    find_interior_point(p, w, y, r);
    return p;
}

}  // namespace

Patch wulff_patch(const NormSpec& norm, const Wedge& w, const Vec& y, Real r,
                  QuadratureSpec quad) {
    if (r <= 0.0) throw ConfigError("wulff_patch: radius must be positive");
    if (norm.ambient_dim() != w.ambient_dim())
        throw ConfigError("wulff_patch: norm and wedge dimension mismatch");

    std::array<bool, 2> cut{};
    for (int i = 0; i < 2; ++i) {
        const Vec& n = w.normal(i + 1);
        const Real lo = y.dot(n) - r * norm.value(-n);
        const Real hi = y.dot(n) + r * norm.value(n);
        if (lo >= 0.0)
            throw EmptyIntersection("Wulff shape lies outside the wedge half-space " +
                                    std::to_string(i + 1));
        cut[i] = hi > 1e-13;
    }
    Patch p = norm.ambient_dim() == 2 ? wulff_patch_curve(norm, w, y, r, quad, cut)
                                      : wulff_patch_surface(norm, w, y, r, quad, cut);
    validate_patch(p, w);
    return p;
}

// --- perturbation ------------------------------------------------------------

BumpSpec separable_sin2_bump(int dim, Real skew) {
    BumpSpec b;
    b.skew = skew;
    b.value = [dim, skew](const Vec& u) {
        Real v = 1.0;
        for (int i = 0; i < dim; ++i) {
            const Real s = std::sin(M_PI * u(i));
            v *= s * s;
        }
        if (skew != 0.0) v *= 1.0 + skew * std::sin(M_PI * u(0)) * (dim > 1 ? u(1) : 1.0);
        return v;
    };
    return b;
}

Patch perturb(const Patch& base, const BumpSpec& bump, Real eps) {
    Patch p;
    p.dim = base.dim;
    p.quad = base.quad;
    p.edges = base.edges;
    p.periodic = base.periodic;
    p.interior_point = base.interior_point;
    p.star_center = base.star_center;
    p.corner_points = base.corner_points;
    p.corner_params = base.corner_params;

    // Base evaluators, captured by value so the perturbed patch owns them.
    auto base_chart = base.chart;
    auto base_jac = [base](const Vec& u) { return patch_jacobian(base, u); };
    auto base_second = [base](const Vec& u) { return patch_second_jacobian(base, u); };
    auto base_nu = [base](const Vec& u) { return patch_normal(base, u); };

    const int dim = base.dim;
    auto bval = bump.value;
    FdSpec fd_b{1e-6, 1};
    auto db = [bval, dim, fd_b](const Vec& u) {
        Vec g(dim);
        for (int i = 0; i < dim; ++i)
            g(i) = fd_derivative(
                [&](Real t) {
                    Vec v = u;
                    v(i) = t;
                    return bval(v);
                },
                u(i), fd_b);
        return g;
    };
    auto d2b = [bval, dim](const Vec& u) {
        return fd_hessian([&](const Vec& v) { return bval(v); }, u, 1e-4, 1);
    };
    auto dnu = [base_nu, dim](const Vec& u) {
        Mat m(u.size() == 1 ? 2 : 3, dim);
        FdSpec fd{kChartFdStep, 1};
        for (int i = 0; i < dim; ++i) m.col(i) = fd_directional(base_nu, u, unit_param(dim, i), fd);
        return m;
    };
    auto d2nu = [base_nu, dim](const Vec& u, int i, int j) -> Vec {
        const Real h = kSecondFdStep;
        Vec ei = unit_param(dim, i), ej = unit_param(dim, j);
        if (i == j)
            return (base_nu(u + h * ei) - 2.0 * base_nu(u) + base_nu(u - h * ei)) / (h * h);
        return (base_nu(u + h * ei + h * ej) - base_nu(u + h * ei - h * ej) -
                base_nu(u - h * ei + h * ej) + base_nu(u - h * ei - h * ej)) /
               (4.0 * h * h);
    };

    p.chart = [base_chart, base_nu, bval, eps](const Vec& u) -> Vec {
        return base_chart(u) + eps * bval(u) * base_nu(u);
    };
    p.jacobian = [base_jac, base_nu, dnu, bval, db, eps](const Vec& u) -> Mat {
        return base_jac(u) + eps * (base_nu(u) * db(u).transpose() + bval(u) * dnu(u));
    };
    p.second_jacobian = [base_second, base_nu, dnu, d2nu, bval, db, d2b, eps,
                         dim](const Vec& u) -> Mat {
        Mat out = base_second(u);
        const Real b = bval(u);
        Vec g = db(u);
        Mat h = d2b(u);
        Vec nu = base_nu(u);
        Mat dn = dnu(u);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                const int c = second_col(dim, i, j);
                out.col(c) += eps * (h(i, j) * nu + g(i) * dn.col(j) + g(j) * dn.col(i) +
                                     b * d2nu(u, i, j));
            }
        return out;
    };
    p.normal_oracle = nullptr;

    // Fix orientation against the interior reference, then sweep for
    // immersion collapse.
    Vec u0 = dim == 1 ? Vec::Constant(1, 0.5) : vec2(0.5, 0.5);
    p.orient_sign = 1.0;
    SurfaceFrame f0 = frame_at(p, u0, false);
    if (f0.nu.dot(f0.x - p.interior_point) < 0.0) p.orient_sign = -1.0;

    PatchTable probe = build_patch_table(p, 0, false);
    for (const QuadNode& node : probe.nodes) {
        Eigen::JacobiSVD<Mat> svd(node.frame.J);
        if (svd.singularValues().minCoeff() < 1e-8 * svd.singularValues().maxCoeff())
            throw ImmersionLost("perturbation amplitude destroys the immersion");
        if (node.frame.nu.dot(node.frame.x - p.interior_point) <= 0.0)
            throw ImmersionLost("perturbation folds the surface through the reference point");
    }
    return p;
}

// --- planar polar graph ------------------------------------------------------

Patch polar_graph_patch(const Wedge& w, Real rho0, Real a, int m, QuadratureSpec quad) {
    if (w.ambient_dim() != 2) throw ConfigError("polar_graph_patch is a curve fixture");
    // Face half-line directions: on P_i, orthogonal to n_i, negative against
    // the other normal.
    auto face_dir = [&](int i) {
        Vec d = rot90(w.normal(i));
        if (d.dot(w.normal(3 - i)) > 0.0) d = -d;
        return d;
    };
    Vec d1 = face_dir(1), d2 = face_dir(2);
    Real a1 = std::atan2(d1(1), d1(0));
    Real a2 = std::atan2(d2(1), d2(0));
    // Sweep from a2 to a1 through the wedge interior.
    Vec mid = w.interior_direction();
    Real am = std::atan2(mid(1), mid(0));
    auto wrap = [](Real x) {
        while (x <= -M_PI) x += 2.0 * M_PI;
        while (x > M_PI) x -= 2.0 * M_PI;
        return x;
    };
    Real lo = am + wrap(a2 - am);
    Real hi = am + wrap(a1 - am);
    if (lo > hi) std::swap(lo, hi);

    Patch p;
    p.dim = 1;
    p.quad = quad;
    auto rho = [rho0, a, m](Real al) { return rho0 * (1.0 + a * std::cos(m * al)); };
    p.chart = [rho, lo, hi](const Vec& u) -> Vec {
        const Real al = lo + u(0) * (hi - lo);
        return rho(al) * vec2(std::cos(al), std::sin(al));
    };
    p.orient_sign = 1.0;
    p.interior_point = 0.4 * rho(0.5 * (lo + hi)) * vec2(std::cos(0.5 * (lo + hi)),
                                                         std::sin(0.5 * (lo + hi)));
    p.star_center = Vec::Zero(2);
    {
        SurfaceFrame f0 = frame_at(p, Vec::Constant(1, 0.5), false);
        if (f0.nu.dot(f0.x - p.interior_point) < 0.0) p.orient_sign = -1.0;
    }
    // Which face meets which endpoint.
    Vec x_lo = p.chart(Vec::Constant(1, 0.0));
    const int face_lo = std::abs(x_lo.dot(w.normal(1))) < std::abs(x_lo.dot(w.normal(2))) ? 1 : 2;
    p.edges.push_back({0, 0, face_lo});
    p.edges.push_back({0, 1, 3 - face_lo});

    Vec n1 = w.normal(1), n2 = w.normal(2);
    p.membership = [rho, n1, n2](const Vec& x) {
        if (x.dot(n1) >= 0.0 || x.dot(n2) >= 0.0) return false;
        return x.norm() < rho(std::atan2(x(1), x(0)));
    };
    validate_patch(p, w);
    return p;
}

// --- measured quantities -----------------------------------------------------

CapillaryField capillary_angle(const Patch& p, const NormSpec& norm, const Wedge& w, int face,
                               int level, Real const_tol) {
    bool tagged = false;
    for (const EdgeTag& tag : p.edges) tagged |= (tag.face == face);
    if (!tagged) throw UntaggedEdge("edge for face " + std::to_string(face) + " is not tagged");

    PatchTable table = build_patch_table(p, level, false);
    const Vec& n = w.normal(face);
    CapillaryField out;
    out.face = face;
    KahanSum wsum, wosum;
    out.max_value = -std::numeric_limits<Real>::infinity();
    for (const EdgeNode& node : table.edges.at(face)) {
        const Real omega = norm.gradient(node.nu).dot(n);
        out.values.push_back(omega);
        wsum.add(node.weight * node.speed);
        wosum.add(node.weight * node.speed * omega);
        out.max_value = std::max(out.max_value, omega);
    }
    out.mean = wosum.value() / std::max(wsum.value(), 1e-300);
    for (Real v : out.values)
        out.max_deviation = std::max(out.max_deviation, std::abs(v - out.mean));
    out.constant = out.max_deviation <= const_tol;
    return out;
}

Real anisotropic_area(const Patch& p, const NormSpec& norm, int level) {
    PatchTable table = build_patch_table(p, level, false);
    return integrate(table,
                     [&](const QuadNode& n) { return norm.value(n.frame.nu); });
}

Real enclosed_volume(const Patch& p, const Wedge& w, int level) {
    // Closure: every non-periodic box edge must be tagged or degenerate.
    const QuadratureSpec q = p.quad.at_level(0);
    (void)q;
    for (int axis = 0; axis < p.dim; ++axis) {
        if (p.periodic[axis]) continue;
        for (int side = 0; side < 2; ++side) {
            bool tagged = false;
            for (const EdgeTag& tag : p.edges)
                tagged |= (tag.axis == axis && tag.side == side);
            if (tagged) continue;
            // Degenerate (zero-length) edges are fine; anything else is open.
            Real len = 0.0;
            if (p.dim == 1) {
                len = 1.0;  // endpoints of a curve are never degenerate
            } else {
                const int free_axis = 1 - axis;
                for (Real t : {0.2, 0.5, 0.8}) {
                    Vec u(2);
                    u(axis) = Real(side);
                    u(free_axis) = t;
                    len += patch_jacobian(p, u).col(free_axis).norm();
                }
            }
            if (len > 1e-7) throw OpenSurface("untagged non-degenerate boundary edge");
        }
    }
    // Tag residuals.
    PatchTable table = build_patch_table(p, level, false);
    for (const auto& [face, nodes] : table.edges)
        for (const EdgeNode& node : nodes)
            if (std::abs(node.x.dot(w.normal(face))) > 1e-8)
                throw OpenSurface("tagged edge leaves its wedge face");

    const Real n1 = static_cast<Real>(p.dim) + 1.0;
    return integrate(table, [&](const QuadNode& n) { return n.frame.x.dot(n.frame.nu); }) / n1;
}

Real wetted_area(const Patch& p, const Wedge& w, int face, int level) {
    bool tagged = false;
    EdgeTag the_tag{};
    for (const EdgeTag& tag : p.edges)
        if (tag.face == face) {
            tagged = true;
            the_tag = tag;
        }
    if (!tagged) return 0.0;

    const Vec& ni = w.normal(face);
    const Vec& nj = w.normal(3 - face);
    Vec q = nj - nj.dot(ni) * ni;
    Vec pi_dir = -q.normalized();  // into the face: <pi, n_other> < 0

    if (p.dim == 1) {
        Vec u(1);
        u << Real(the_tag.side);
        const Real b = p.chart(u).dot(pi_dir);
        if (b < -1e-9) throw WettedRegionUnbounded("curve endpoint not on the face half-line");
        return std::abs(b);
    }

    const Vec ell = w.edge_basis().col(0);
    PatchTable table = build_patch_table(p, level, false);
    const auto& nodes = table.edges.at(face);
    // Green's theorem in (a, b) = (<x, l>, <x, pi>) coordinates; the closing
    // segment along L has b = 0 and contributes nothing.
    KahanSum area;
    for (const EdgeNode& node : nodes) {
        const Real a = node.x.dot(ell), b = node.x.dot(pi_dir);
        const Real da = node.tangent.dot(ell), db = node.tangent.dot(pi_dir);
        area.add(0.5 * node.weight * (a * db - b * da));
    }
    const Real val = std::abs(area.value());

    // Open edge curves must close against L.
    const int free_axis = 1 - the_tag.axis;
    if (!p.periodic[free_axis]) {
        for (Real t : {0.0, 1.0}) {
            Vec u(2);
            u(the_tag.axis) = Real(the_tag.side);
            u(free_axis) = t;
            if (std::abs(p.chart(u).dot(pi_dir)) > 1e-7)
                throw WettedRegionUnbounded("edge curve does not close against the wedge edge");
        }
    }
    return val;
}

void validate_patch(const Patch& p, const Wedge& w, Real rank_tol, Real boundary_tol) {
    PatchTable table = build_patch_table(p, 0, false);
    for (const QuadNode& node : table.nodes) {
        Eigen::JacobiSVD<Mat> svd(node.frame.J);
        if (svd.singularValues().minCoeff() <= rank_tol * std::max(1.0, svd.singularValues().maxCoeff()))
            throw ImmersionLost("chart is not an immersion at a quadrature node");
        if (node.frame.nu.dot(node.frame.x - p.interior_point) <= 0.0)
            throw ChartFailure("normal does not point away from the interior reference point");
        for (int i = 1; i <= 2; ++i)
            if (node.frame.x.dot(w.normal(i)) > 1e-8)
                throw ChartFailure("surface node escapes the wedge");
    }
    for (const auto& [face, nodes] : table.edges)
        for (const EdgeNode& node : nodes)
            if (std::abs(node.x.dot(w.normal(face))) > boundary_tol)
                throw ChartFailure("tagged edge misses its face (residual " +
                                   std::to_string(std::abs(node.x.dot(w.normal(face)))) + ")");
}

Real ray_cast_radius(const Patch& p, const Vec& center, const Vec& dir) {
    const int dim = p.dim;
    Mat qbasis = tangent_basis(dir);  // directions orthogonal to the ray

    auto mismatch = [&](const Vec& u) -> Vec {
        Vec rel = p.chart(u) - center;
        return qbasis.transpose() * rel;
    };

    // Coarse seed, then Newton on the orthogonal components.
    Vec best_u;
    Real best_score = -2.0;
    const int grid = dim == 1 ? 129 : 33;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < (dim == 1 ? 1 : grid); ++j) {
            Vec u(dim);
            u(0) = Real(i) / (grid - 1);
            if (dim == 2) u(1) = Real(j) / (grid - 1);
            Vec rel = p.chart(u) - center;
            const Real score = rel.normalized().dot(dir);
            if (score > best_score) {
                best_score = score;
                best_u = u;
            }
        }
    }
    Vec u = best_u;
    for (int it = 0; it < 60; ++it) {
        Vec f = mismatch(u);
        if (f.norm() < 1e-13) break;
        Mat J = qbasis.transpose() * patch_jacobian(p, u);
        Vec du = J.colPivHouseholderQr().solve(-f);
        Real shrink = 1.0;
        while (shrink > 1e-4 && mismatch(u + shrink * du).norm() >= f.norm()) shrink *= 0.5;
        u += shrink * du;
    }
    Vec rel = p.chart(u) - center;
    if (rel.normalized().dot(dir) < 1.0 - 1e-8)
        throw OptimizerNotConverged("ray cast failed to align with the requested direction");
    return rel.norm();
}

}  // namespace aniso
