#include "aniso/oracle.hpp"

#include "aniso/numerics.hpp"

#include <cmath>

namespace aniso {

namespace {

// Angular window of the curve inside the sector, found by bisecting
// <X(theta), n_i> around the deep direction of the wedge.
std::pair<Real, Real> sector_window(const Wedge& w, const std::function<Vec(Real)>& point) {
    auto inside = [&](Real th) {
        Vec x = point(th);
        return x.dot(w.normal(1)) <= 1e-13 && x.dot(w.normal(2)) <= 1e-13;
    };
    Vec mid_dir = w.interior_direction();
    const Real mid = std::atan2(mid_dir(1), mid_dir(0));
    if (!inside(mid))
        throw EmptyIntersection("oracle curve does not pass through the sector interior");
    const int steps = 8192;
    Real lo = mid, hi = mid;
    while (inside(lo - 2.0 * M_PI / steps) && mid - lo < 2.0 * M_PI) lo -= 2.0 * M_PI / steps;
    while (inside(hi + 2.0 * M_PI / steps) && hi - mid < 2.0 * M_PI) hi += 2.0 * M_PI / steps;

    auto active_gap = [&](Real th) {
        Vec x = point(th);
        const Real g1 = x.dot(w.normal(1)), g2 = x.dot(w.normal(2));
        return std::max(g1, g2);
    };
    const Real lo_ref = solve_monotone(active_gap, lo - 2.0 * M_PI / steps, lo, nullptr, 1e-15);
    const Real hi_ref = solve_monotone(active_gap, hi, hi + 2.0 * M_PI / steps, nullptr, 1e-15);
    return {lo_ref, hi_ref};
}

}  // namespace

CurveScenario oracle_circle_sector(const Wedge& w, const NormSpec& norm, const Vec& center,
                                   Real r) {
    if (w.ambient_dim() != 2) throw ConfigError("oracle scenarios are planar");
    CurveScenario cs;
    cs.name = "oracle_circle";
    cs.norm = norm;
    cs.wedge = w;
    // The shifted norm translates the Wulff circle by minus its shift.
    Vec c = center - r * norm.shift();
    cs.point = [c, r](Real th) { return Vec(c + r * vec2(std::cos(th), std::sin(th))); };
    cs.tangent = [r](Real th) { return Vec(r * vec2(-std::sin(th), std::cos(th))); };
    cs.normal = [](Real th) { return vec2(std::cos(th), std::sin(th)); };
    cs.curvature = [r](Real) { return 1.0 / r; };
    cs.aniso_form = [](Real) { return 1.0; };  // identity form for |x| - <k0, x>
    auto [t0, t1] = sector_window(w, cs.point);
    cs.theta0 = t0;
    cs.theta1 = t1;
    cs.k = Vec::Zero(2);
    Vec n1 = w.normal(1), n2 = w.normal(2);
    cs.membership = [c, r, n1, n2](const Vec& x) {
        if (x.dot(n1) >= 0.0 || x.dot(n2) >= 0.0) return false;
        return (x - c).norm() < r;
    };
    cs.box_lo = c - vec2(r, r);
    cs.box_hi = c + vec2(r, r);
    return cs;
}

CurveScenario oracle_ellipse_sector(const Wedge& w, const Mat& A, const Vec& center, Real r) {
    if (w.ambient_dim() != 2) throw ConfigError("oracle scenarios are planar");
    if (std::abs(A(0, 1)) > 0.0 || std::abs(A(1, 0)) > 0.0)
        throw ConfigError("oracle ellipse expects a diagonal ellipsoidal matrix");
    CurveScenario cs;
    cs.name = "oracle_ellipse";
    cs.norm = NormSpec::ellipsoidal(A);
    cs.wedge = w;
    const Real a = r * std::sqrt(A(0, 0));
    const Real b = r * std::sqrt(A(1, 1));
    Vec c = center;
    cs.point = [c, a, b](Real th) { return Vec(c + vec2(a * std::cos(th), b * std::sin(th))); };
    cs.tangent = [a, b](Real th) { return vec2(-a * std::sin(th), b * std::cos(th)); };
    cs.normal = [a, b](Real th) {
        return Vec(vec2(b * std::cos(th), a * std::sin(th)).normalized());
    };
    cs.curvature = [a, b](Real th) {
        const Real wsq = b * b * std::cos(th) * std::cos(th) + a * a * std::sin(th) * std::sin(th);
        return a * b / std::pow(wsq, 1.5);
    };
    Mat Acopy = A;
    cs.aniso_form = [Acopy, a, b](Real th) {
        // closed-form tangential Hessian form of sqrt(x^T A x) at nu(theta)
        Vec nu = vec2(b * std::cos(th), a * std::sin(th)).normalized();
        Vec t = rot90(nu);
        const Real v = std::sqrt(nu.dot(Acopy * nu));
        const Real tat = t.dot(Acopy * t);
        const Real tan_ = t.dot(Acopy * nu);
        return tat / v - tan_ * tan_ / (v * v * v);
    };
    auto [t0, t1] = sector_window(w, cs.point);
    cs.theta0 = t0;
    cs.theta1 = t1;
    cs.k = Vec::Zero(2);
    Vec n1 = w.normal(1), n2 = w.normal(2);
    cs.membership = [c, a, b, n1, n2](const Vec& x) {
        if (x.dot(n1) >= 0.0 || x.dot(n2) >= 0.0) return false;
        Vec rel = x - c;
        return rel(0) * rel(0) / (a * a) + rel(1) * rel(1) / (b * b) < 1.0;
    };
    cs.box_lo = c - vec2(a, b);
    cs.box_hi = c + vec2(a, b);
    return cs;
}

CurveScenario oracle_polar_sector(const Wedge& w, Real rho0, Real a, int m) {
    if (w.ambient_dim() != 2) throw ConfigError("oracle scenarios are planar");
    CurveScenario cs;
    cs.name = "oracle_polar";
    cs.norm = NormSpec::isotropic(2);
    cs.wedge = w;
    auto rho = [rho0, a, m](Real th) { return rho0 * (1.0 + a * std::cos(m * th)); };
    auto drho = [rho0, a, m](Real th) { return -rho0 * a * m * std::sin(m * th); };
    auto ddrho = [rho0, a, m](Real th) { return -rho0 * a * m * m * std::cos(m * th); };
    cs.point = [rho](Real th) { return Vec(rho(th) * vec2(std::cos(th), std::sin(th))); };
    cs.tangent = [rho, drho](Real th) {
        Vec er = vec2(std::cos(th), std::sin(th));
        Vec et = rot90(er);
        return Vec(drho(th) * er + rho(th) * et);
    };
    cs.normal = [rho, drho](Real th) {
        Vec er = vec2(std::cos(th), std::sin(th));
        Vec et = rot90(er);
        return Vec((rho(th) * er - drho(th) * et).normalized());
    };
    cs.curvature = [rho, drho, ddrho](Real th) {
        const Real r = rho(th), r1 = drho(th), r2 = ddrho(th);
        return (r * r + 2.0 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
    };
    cs.aniso_form = [](Real) { return 1.0; };
    auto [t0, t1] = sector_window(w, cs.point);
    cs.theta0 = t0;
    cs.theta1 = t1;
    cs.k = Vec::Zero(2);
    Vec n1 = w.normal(1), n2 = w.normal(2);
    cs.membership = [rho, n1, n2](const Vec& x) {
        if (x.dot(n1) >= 0.0 || x.dot(n2) >= 0.0) return false;
        return x.norm() < rho(std::atan2(x(1), x(0)));
    };
    const Real rmax = rho0 * (1.0 + std::abs(a));
    cs.box_lo = vec2(-rmax, -rmax);
    cs.box_hi = vec2(rmax, rmax);
    return cs;
}

Real arc_integral(const CurveScenario& cs, const std::function<Real(Real)>& f, Real tol) {
    return adaptive_simpson([&](Real th) { return f(th) * cs.tangent(th).norm(); }, cs.theta0,
                            cs.theta1, tol);
}

OracleIdentity curve_minkowski(const CurveScenario& cs) {
    OracleIdentity out;
    out.lhs = arc_integral(cs, [&](Real th) {
        Vec nu = cs.normal(th);
        return cs.norm.value(nu) - cs.k.dot(nu);
    });
    out.rhs = arc_integral(cs, [&](Real th) {
        const Real kappa_f = cs.aniso_form(th) * cs.curvature(th);
        return kappa_f * cs.point(th).dot(cs.normal(th));
    });
    return out;
}

Real curve_enclosed_area(const CurveScenario& cs) {
    // Green's theorem; the sector sides pass through the corner and drop out.
    const Real green = adaptive_simpson(
        [&](Real th) {
            Vec x = cs.point(th);
            Vec t = cs.tangent(th);
            return x(0) * t(1) - x(1) * t(0);
        },
        cs.theta0, cs.theta1, 1e-13);
    return 0.5 * std::abs(green);
}

OracleHk curve_hk(const CurveScenario& cs) {
    OracleHk out;
    out.lhs = arc_integral(cs, [&](Real th) {
        Vec nu = cs.normal(th);
        const Real kappa_f = cs.aniso_form(th) * cs.curvature(th);
        return (cs.norm.value(nu) - cs.k.dot(nu)) / kappa_f;
    });
    out.area = curve_enclosed_area(cs);
    out.rhs = 2.0 * out.area;
    return out;
}

McResult mc_volume(const std::function<bool(const Vec&)>& member, const Vec& box_lo,
                   const Vec& box_hi, long samples, std::uint64_t seed) {
    Rng rng(seed);
    const int d = static_cast<int>(box_lo.size());
    Real box = 1.0;
    for (int i = 0; i < d; ++i) box *= box_hi(i) - box_lo(i);
    long hits = 0;
    Vec x(d);
    for (long i = 0; i < samples; ++i) {
        for (int j = 0; j < d; ++j) x(j) = rng.uniform(box_lo(j), box_hi(j));
        if (member(x)) ++hits;
    }
    McResult out;
    const Real p = static_cast<Real>(hits) / samples;
    out.estimate = box * p;
    out.stderr_value = box * std::sqrt(std::max(p * (1.0 - p), 1e-300) / samples);
    return out;
}

Report oracle_suite(const CurveScenario& cs, long mc_samples, std::uint64_t seed) {
    Report rep;
    rep.suite = "oracle:" + cs.name;

    OracleIdentity mink = curve_minkowski(cs);
    CheckRecord m = identity_check("curve_minkowski", mink.lhs, mink.rhs, 1e-10);
    rep.add(m);

    OracleHk hk = curve_hk(cs);
    rep.add(bound_check("curve_hk_gap_nonnegative", -hk.gap(), 0.0,
                        1e-10 * std::max(1.0, hk.rhs)));

    McResult mc = mc_volume(cs.membership, cs.box_lo, cs.box_hi, mc_samples, seed);
    CheckRecord mcr;
    mcr.name = "mc_area_agreement";
    mcr.lhs = mc.estimate;
    mcr.rhs = hk.area;
    mcr.residual_abs = std::abs(mc.estimate - hk.area);
    mcr.residual_rel = mcr.residual_abs / std::max(1.0, std::abs(hk.area));
    mcr.verdict =
        mcr.residual_abs <= 3.0 * mc.stderr_value ? Verdict::Pass : Verdict::Fail;
    mcr.note = "3 sigma = " + std::to_string(3.0 * mc.stderr_value);
    rep.add(mcr);
    return rep;
}

}  // namespace aniso
