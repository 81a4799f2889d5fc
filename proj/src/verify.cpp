#include "aniso/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace aniso {

namespace {

std::map<std::string, Real Tolerances::*> tolerance_fields() {
    return {{"identity_rel", &Tolerances::identity_rel},
            {"cap_tol", &Tolerances::cap_tol},
            {"flux_tol", &Tolerances::flux_tol},
            {"hk_eq_rel", &Tolerances::hk_eq_rel},
            {"hk_gap_rel", &Tolerances::hk_gap_rel},
            {"umbilicity", &Tolerances::umbilicity},
            {"const_tol", &Tolerances::const_tol},
            {"geo_tol", &Tolerances::geo_tol},
            {"fit_tol", &Tolerances::fit_tol},
            {"fit_rms_pass", &Tolerances::fit_rms_pass},
            {"fit_rms_fail", &Tolerances::fit_rms_fail},
            {"mono_tol", &Tolerances::mono_tol},
            {"fv_rel", &Tolerances::fv_rel}};
}

}  // namespace

Real Tolerances::get(const std::string& key) const {
    auto fields = tolerance_fields();
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown tolerance key '" + key + "'", "/tolerances/" + key);
    return this->*(it->second);
}

void Tolerances::set(const std::string& key, Real value) {
    auto fields = tolerance_fields();
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown tolerance key '" + key + "'", "/tolerances/" + key);
    this->*(it->second) = value;
}

void VerificationScenario::validate() const {
    if (norm.ambient_dim() != wedge.ambient_dim() || norm.ambient_dim() != patch.ambient_dim())
        throw ConfigError("scenario dimensions are inconsistent");
    if (k) {
        for (int i = 0; i < 2; ++i)
            if (std::abs(k->dot(wedge.normal(i + 1)) - omega0[i]) > 1e-10)
                throw ConfigError("k does not reproduce omega0 against wedge normal " +
                                  std::to_string(i + 1));
    }
    if (levels < 2) throw ConfigError("refinement study needs at least 2 levels");
}

Vec VerificationScenario::k_or_zero() const {
    return k ? *k : Vec(Vec::Zero(norm.ambient_dim()));
}

NormSpec VerificationScenario::effective_free_norm() const {
    if (!k || k->norm() == 0.0) return norm;
    return shift_norm(norm, *k);
}

namespace {

struct LevelData {
    PatchTable table;
    std::vector<CurvedNode> curved;
};

LevelData curved_level(const VerificationScenario& s, int level) {
    LevelData d;
    d.table = build_patch_table(s.patch, level, true);
    d.curved = curvature_table(s.norm, s.patch, d.table);
    return d;
}

Real integrate_curved(const std::vector<CurvedNode>& nodes,
                      const std::function<Real(const CurvedNode&)>& f) {
    KahanSum sum;
    for (const CurvedNode& n : nodes) sum.add(n.node.weight * n.node.frame.area_element * f(n));
    return sum.value();
}

// Capillary precondition: constant contact angle equal to omega0 on every
// tagged face.
void require_capillary(const VerificationScenario& s, Real tol) {
    for (const EdgeTag& tag : s.patch.edges) {
        CapillaryField cf = capillary_angle(s.patch, s.norm, s.wedge, tag.face, 0, tol);
        if (!cf.constant || std::abs(cf.mean - s.omega0[tag.face - 1]) > tol)
            throw CapillaryViolation("face " + std::to_string(tag.face) +
                                     ": contact angle deviates from omega0 (mean " +
                                     std::to_string(cf.mean) + ", spread " +
                                     std::to_string(cf.max_deviation) + ")");
    }
}

Vec mid_param(int dim) { return dim == 1 ? Vec(Vec::Constant(1, 0.5)) : vec2(0.5, 0.5); }

// Parameter-box sides that carry no edge tag and are not periodic are
// degenerate corners (poles, lune tips); curvature evaluation there runs
// into a collapsing tangent frame, so evaluation points are nudged inward.
Vec clamp_degenerate_corners(const Patch& p, Vec u, Real margin = 1e-2) {
    for (int a = 0; a < p.dim; ++a) {
        if (p.periodic[a]) continue;
        for (int side = 0; side < 2; ++side) {
            bool tagged = false;
            for (const EdgeTag& tag : p.edges)
                tagged |= (tag.axis == a && tag.side == side);
            if (tagged) continue;
            if (side == 0)
                u(a) = std::max(u(a), margin);
            else
                u(a) = std::min(u(a), 1.0 - margin);
        }
    }
    return u;
}

}  // namespace

Real energy(const VerificationScenario& s, int level) {
    Real e = anisotropic_area(s.patch, s.norm, level);
    for (const EdgeTag& tag : s.patch.edges)
        e += s.omega0[tag.face - 1] * wetted_area(s.patch, s.wedge, tag.face, level);
    return e;
}

Report first_variation_check(const VerificationScenario& s, const BumpSpec& bump, Real step) {
    Report rep;
    rep.suite = "first_variation";
    const int level = s.levels - 1;

    LevelData d = curved_level(s, level);
    const Real analytic = s.surface_dim() * integrate_curved(d.curved, [&](const CurvedNode& n) {
        return n.cd.H[1] * bump.value(n.node.frame.u);
    });

    auto e_at = [&](Real eps) {
        VerificationScenario pert = s;
        pert.patch = perturb(s.patch, bump, eps);
        return energy(pert, level);
    };
    auto slope_at = [&](Real h) { return (e_at(h) - e_at(-h)) / (2.0 * h); };
    const Real s1 = slope_at(step);
    const Real s2 = slope_at(0.5 * step);
    const Real s3 = slope_at(0.25 * step);

    const Real d12 = s1 - s2, d23 = s2 - s3;
    const Real noise = 1e-9 * (std::abs(s1) + 1.0);
    if (std::abs(d12) > 100.0 * noise && std::abs(d23) > noise) {
        const Real ratio = d12 / d23;
        if (ratio < 1.5 || ratio > 16.0)
            throw StepTooLarge("first-variation differences are not in the h^2 regime (ratio " +
                               std::to_string(ratio) + ")");
    }
    const Real richardson = (4.0 * s2 - s1) / 3.0;

    CheckRecord rec =
        identity_check("first_variation_interior", richardson, analytic, s.tol.fv_rel);
    std::ostringstream note;
    note << "slopes " << s1 << " " << s2 << " " << s3;
    rec.note = note.str();
    rep.add(rec);
    return rep;
}

Report minkowski_residual(const VerificationScenario& s, int r) {
    if (r < 1 || r > s.surface_dim()) throw ConfigError("minkowski order r out of range");
    Report rep;
    rep.suite = "minkowski";
    const Vec k = s.k_or_zero();

    std::string precondition;
    try {
        require_capillary(s, s.tol.cap_tol);
    } catch (const CapillaryViolation& err) {
        precondition = err.what();
    }

    std::vector<Real> lhs, rhs;
    for (int level = 0; level < s.levels; ++level) {
        LevelData d = curved_level(s, level);
        lhs.push_back(integrate_curved(d.curved, [&](const CurvedNode& n) {
            return n.cd.H[r - 1] * (n.F_nu - k.dot(n.node.frame.nu));
        }));
        rhs.push_back(integrate_curved(d.curved, [&](const CurvedNode& n) {
            return n.cd.H[r] * n.node.frame.x.dot(n.node.frame.nu);
        }));
    }
    // The floor is set by the derivative oracles behind the curvature
    // pipeline, not by quadrature roundoff.
    CheckRecord rec =
        convergence_check("minkowski_r" + std::to_string(r), lhs, rhs, s.tol.identity_rel, 1e-9);
    if (!precondition.empty()) {
        // The identity is only asserted under the capillary hypothesis; the
        // residual stays on record but cannot be judged.
        rec.verdict = Verdict::Inconclusive;
        rec.note = precondition;
    }
    rep.add(rec);
    return rep;
}

Report flux_vanishing_check(const VerificationScenario& s) {
    Report rep;
    rep.suite = "flux";
    const Vec k = s.k_or_zero();
    PatchTable table = build_patch_table(s.patch, std::min(1, s.levels - 1), false);
    if (table.edges.empty()) throw UntaggedEdge("flux check needs tagged boundary edges");

    for (const auto& [face, nodes] : table.edges) {
        Real worst = 0.0;
        for (const EdgeNode& node : nodes) {
            Vec nuF = s.norm.gradient(node.nu);
            Vec field = (nuF - k).dot(node.nu) * node.x - node.x.dot(node.nu) * (nuF - k);
            BoundaryFrame frame =
                boundary_frame(s.wedge, node.nu, face == 1 ? Stratum::P1 : Stratum::P2);
            worst = std::max(worst, std::abs(field.dot(*frame.mu[face - 1])));
        }
        rep.add(bound_check("flux_face" + std::to_string(face), worst, 0.0, s.tol.flux_tol));
    }
    return rep;
}

Report hk_check(const VerificationScenario& s, std::optional<bool> expect_equality) {
    Report rep;
    rep.suite = "hk";
    const Vec k = s.k_or_zero();
    const bool expect_eq = expect_equality.value_or(s.is_wulff);
    const int n1 = s.surface_dim() + 1;

    for (const EdgeTag& tag : s.patch.edges) {
        CapillaryField cf = capillary_angle(s.patch, s.norm, s.wedge, tag.face, 0, s.tol.cap_tol);
        if (cf.max_value > s.omega0[tag.face - 1] + s.tol.cap_tol)
            throw CapillarySignViolation("face " + std::to_string(tag.face) +
                                         ": contact angle exceeds omega0 (max " +
                                         std::to_string(cf.max_value) + ")");
    }

    std::vector<Real> lhs, rhs;
    Real umbilicity = 0.0;
    for (int level = 0; level < s.levels; ++level) {
        LevelData d = curved_level(s, level);
        int bad = 0;
        Real min_h = 1e300;
        for (const CurvedNode& n : d.curved) {
            min_h = std::min(min_h, n.cd.H[1]);
            if (n.cd.H[1] <= 0.0) ++bad;
        }
        if (bad > 0)
            throw NotMeanConvex(std::to_string(bad) + " nodes with H <= 0 at level " +
                                std::to_string(level) + " (min H = " + std::to_string(min_h) +
                                ")");
        lhs.push_back(integrate_curved(d.curved, [&](const CurvedNode& n) {
            return (n.F_nu - k.dot(n.node.frame.nu)) / n.cd.H[1];
        }));
        rhs.push_back(n1 * enclosed_volume(s.patch, s.wedge, level));
        if (level == s.levels - 1)
            for (const CurvedNode& n : d.curved)
                for (int i = 0; i < n.cd.kappa.size(); ++i)
                    umbilicity = std::max(umbilicity, std::abs(n.cd.kappa(i) - n.cd.H[1]));
    }
    const Real gap = lhs.back() - rhs.back();
    const Real scale = std::max(std::abs(rhs.back()), 1e-30);

    CheckRecord nonneg = bound_check("hk_gap_nonnegative", -gap, 0.0, 1e-8 * scale);
    nonneg.lhs = lhs.back();
    nonneg.rhs = rhs.back();
    rep.add(nonneg);

    CheckRecord umb;
    umb.name = "hk_umbilicity";
    umb.lhs = umbilicity;
    umb.residual_abs = umbilicity;
    umb.residual_rel = umbilicity;
    umb.verdict = umbilicity <= s.tol.umbilicity ? Verdict::Pass : Verdict::Fail;
    umb.expected_fail = !expect_eq && s.surface_dim() >= 2;  // vacuous for curves

    if (expect_eq) {
        CheckRecord eq = convergence_check("hk_equality", lhs, rhs, s.tol.hk_eq_rel, 1e-9);
        if (umbilicity > s.tol.umbilicity) {
            eq.verdict = Verdict::Fail;
            eq.note =
                "gap small but umbilicity " + std::to_string(umbilicity) + " above tolerance";
        }
        rep.add(eq);
    } else {
        CheckRecord strict;
        strict.name = "hk_strict_gap";
        strict.lhs = lhs.back();
        strict.rhs = rhs.back();
        strict.residual_abs = gap;
        strict.residual_rel = gap / scale;
        strict.verdict = gap >= s.tol.hk_gap_rel * scale ? Verdict::Pass : Verdict::Fail;
        rep.add(strict);
    }
    rep.add(umb);
    return rep;
}

Report fbar_reduction_check(const VerificationScenario& s) {
    Report rep;
    rep.suite = "fbar_reduction";
    NormSpec barred = s.effective_free_norm();
    const Vec k = s.k_or_zero();

    const int level = std::min(1, s.levels - 1);
    PatchTable table = build_patch_table(s.patch, level, true);
    Real worst = 0.0;
    for (const QuadNode& node : table.nodes) {
        CurvatureData cd_f = anisotropic_shape(s.norm, node.frame);
        CurvatureData cd_b = anisotropic_shape(barred, node.frame);
        const Real int_f = (s.norm.value(node.frame.nu) - k.dot(node.frame.nu)) / cd_f.H[1];
        const Real int_b = barred.value(node.frame.nu) / cd_b.H[1];
        worst = std::max(worst, std::abs(int_f - int_b) / std::max(1.0, std::abs(int_f)));
    }
    rep.add(bound_check("fbar_integrand_agreement", worst, 0.0, 1e-10));

    Report hk_f = hk_check(s);
    VerificationScenario sb = s;
    sb.norm = barred;
    sb.k.reset();
    sb.omega0 = {0.0, 0.0};
    Report hk_b = hk_check(sb, s.is_wulff);
    CheckRecord verdicts;
    verdicts.name = "fbar_verdict_agreement";
    verdicts.verdict = hk_f.verdict() == hk_b.verdict() ? Verdict::Pass : Verdict::Fail;
    verdicts.note = std::string("capillary ") + to_string(hk_f.verdict()) + ", free " +
                    to_string(hk_b.verdict());
    rep.add(verdicts);
    return rep;
}

Report flow_law_check(const VerificationScenario& s, const std::vector<Real>& offsets) {
    Report rep;
    rep.suite = "flow";
    const Vec k = s.k_or_zero();

    for (Real t : offsets) {
        Patch flowed = parallel_flow(s.norm, s.patch, t, k, &s.wedge);
        // Strip the ridden-along oracle so everything is recomputed from the
        // flowed chart itself.
        Patch generic = flowed;
        generic.normal_oracle = nullptr;
        generic.second_jacobian = nullptr;
        {
            Vec um = mid_param(s.surface_dim());
            SurfaceFrame probe = frame_at(generic, um, false);
            generic.orient_sign = probe.nu.dot(patch_normal(flowed, um)) > 0 ? 1.0 : -1.0;
        }

        // Sample away from degenerate chart corners, where the vanishing
        // parameterization inflates finite-difference conditioning.
        Real worst_law = 0.0, worst_normal = 0.0;
        std::vector<Vec> params;
        if (s.surface_dim() == 1) {
            for (int i = 0; i < 128; ++i)
                params.push_back(Vec::Constant(1, 0.05 + 0.9 * (i + 0.5) / 128.0));
        } else {
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j)
                    params.push_back(
                        vec2(0.08 + 0.84 * (i + 0.5) / 12.0, 0.08 + 0.84 * (j + 0.5) / 12.0));
        }
        for (const Vec& u : params) {
            CurvatureData base = anisotropic_shape(s.norm, s.patch, u);
            CurvatureData after = anisotropic_shape(s.norm, generic, u);
            for (int i = 0; i < base.kappa.size(); ++i) {
                const Real expected = base.kappa(i) / (1.0 + t * base.kappa(i));
                worst_law = std::max(worst_law, std::abs(after.kappa(i) - expected));
            }
            worst_normal = std::max(
                worst_normal, (patch_normal(generic, u) - patch_normal(s.patch, u)).norm());
        }
        std::ostringstream suffix;
        suffix << "_t" << t;
        rep.add(bound_check("flow_curvature_law" + suffix.str(), worst_law, 0.0, 1e-6));
        rep.add(bound_check("flow_normal_preserved" + suffix.str(), worst_normal, 0.0, 1e-8));

        if (!s.patch.edges.empty()) {
            Real worst_angle = 0.0;
            for (const EdgeTag& tag : s.patch.edges) {
                CapillaryField cf = capillary_angle(generic, s.norm, s.wedge, tag.face, 0, 1.0);
                for (Real v : cf.values)
                    worst_angle = std::max(worst_angle, std::abs(v - s.omega0[tag.face - 1]));
            }
            rep.add(
                bound_check("flow_capillary_preserved" + suffix.str(), worst_angle, 0.0, 1e-8));
        }
    }
    return rep;
}

Report monotonicity_check(const NormSpec& norm, int trials, std::uint64_t seed) {
    Report rep;
    rep.suite = "monotonicity";
    Rng rng(seed);
    const int d = norm.ambient_dim();
    const int grid = 200;

    int violations = 0;
    Real worst_gap = 1e300;  // smallest decrement between consecutive samples
    Real worst_deriv = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        Vec z = rng.unit_vector(d);
        Vec v = rng.gaussian_vector(d);
        v -= v.dot(z) * z;
        while (v.norm() < 1e-8) {
            v = rng.gaussian_vector(d);
            v -= v.dot(z) * z;
        }
        v.normalize();
        auto f = [&](Real t) -> Real {
            Vec g = std::cos(t) * z + std::sin(t) * v;
            return norm.gradient(g).dot(z);
        };
        Real prev = f(0.0);
        for (int i = 1; i <= grid; ++i) {
            const Real cur = f(M_PI * i / grid);
            if (cur >= prev) ++violations;
            worst_gap = std::min(worst_gap, prev - cur);
            prev = cur;
        }
        for (int probe = 0; probe < 3; ++probe) {
            const Real t = rng.uniform(0.1, M_PI - 0.1);
            Vec g = std::cos(t) * z + std::sin(t) * v;
            Vec gp = -std::sin(t) * z + std::cos(t) * v;
            const Real analytic = -std::sin(t) * gp.dot(norm.hessian(g) * gp);
            const Real fd = fd_derivative(f, t, {1e-5, 1});
            worst_deriv = std::max(worst_deriv, std::abs(analytic - fd));
        }
    }
    CheckRecord mono;
    mono.name = "strict_decrease_violations";
    mono.lhs = violations;
    mono.rhs = 0.0;
    mono.residual_abs = violations;
    mono.residual_rel = violations;
    mono.verdict = violations == 0 ? Verdict::Pass : Verdict::Fail;
    mono.note = "smallest decrement " + std::to_string(worst_gap);
    rep.add(mono);
    rep.add(bound_check("derivative_formula_agreement", worst_deriv, 0.0, 1e-6));
    return rep;
}

namespace {

// Extremize F_dual(X(u) - y) over the chart by projected gradient with
// backtracking; dual evaluations are warm-started along the way.
struct ChartExtremum {
    Vec u;
    Real value = 0.0;
    bool on_boundary = false;
};

ChartExtremum chart_extremize(const Patch& patch, const DualNorm& dual, const Vec& y,
                              bool maximize, const std::vector<QuadNode>& seeds) {
    Vec warm;
    auto eval_at = [&](const Vec& u) {
        DualNorm::Result r =
            dual.eval_full(Vec(patch_position(patch, u) - y), warm.size() ? &warm : nullptr);
        warm = r.xi;
        return r;
    };

    Vec best_u;
    Real best = maximize ? -1e300 : 1e300;
    for (const QuadNode& n : seeds) {
        const Real v = eval_at(n.frame.u).value;
        if ((maximize && v > best) || (!maximize && v < best)) {
            best = v;
            best_u = n.frame.u;
        }
    }

    const Real sgn = maximize ? -1.0 : 1.0;  // minimize sgn * value
    Vec u = best_u;
    Real step = 0.05;
    DualNorm::Result cur = eval_at(u);
    auto box_project = [&](Vec v) {
        for (int a = 0; a < patch.dim; ++a) {
            if (patch.periodic[a])
                v(a) -= std::floor(v(a));
            else
                v(a) = std::clamp(v(a), 0.0, 1.0);
        }
        return v;
    };
    for (int it = 0; it < 60 && step > 1e-12; ++it) {
        Vec grad = sgn * (patch_jacobian(patch, u).transpose() * cur.gradient);
        Vec trial_u = box_project(u - step * grad);
        DualNorm::Result trial = eval_at(trial_u);
        if (sgn * trial.value < sgn * cur.value) {
            u = trial_u;
            cur = trial;
            step *= 1.6;
        } else {
            step *= 0.5;
        }
    }

    // Regularized Newton polish: the projected-gradient phase localizes the
    // basin, Newton sharpens it to roundoff. Near degenerate chart corners
    // the u-space Hessian can lose definiteness even though the surface
    // function is fine, so the step is Levenberg-damped and backtracked.
    // Charts extend smoothly past the box; probes may step outside, only
    // the iterate is projected back.
    auto grad_at = [&](const Vec& v, const DualNorm::Result& r) -> Vec {
        return sgn * (patch_jacobian(patch, v).transpose() * r.gradient);
    };
    for (int it = 0; it < 30; ++it) {
        Vec g = grad_at(u, cur);
        if (g.norm() < 1e-12) break;
        const Real h = 1e-6;
        Mat H(patch.dim, patch.dim);
        for (int a = 0; a < patch.dim; ++a) {
            Vec up = u, um = u;
            up(a) += h;
            um(a) -= h;
            DualNorm::Result rp = eval_at(up), rm = eval_at(um);
            H.col(a) = (grad_at(up, rp) - grad_at(um, rm)) / (2.0 * h);
        }
        H = 0.5 * (H + H.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(H);
        const Real lam_min = es.eigenvalues()(0);
        const Real lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
        const Real damping =
            (lam_min <= 0.0 ? -lam_min : 0.0) + 1e-4 * lam_max + 1e-12;
        Vec d = -(H + damping * Mat::Identity(patch.dim, patch.dim)).ldlt().solve(g);
        if (d.norm() > 0.2) d *= 0.2 / d.norm();

        bool accepted = false;
        Real shrink = 1.0;
        for (int bt = 0; bt < 6 && !accepted; ++bt, shrink *= 0.5) {
            Vec trial_u = box_project(u + shrink * d);
            DualNorm::Result trial = eval_at(trial_u);
            // Tiny steps sit below the value resolution; trust them.
            if (shrink * d.norm() < 1e-7 || sgn * trial.value <= sgn * cur.value + 1e-15) {
                const Real moved = (trial_u - u).norm();
                u = trial_u;
                cur = trial;
                accepted = moved > 1e-12;
                if (moved <= 1e-12) it = 30;
                break;
            }
        }
        if (!accepted) break;
    }

    ChartExtremum out;
    out.u = u;
    out.value = cur.value;
    for (int a = 0; a < patch.dim; ++a) {
        if (patch.periodic[a]) continue;
        if (u(a) < 1e-9 || u(a) > 1.0 - 1e-9) {
            Vec grad = sgn * (patch_jacobian(patch, u).transpose() * cur.gradient);
            const Real outward = u(a) < 0.5 ? -grad(a) : grad(a);
            if (outward < 0.0) out.on_boundary = true;  // active descent constraint
        }
    }
    return out;
}

}  // namespace

Report coverage_check(const VerificationScenario& s, int samples) {
    Report rep;
    rep.suite = "coverage";
    NormSpec barred = s.effective_free_norm();
    DualNorm dual(barred);

    PatchTable table = build_patch_table(s.patch, std::min(1, s.levels - 1), false);
    Vec lo = table.nodes.front().frame.x, hi = lo;
    for (const QuadNode& n : table.nodes) {
        lo = lo.cwiseMin(n.frame.x);
        hi = hi.cwiseMax(n.frame.x);
    }
    if (s.patch.star_center) {
        lo = lo.cwiseMin(*s.patch.star_center);
        hi = hi.cwiseMax(*s.patch.star_center);
    }
    auto member = [&](const Vec& x) -> bool {
        if (s.patch.membership) return s.patch.membership(x);
        if (classify_point(s.wedge, x) != Stratum::Interior) return false;
        if (!s.patch.star_center) throw ConfigError("coverage needs membership or a star center");
        Vec rel = x - *s.patch.star_center;
        if (rel.norm() < 1e-12) return true;
        try {
            return rel.norm() < ray_cast_radius(s.patch, *s.patch.star_center, rel.normalized());
        } catch (const OptimizerNotConverged&) {
            return false;
        }
    };

    Rng rng(s.seed);
    const int d = s.norm.ambient_dim();
    int covered = 0, boundary_events = 0;
    Real worst_touch = 0.0, worst_margin = -1e300;
    for (int count = 0; count < samples; ++count) {
        Vec y(d);
        int guard = 0;
        do {
            for (int i = 0; i < d; ++i) y(i) = rng.uniform(lo(i), hi(i));
            if (++guard > 200000) throw OptimizerNotConverged("rejection sampling starved");
        } while (!member(y));

        ChartExtremum ext = chart_extremize(s.patch, dual, y, false, table.nodes);
        if (ext.on_boundary) {
            ++boundary_events;
            continue;
        }
        const Real r0 = ext.value;
        // The anisotropic normal is stable everywhere; the shape operator is
        // evaluated a nudge away from degenerate corners.
        Vec nuF = barred.gradient(patch_normal(s.patch, ext.u));
        CurvatureData cd =
            anisotropic_shape(barred, s.patch, clamp_degenerate_corners(s.patch, ext.u));
        const Real margin = r0 * cd.kappa.maxCoeff() - 1.0;  // must stay <= 0
        worst_margin = std::max(worst_margin, margin);
        Vec reconstructed = patch_position(s.patch, ext.u) - r0 * nuF;
        const Real touch = (reconstructed - y).norm();
        worst_touch = std::max(worst_touch, touch);
        if (margin <= 1e-8 && touch <= s.tol.geo_tol) ++covered;
    }

    CheckRecord frac;
    frac.name = "covered_fraction";
    frac.lhs = static_cast<Real>(covered) / samples;
    frac.rhs = 1.0;
    frac.residual_abs = 1.0 - frac.lhs;
    frac.residual_rel = frac.residual_abs;
    frac.verdict = covered == samples ? Verdict::Pass : Verdict::Fail;
    std::ostringstream note;
    note << "touch residual " << worst_touch << ", curvature margin " << worst_margin;
    frac.note = note.str();
    rep.add(frac);

    CheckRecord bd;
    bd.name = "minimizer_on_boundary_events";
    bd.lhs = boundary_events;
    bd.rhs = 0.0;
    bd.residual_abs = boundary_events;
    bd.residual_rel = boundary_events;
    bd.verdict = boundary_events == 0 ? Verdict::Pass : Verdict::Fail;
    if (boundary_events > 0) bd.note = "nearest-point search pinned on a boundary stratum";
    rep.add(bd);
    return rep;
}

Report elliptic_point_search(const VerificationScenario& s) {
    Report rep;
    rep.suite = "elliptic";
    NormSpec barred = s.effective_free_norm();
    DualNorm dual(barred);
    const int d = s.norm.ambient_dim();

    // A center on the wedge edge; corner midpoint when the patch reaches L.
    Vec y = Vec::Zero(d);
    if (!s.patch.corner_points.empty()) {
        for (const Vec& c : s.patch.corner_points) y += c;
        y /= static_cast<Real>(s.patch.corner_points.size());
    } else if (d == 3) {
        Vec ell = s.wedge.edge_basis().col(0);
        Vec c = s.patch.star_center ? *s.patch.star_center : s.patch.interior_point;
        y = c.dot(ell) * ell;
    }

    PatchTable table = build_patch_table(s.patch, std::min(1, s.levels - 1), false);
    ChartExtremum ext = chart_extremize(s.patch, dual, y, true, table.nodes);
    const Real r0 = ext.value;
    CurvatureData cd =
        anisotropic_shape(barred, s.patch, clamp_degenerate_corners(s.patch, ext.u));
    const Real kmin = cd.kappa.minCoeff();

    CheckRecord rec;
    rec.name = "elliptic_touch_curvature";
    rec.lhs = kmin;
    rec.rhs = 1.0 / r0;
    rec.residual_abs = kmin - 1.0 / r0;
    rec.residual_rel = rec.residual_abs * r0;
    rec.verdict = kmin >= 1.0 / r0 - 1e-6 ? Verdict::Pass : Verdict::Fail;
    std::ostringstream note;
    note << "r0 " << r0 << ", min kappa " << kmin;
    rec.note = note.str();
    rep.add(rec);
    return rep;
}

WulffFitResult fit_wulff_shape(const NormSpec& norm, const Patch& patch, int level) {
    DualNorm dual(norm);
    PatchTable table = build_patch_table(patch, level, true);

    // Seed from per-node center estimates x - nuF / H1.
    Vec c = Vec::Zero(patch.ambient_dim());
    Real rho = 0.0, wsum = 0.0;
    for (const QuadNode& n : table.nodes) {
        CurvatureData cd = anisotropic_shape(norm, n.frame);
        if (cd.H[1] <= 1e-12) continue;
        const Real w = n.weight * n.frame.area_element;
        c += w * (n.frame.x - cd.nuF / cd.H[1]);
        rho += w / cd.H[1];
        wsum += w;
    }
    if (wsum <= 0.0) throw FitNotConverged("no usable nodes to seed the fit");
    c /= wsum;
    rho /= wsum;

    Vec warm;
    auto rms_at = [&](const Vec& cc, Real rr) {
        KahanSum sum, wts;
        for (const QuadNode& n : table.nodes) {
            DualNorm::Result e =
                dual.eval_full(Vec(n.frame.x - cc), warm.size() ? &warm : nullptr);
            warm = e.xi;
            const Real w = n.weight * n.frame.area_element;
            sum.add(w * (e.value - rr) * (e.value - rr));
            wts.add(w);
        }
        return std::sqrt(sum.value() / wts.value());
    };

    WulffFitResult out;
    Real lambda = 0.0;
    Real current = rms_at(c, rho);
    for (int it = 0; it < 60; ++it) {
        Mat jtj = Mat::Zero(patch.ambient_dim() + 1, patch.ambient_dim() + 1);
        Vec jtr = Vec::Zero(patch.ambient_dim() + 1);
        for (const QuadNode& n : table.nodes) {
            DualNorm::Result e = dual.eval_full(Vec(n.frame.x - c), warm.size() ? &warm : nullptr);
            warm = e.xi;
            const Real w = n.weight * n.frame.area_element;
            Vec row(patch.ambient_dim() + 1);
            row.head(patch.ambient_dim()) = -e.gradient;
            row(patch.ambient_dim()) = -1.0;
            jtj += w * row * row.transpose();
            jtr += w * row * (e.value - rho);
        }
        Vec delta = (jtj + lambda * Mat::Identity(jtj.rows(), jtj.cols())).ldlt().solve(-jtr);
        Vec c_new = c + delta.head(patch.ambient_dim());
        const Real rho_new = rho + delta(patch.ambient_dim());
        const Real next = rms_at(c_new, rho_new);
        out.iterations = it + 1;
        if (next <= current) {
            const bool converged = delta.norm() < 1e-13 * (1.0 + rho) || current - next < 1e-16;
            c = c_new;
            rho = rho_new;
            current = next;
            lambda *= 0.25;
            if (converged) break;
        } else {
            lambda = lambda == 0.0 ? 1e-6 : lambda * 8.0;
            if (lambda > 1e6) throw FitNotConverged("damping exhausted in the level-set fit");
        }
    }
    out.center = c;
    out.radius = rho;
    out.rms = current;
    return out;
}

Report wulff_fit(const VerificationScenario& s) {
    Report rep;
    rep.suite = "wulff_fit";
    WulffFitResult fit = fit_wulff_shape(s.norm, s.patch, std::min(1, s.levels - 1));

    CheckRecord rms;
    rms.name = "fit_rms";
    rms.lhs = fit.rms;
    rms.rhs = 0.0;
    rms.residual_abs = fit.rms;
    rms.residual_rel = fit.rms / std::max(1.0, fit.radius);
    rms.verdict = fit.rms <= s.tol.fit_rms_pass ? Verdict::Pass : Verdict::Fail;
    rms.expected_fail = !s.is_wulff;
    std::ostringstream note;
    note << "center (";
    for (int i = 0; i < fit.center.size(); ++i) note << (i ? ", " : "") << fit.center(i);
    note << "), radius " << fit.radius << ", iterations " << fit.iterations;
    rms.note = note.str();
    rep.add(rms);

    if (s.is_wulff) {
        for (const EdgeTag& tag : s.patch.edges) {
            const Real omega_fit = -fit.center.dot(s.wedge.normal(tag.face)) / fit.radius;
            rep.add(identity_check("fit_contact_face" + std::to_string(tag.face), omega_fit,
                                   s.omega0[tag.face - 1], s.tol.fit_tol));
        }
    }
    return rep;
}

Report alexandrov_pipeline(const VerificationScenario& s, int r) {
    if (r < 1 || r > s.surface_dim()) throw ConfigError("pipeline order r out of range");
    Report rep;
    rep.suite = "alexandrov";
    NormSpec barred = s.effective_free_norm();
    const int n = s.surface_dim();
    const int level = s.levels - 1;

    PatchTable table = build_patch_table(s.patch, level, true);
    std::vector<CurvedNode> curved = curvature_table(barred, s.patch, table);

    Real hr_min = 1e300, hr_max = -1e300, kappa_min = 1e300;
    KahanSum hr_sum, wsum;
    for (const CurvedNode& cn : curved) {
        hr_min = std::min(hr_min, cn.cd.H[r]);
        hr_max = std::max(hr_max, cn.cd.H[r]);
        kappa_min = std::min(kappa_min, cn.cd.kappa.minCoeff());
        const Real w = cn.node.weight * cn.node.frame.area_element;
        hr_sum.add(w * cn.cd.H[r]);
        wsum.add(w);
    }
    const Real hr = hr_sum.value() / wsum.value();
    const Real spread = hr_max - hr_min;
    if (spread > s.tol.const_tol * std::max(1.0, std::abs(hr)))
        throw NotConstantCurvature("H_" + std::to_string(r) + " spread " + std::to_string(spread) +
                                   " about mean " + std::to_string(hr));

    // Touching-sphere positivity first; the chain needs positive curvatures.
    for (CheckRecord rec : elliptic_point_search(s).checks) {
        rec.name = "positivity_" + rec.name;
        rep.add(rec);
    }
    {
        CheckRecord pos;
        pos.name = "positive_principal_curvatures";
        pos.lhs = kappa_min;
        pos.rhs = 0.0;
        pos.residual_abs = -kappa_min;
        pos.residual_rel = -kappa_min;
        pos.verdict = kappa_min > 0.0 ? Verdict::Pass : Verdict::Fail;
        rep.add(pos);
    }

    const Real area_f = integrate_curved(curved, [](const CurvedNode& cn) { return cn.F_nu; });
    const Real hk_lhs =
        integrate_curved(curved, [](const CurvedNode& cn) { return cn.F_nu / cn.cd.H[1]; });
    const Real vol = enclosed_volume(s.patch, s.wedge, level);
    const Real hr_root = std::pow(hr, 1.0 / r);
    const Real hr_root_m1 = std::pow(hr, (r - 1.0) / r);
    const Real mink_lhs =
        integrate_curved(curved, [&](const CurvedNode& cn) { return cn.cd.H[r - 1] * cn.F_nu; });
    const Real mink_rhs = integrate_curved(curved, [&](const CurvedNode& cn) {
        return cn.cd.H[r] * cn.node.frame.x.dot(cn.node.frame.nu);
    });

    // On a truncated Wulff shape every link of the chain is tight.
    rep.add(identity_check("chain_enclosing", (n + 1) * hr_root * vol, hr_root * hk_lhs,
                           s.tol.identity_rel));
    rep.add(identity_check("chain_maclaurin_hk", hr_root * hk_lhs, area_f, s.tol.identity_rel));
    rep.add(identity_check("chain_minkowski", mink_lhs, mink_rhs, s.tol.identity_rel));
    rep.add(
        identity_check("chain_maclaurin_mink", mink_lhs, hr_root_m1 * area_f, s.tol.identity_rel));
    rep.add(identity_check("chain_combined", (n + 1) * hr * vol, hr_root_m1 * hr_root * area_f,
                           s.tol.identity_rel));

    VerificationScenario sb = s;
    sb.norm = barred;
    sb.k.reset();
    sb.omega0 = {0.0, 0.0};
    for (const CheckRecord& rec : wulff_fit(sb).checks) rep.add(rec);
    return rep;
}

}  // namespace aniso
