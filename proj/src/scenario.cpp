#include "aniso/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace aniso {

using nlohmann::json;

namespace {

Vec vec_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() < 2 || j.size() > 3)
        throw ConfigError("expected a 2- or 3-vector", where);
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError("vector entries must be numbers", where);
        v(i) = j[i].get<Real>();
    }
    return v;
}

json vec_to_json(const Vec& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

BumpSpec bump_by_kind(const std::string& kind, int dim, Real skew) {
    if (kind == "separable_sin2") return separable_sin2_bump(dim, skew);
    if (kind == "edge_tilt") {
        // Vanishes on the boundary curves but tilts the normal there: the
        // deliberate capillary violation for expected-fail fixtures.
        BumpSpec b;
        b.name = "edge_tilt";
        b.value = [dim](const Vec& u) {
            if (dim == 1) return std::sin(M_PI * u(0));
            const Real st = std::sin(M_PI * u(0));
            return st * st * std::sin(M_PI * u(1));
        };
        return b;
    }
    throw ConfigError("unknown bump kind '" + kind + "'", "/patch/bump/kind");
}

}  // namespace

json norm_to_json(const NormSpec& norm) {
    json j;
    j["family"] = to_string(norm.family());
    json params = json::object();
    switch (norm.family()) {
        case NormFamily::Isotropic:
            break;
        case NormFamily::Shifted:
            params["k0"] = vec_to_json(norm.shift());
            break;
        case NormFamily::Ellipsoidal: {
            json rows = json::array();
            const Mat& A = norm.ellipsoid_matrix();
            for (int i = 0; i < A.rows(); ++i) {
                json row = json::array();
                for (int c = 0; c < A.cols(); ++c) row.push_back(A(i, c));
                rows.push_back(row);
            }
            params["A"] = rows;
            if (norm.shift().norm() > 0.0) params["shift"] = vec_to_json(norm.shift());
            break;
        }
        case NormFamily::SuperquadricBlend:
            params["eps"] = norm.blend_eps();
            if (norm.shift().norm() > 0.0) params["shift"] = vec_to_json(norm.shift());
            break;
        default:
            throw ConfigError("custom norms are not serializable", "/norm/family");
    }
    j["params"] = params;
    j["dimension"] = norm.ambient_dim();
    const DerivativeMode& m = norm.derivative_mode();
    j["derivative_mode"] = {
        {"kind", m.kind == DerivativeMode::Kind::ClosedForm ? "closed_form" : "finite_difference"},
        {"step", m.step},
        {"richardson", m.richardson}};
    return j;
}

NormSpec norm_from_json(const json& j, const std::string& where) {
    if (!j.contains("family")) throw ConfigError("missing norm family", where + "/family");
    const std::string family = j["family"].get<std::string>();
    const json params = j.value("params", json::object());
    const int dim = j.value("dimension", 3);

    NormSpec norm = NormSpec::isotropic(dim);
    if (family == "isotropic") {
        norm = NormSpec::isotropic(dim);
    } else if (family == "shifted") {
        if (!params.contains("k0")) throw ConfigError("shifted norm needs k0", where + "/params/k0");
        norm = NormSpec::shifted(vec_from_json(params["k0"], where + "/params/k0"));
    } else if (family == "ellipsoidal") {
        if (!params.contains("A")) throw ConfigError("ellipsoidal norm needs A", where + "/params/A");
        const json rows = params["A"];
        Mat A(rows.size(), rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t c = 0; c < rows.size(); ++c) A(i, c) = rows[i][c].get<Real>();
        norm = NormSpec::ellipsoidal(A);
    } else if (family == "superquadric_blend") {
        if (!params.contains("eps"))
            throw ConfigError("superquadric blend needs eps", where + "/params/eps");
        norm = NormSpec::superquadric_blend(dim, params["eps"].get<Real>());
    } else {
        throw ConfigError("unknown norm family '" + family + "'", where + "/family");
    }
    if (params.contains("shift") && family != "shifted")
        norm = shift_norm(norm, vec_from_json(params["shift"], where + "/params/shift"));

    if (j.contains("derivative_mode")) {
        const json m = j["derivative_mode"];
        DerivativeMode mode;
        const std::string kind = m.value("kind", "closed_form");
        if (kind == "finite_difference")
            mode.kind = DerivativeMode::Kind::FiniteDifference;
        else if (kind != "closed_form")
            throw ConfigError("unknown derivative mode", where + "/derivative_mode/kind");
        mode.step = m.value("step", 1e-5);
        mode.richardson = m.value("richardson", 1);
        norm.set_derivative_mode(mode);
    }
    return norm;
}

json wedge_to_json(const Wedge& w) {
    return json{{"n1", vec_to_json(w.normal(1))}, {"n2", vec_to_json(w.normal(2))}};
}

Wedge wedge_from_json(const json& j, const std::string& where) {
    if (!j.contains("n1") || !j.contains("n2"))
        throw ConfigError("wedge needs n1 and n2", where);
    return Wedge(vec_from_json(j["n1"], where + "/n1"), vec_from_json(j["n2"], where + "/n2"));
}

json scenario_to_json(const ScenarioSpec& spec) {
    const VerificationScenario& s = spec.scenario;
    json j;
    j["name"] = s.name;
    j["norm"] = norm_to_json(s.norm);
    j["wedge"] = wedge_to_json(s.wedge);

    json p;
    p["kind"] = spec.patch_spec.kind;
    p["quadrature"] = {{"order", spec.patch_spec.quad.order},
                       {"cells", {spec.patch_spec.quad.cells[0], spec.patch_spec.quad.cells[1]}}};
    if (spec.patch_spec.kind == "custom") {
        p["custom"] = {{"name", spec.patch_spec.custom_name},
                       {"rho0", spec.patch_spec.rho0},
                       {"a", spec.patch_spec.amp},
                       {"m", spec.patch_spec.m}};
    } else {
        p["center"] = vec_to_json(spec.patch_spec.center);
        p["radius"] = spec.patch_spec.radius;
        if (spec.patch_spec.kind == "perturbed")
            p["bump"] = {{"kind", spec.patch_spec.bump_kind},
                         {"amplitude", spec.patch_spec.bump_amplitude},
                         {"skew", spec.patch_spec.bump_skew}};
    }
    j["patch"] = p;
    j["omega0"] = {s.omega0[0], s.omega0[1]};
    if (s.k) j["k"] = vec_to_json(*s.k);
    j["is_wulff"] = s.is_wulff;
    j["suites"] = spec.suites;
    if (!spec.expected_fail.empty()) j["expected_fail"] = spec.expected_fail;
    return j;
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec spec;
    if (!j.contains("norm")) throw ConfigError("scenario needs a norm", "/norm");
    if (!j.contains("wedge")) throw ConfigError("scenario needs a wedge", "/wedge");
    if (!j.contains("patch")) throw ConfigError("scenario needs a patch", "/patch");

    NormSpec norm = norm_from_json(j["norm"], "/norm");
    Wedge wedge = wedge_from_json(j["wedge"], "/wedge");

    std::array<Real, 2> omega0{0.0, 0.0};
    if (j.contains("omega0")) {
        const json o = j["omega0"];
        if (!o.is_array() || o.size() != 2)
            throw ConfigError("omega0 must be a pair", "/omega0");
        omega0 = {o[0].get<Real>(), o[1].get<Real>()};
    }

    std::optional<Vec> k;
    if (j.contains("k")) {
        if (j["k"].is_string() && j["k"].get<std::string>() == "auto") {
            KVectorResult kr = solve_k_vector(norm, wedge, omega0);
            if (!kr.found)
                throw ConfigError("no admissible k for omega0 (best dual value " +
                                      std::to_string(kr.dual_value) + ")",
                                  "/k");
            k = kr.k;
        } else {
            k = vec_from_json(j["k"], "/k");
        }
    }

    const json pj = j["patch"];
    PatchSpec& ps = spec.patch_spec;
    ps.kind = pj.value("kind", "wulff");
    if (pj.contains("quadrature")) {
        const json q = pj["quadrature"];
        ps.quad.order = q.value("order", ps.quad.order);
        if (q.contains("cells")) {
            ps.quad.cells[0] = q["cells"][0].get<int>();
            ps.quad.cells[1] = q["cells"].size() > 1 ? q["cells"][1].get<int>() : 1;
        }
    }

    Patch patch;
    bool is_wulff = true;
    if (ps.kind == "wulff" || ps.kind == "perturbed") {
        if (!pj.contains("center")) throw ConfigError("patch needs a center", "/patch/center");
        ps.center = vec_from_json(pj["center"], "/patch/center");
        ps.radius = pj.value("radius", 1.0);
        patch = wulff_patch(norm, wedge, ps.center, ps.radius, ps.quad);
        if (ps.kind == "perturbed") {
            const json bj = pj.value("bump", json::object());
            ps.bump_kind = bj.value("kind", "separable_sin2");
            ps.bump_amplitude = bj.value("amplitude", 0.05);
            ps.bump_skew = bj.value("skew", 0.0);
            BumpSpec bump = bump_by_kind(ps.bump_kind, patch.dim, ps.bump_skew);
            patch = perturb(patch, bump, ps.bump_amplitude);
            is_wulff = false;
        }
    } else if (ps.kind == "custom") {
        const json cj = pj.value("custom", json::object());
        ps.custom_name = cj.value("name", "");
        if (ps.custom_name == "polar_graph") {
            ps.rho0 = cj.value("rho0", 1.0);
            ps.amp = cj.value("a", 0.15);
            ps.m = cj.value("m", 2);
            patch = polar_graph_patch(wedge, ps.rho0, ps.amp, ps.m, ps.quad);
            is_wulff = false;
        } else {
            throw ConfigError("unknown custom patch '" + ps.custom_name + "'",
                              "/patch/custom/name");
        }
    } else {
        throw ConfigError("unknown patch kind '" + ps.kind + "'", "/patch/kind");
    }

    VerificationScenario& s = spec.scenario;
    s.name = j.value("name", std::string("scenario"));
    s.norm = std::move(norm);
    s.wedge = std::move(wedge);
    s.patch = std::move(patch);
    s.omega0 = omega0;
    s.k = k;
    s.is_wulff = j.value("is_wulff", is_wulff);
    if (j.contains("tolerances")) {
        for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it)
            s.tol.set(it.key(), it.value().get<Real>());
    }
    if (j.contains("suites")) spec.suites = j["suites"].get<std::vector<std::string>>();
    if (j.contains("expected_fail"))
        spec.expected_fail = j["expected_fail"].get<std::vector<std::string>>();
    s.validate();
    return spec;
}

// --- fixtures ------------------------------------------------------------------

namespace {

json fixture_json(const std::string& name) {
    auto wedge3 = json{{"n1", {1, 0, 0}}, {"n2", {0, 1, 0}}};
    auto wedge3_oblique =
        json{{"n1", {1, 0, 0}}, {"n2", {-0.5, std::sqrt(3.0) / 2.0, 0}}};
    auto wedge2 = json{{"n1", {1, 0}}, {"n2", {0, 1}}};
    auto iso3 = json{{"family", "isotropic"}, {"dimension", 3}};
    auto iso2 = json{{"family", "isotropic"}, {"dimension", 2}};
    auto ell3 = json{{"family", "ellipsoidal"},
                     {"params", {{"A", {{4, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}},
                     {"dimension", 3}};
    auto ell2 =
        json{{"family", "ellipsoidal"}, {"params", {{"A", {{2.25, 0}, {0, 1}}}}}, {"dimension", 2}};
    auto blend3 = json{{"family", "superquadric_blend"}, {"params", {{"eps", 0.2}}},
                       {"dimension", 3}};
    auto blend2 = json{{"family", "superquadric_blend"}, {"params", {{"eps", 0.2}}},
                       {"dimension", 2}};
    auto quad2d = json{{"order", 5}, {"cells", {2, 2}}};
    auto quad1d = json{{"order", 8}, {"cells", {6, 1}}};

    const std::vector<std::string> wulff_suites = {"geometry",  "minkowski", "flux",
                                                   "hk",        "flow",      "coverage",
                                                   "elliptic",  "alexandrov", "wulff_fit",
                                                   "first_variation"};
    std::vector<std::string> capillary_suites = wulff_suites;
    capillary_suites.push_back("fbar_reduction");
    const std::vector<std::string> perturbed_suites = {
        "geometry", "minkowski", "flux", "hk", "coverage", "elliptic", "wulff_fit", "alexandrov"};

    json j;
    if (name == "quarter_sphere_free") {
        j = {{"name", name}, {"norm", iso3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0, 0}}, {"radius", 1.0}, {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", wulff_suites}};
        j["suites"].push_back("duality");
        j["suites"].push_back("monotonicity");
    } else if (name == "sphere_cap_capillary") {
        j = {{"name", name}, {"norm", iso3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "wulff"}, {"center", {0.3, 0.4, 0.2}}, {"radius", 1.0},
               {"quadrature", quad2d}}},
             {"omega0", {-0.3, -0.4}}, {"k", "auto"},
             {"suites", capillary_suites}};
    } else if (name == "ellipsoid_free") {
        j = {{"name", name}, {"norm", ell3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0, 0.1}}, {"radius", 1.0},
               {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", wulff_suites}};
        j["suites"].push_back("duality");
        j["suites"].push_back("monotonicity");
    } else if (name == "ellipsoid_capillary_oblique") {
        j = {{"name", name}, {"norm", ell3}, {"wedge", wedge3_oblique},
             {"patch",
              {{"kind", "wulff"}, {"center", "auto_capillary"}, {"radius", 1.0},
               {"quadrature", quad2d}}},
             {"omega0", {-0.25, -0.35}}, {"k", "auto"},
             {"suites", capillary_suites}};
    } else if (name == "blend_free") {
        j = {{"name", name}, {"norm", blend3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0, 0}}, {"radius", 1.0},
               {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", wulff_suites}};
        j["suites"].push_back("duality");
        j["suites"].push_back("monotonicity");
    } else if (name == "blend_capillary") {
        j = {{"name", name}, {"norm", blend3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "wulff"}, {"center", "auto_capillary"}, {"radius", 1.0},
               {"quadrature", quad2d}}},
             {"omega0", {-0.2, -0.3}}, {"k", "auto"},
             {"suites", capillary_suites}};
    } else if (name == "shifted_free") {
        j = {{"name", name},
             {"norm",
              {{"family", "shifted"}, {"params", {{"k0", {0.25, 0.1, -0.05}}}}, {"dimension", 3}}},
             {"wedge", wedge3},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0, 0}}, {"radius", 1.0},
               {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", wulff_suites}};
        j["suites"].push_back("duality");
        j["suites"].push_back("monotonicity");
    } else if (name == "perturbed_quarter_sphere") {
        j = {{"name", name}, {"norm", iso3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "perturbed"}, {"center", {0, 0, 0}}, {"radius", 1.0},
               {"bump", {{"kind", "separable_sin2"}, {"amplitude", 0.05}, {"skew", 0.35}}},
               {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", perturbed_suites},
             {"expected_fail", {"alexandrov"}}};
    } else if (name == "perturbed_ellipsoid") {
        j = {{"name", name}, {"norm", ell3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "perturbed"}, {"center", {0, 0, 0.1}}, {"radius", 1.0},
               {"bump", {{"kind", "separable_sin2"}, {"amplitude", 0.05}, {"skew", 0.3}}},
               {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", perturbed_suites},
             {"expected_fail", {"alexandrov"}}};
    } else if (name == "noncapillary_edge_bump") {
        j = {{"name", name}, {"norm", iso3}, {"wedge", wedge3},
             {"patch",
              {{"kind", "perturbed"}, {"center", {0, 0, 0}}, {"radius", 1.0},
               {"bump", {{"kind", "edge_tilt"}, {"amplitude", 0.08}}},
               {"quadrature", quad2d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", {"flux", "minkowski", "hk"}},
             {"expected_fail", {"flux", "hk"}}};
    } else if (name == "arc_free") {
        j = {{"name", name}, {"norm", iso2}, {"wedge", wedge2},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0}}, {"radius", 1.0}, {"quadrature", quad1d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", {"geometry", "minkowski", "flux", "hk", "flow", "coverage", "elliptic",
                         "alexandrov", "wulff_fit", "first_variation", "oracle", "duality",
                         "monotonicity"}}};
    } else if (name == "arc_capillary") {
        j = {{"name", name}, {"norm", iso2}, {"wedge", wedge2},
             {"patch",
              {{"kind", "wulff"}, {"center", "auto_capillary"}, {"radius", 1.0},
               {"quadrature", quad1d}}},
             {"omega0", {-0.3, -0.4}}, {"k", "auto"},
             {"suites", {"geometry", "minkowski", "flux", "hk", "flow", "coverage", "elliptic",
                         "alexandrov", "wulff_fit", "fbar_reduction", "oracle"}}};
    } else if (name == "arc_ellipse_free") {
        j = {{"name", name}, {"norm", ell2}, {"wedge", wedge2},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0}}, {"radius", 1.0}, {"quadrature", quad1d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", {"geometry", "minkowski", "flux", "hk", "flow", "coverage", "elliptic",
                         "alexandrov", "wulff_fit", "oracle", "duality"}}};
    } else if (name == "arc_blend_capillary") {
        j = {{"name", name}, {"norm", blend2}, {"wedge", wedge2},
             {"patch",
              {{"kind", "wulff"}, {"center", "auto_capillary"}, {"radius", 1.0},
               {"quadrature", quad1d}}},
             {"omega0", {-0.2, -0.25}}, {"k", "auto"},
             {"suites", {"geometry", "minkowski", "flux", "hk", "flow", "coverage", "elliptic",
                         "alexandrov", "wulff_fit", "fbar_reduction", "duality"}}};
    } else if (name == "arc_shifted_free") {
        j = {{"name", name},
             {"norm", {{"family", "shifted"}, {"params", {{"k0", {0.3, 0.1}}}}, {"dimension", 2}}},
             {"wedge", wedge2},
             {"patch",
              {{"kind", "wulff"}, {"center", {0, 0}}, {"radius", 1.0}, {"quadrature", quad1d}}},
             {"omega0", {0.0, 0.0}},
             {"suites",
              {"geometry", "minkowski", "flux", "hk", "coverage", "elliptic", "alexandrov",
               "wulff_fit", "oracle", "duality", "monotonicity"}}};
    } else if (name == "dumbbell_arc") {
        j = {{"name", name}, {"norm", iso2}, {"wedge", wedge2},
             {"patch",
              {{"kind", "custom"},
               {"custom", {{"name", "polar_graph"}, {"rho0", 1.0}, {"a", 0.15}, {"m", 2}}},
               {"quadrature", quad1d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", {"geometry", "minkowski", "flux", "hk", "coverage", "elliptic",
                         "wulff_fit", "oracle", "alexandrov"}},
             {"expected_fail", {"alexandrov"}}};
    } else if (name == "perturbed_arc") {
        j = {{"name", name}, {"norm", iso2}, {"wedge", wedge2},
             {"patch",
              {{"kind", "perturbed"}, {"center", {0, 0}}, {"radius", 1.0},
               {"bump", {{"kind", "separable_sin2"}, {"amplitude", 0.06}}},
               {"quadrature", quad1d}}},
             {"omega0", {0.0, 0.0}},
             {"suites", {"geometry", "minkowski", "flux", "hk", "coverage", "elliptic",
                         "wulff_fit", "alexandrov"}},
             {"expected_fail", {"alexandrov"}}};
    } else {
        throw ConfigError("unknown fixture '" + name + "'");
    }
    return j;
}

const std::vector<std::pair<std::string, std::string>>& fixture_summaries() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"quarter_sphere_free", "unit quarter sphere in the right-angle wedge, free boundary"},
        {"sphere_cap_capillary", "capillary spherical lune, contact data (-0.3, -0.4)"},
        {"ellipsoid_free", "ellipsoidal Wulff lune centered on the edge, free boundary"},
        {"ellipsoid_capillary_oblique",
         "capillary ellipsoidal lune in a 120-degree wedge, contact data (-0.25, -0.35)"},
        {"blend_free", "superquadric-blend Wulff lune, free boundary"},
        {"blend_capillary", "capillary superquadric-blend lune, contact data (-0.2, -0.3)"},
        {"shifted_free", "shifted-norm Wulff lune (translated sphere), free boundary"},
        {"perturbed_quarter_sphere",
         "interior normal bump on the quarter sphere; strict inequalities"},
        {"perturbed_ellipsoid", "interior normal bump on the ellipsoidal lune; strict inequalities"},
        {"noncapillary_edge_bump",
         "edge-tilting bump that breaks the contact condition; expected failures"},
        {"arc_free", "planar quarter circle, free boundary"},
        {"arc_capillary", "planar capillary circular arc, contact data (-0.3, -0.4)"},
        {"arc_ellipse_free", "planar Wulff ellipse arc, free boundary"},
        {"arc_blend_capillary", "planar superquadric-blend capillary arc"},
        {"arc_shifted_free", "planar shifted-norm arc (translated circle), free boundary"},
        {"dumbbell_arc", "convex polar-graph arc with varying curvature, free boundary"},
        {"perturbed_arc", "interior bump on the quarter circle; strict inequalities"},
    };
    return table;
}

}  // namespace

std::vector<std::string> fixture_names() {
    std::vector<std::string> names;
    for (const auto& [name, summary] : fixture_summaries()) names.push_back(name);
    return names;
}

bool is_fixture(const std::string& name) {
    for (const auto& [n, s] : fixture_summaries())
        if (n == name) return true;
    return false;
}

ScenarioSpec make_fixture(const std::string& name) {
    json j = fixture_json(name);
    // Late-bound capillary centers: -r k (the Wulff shape realizing omega0).
    if (j["patch"].contains("center") && j["patch"]["center"].is_string()) {
        NormSpec norm = norm_from_json(j["norm"], "/norm");
        Wedge wedge = wedge_from_json(j["wedge"], "/wedge");
        std::array<Real, 2> omega0{j["omega0"][0].get<Real>(), j["omega0"][1].get<Real>()};
        KVectorResult kr = solve_k_vector(norm, wedge, omega0);
        if (!kr.found) throw ConfigError("fixture omega0 admits no k", "/omega0");
        Vec center = -j["patch"].value("radius", 1.0) * kr.k;
        j["patch"]["center"] = vec_to_json(center);
    }
    ScenarioSpec spec = scenario_from_json(j);
    for (const auto& [n, summary] : fixture_summaries())
        if (n == name) spec.summary = summary;
    return spec;
}

std::string list_fixtures_text(const std::string& suite_filter) {
    std::ostringstream os;
    int count = 0;
    for (const auto& [name, summary] : fixture_summaries()) {
        if (!suite_filter.empty()) {
            json j = fixture_json(name);
            bool match = false;
            for (const auto& s : j["suites"]) match |= (s.get<std::string>() == suite_filter);
            if (!match) continue;
        }
        os << name << "\n    " << summary << "\n";
        ++count;
    }
    if (count == 0) os << "(no fixtures match)\n";
    return os.str();
}

std::optional<CurveScenario> oracle_analogue(const ScenarioSpec& spec) {
    const VerificationScenario& s = spec.scenario;
    if (s.norm.ambient_dim() != 2) return std::nullopt;
    const PatchSpec& ps = spec.patch_spec;
    if (ps.kind == "wulff") {
        CurveScenario cs;
        switch (s.norm.family()) {
            case NormFamily::Isotropic:
            case NormFamily::Shifted:
                cs = oracle_circle_sector(s.wedge, s.norm, ps.center, ps.radius);
                break;
            case NormFamily::Ellipsoidal:
                cs = oracle_ellipse_sector(s.wedge, s.norm.ellipsoid_matrix(), ps.center,
                                           ps.radius);
                break;
            default:
                return std::nullopt;  // no closed-form curve geometry
        }
        cs.k = s.k_or_zero();
        return cs;
    }
    if (ps.kind == "custom" && ps.custom_name == "polar_graph") {
        if (s.norm.family() != NormFamily::Isotropic) return std::nullopt;
        return oracle_polar_sector(s.wedge, ps.rho0, ps.amp, ps.m);
    }
    return std::nullopt;
}

// --- run driver ----------------------------------------------------------------

Report run_suite(const ScenarioSpec& spec, const std::string& suite, const RunConfig& config) {
    const VerificationScenario& s = spec.scenario;
    try {
        if (suite == "geometry") {
            Report rep;
            rep.suite = "geometry";
            auto info = [&](const std::string& name, Real value) {
                CheckRecord rec;
                rec.name = name;
                rec.lhs = value;
                rec.rhs = value;
                rec.verdict = Verdict::Pass;
                rep.add(rec);
            };
            info("anisotropic_area", anisotropic_area(s.patch, s.norm, s.levels - 1));
            info("enclosed_volume", enclosed_volume(s.patch, s.wedge, s.levels - 1));
            info("energy", energy(s, s.levels - 1));
            for (const EdgeTag& tag : s.patch.edges)
                info("wetted_area_face" + std::to_string(tag.face),
                     wetted_area(s.patch, s.wedge, tag.face, s.levels - 1));
            return rep;
        }
        if (suite == "duality")
            return verify_duality(s.norm, config.duality_samples, config.seed);
        if (suite == "minkowski") {
            Report rep;
            rep.suite = "minkowski";
            for (int r = 1; r <= s.surface_dim(); ++r)
                for (const CheckRecord& rec : minkowski_residual(s, r).checks) rep.add(rec);
            return rep;
        }
        if (suite == "flux") return flux_vanishing_check(s);
        if (suite == "hk") return hk_check(s);
        if (suite == "flow") return flow_law_check(s);
        if (suite == "monotonicity")
            return monotonicity_check(s.norm, config.monotonicity_trials, config.seed ^ 0xa5a5ull);
        if (suite == "coverage") return coverage_check(s, config.coverage_samples);
        if (suite == "elliptic") return elliptic_point_search(s);
        if (suite == "alexandrov") {
            Report rep;
            rep.suite = "alexandrov";
            for (int r = 1; r <= s.surface_dim(); ++r) {
                Report sub = alexandrov_pipeline(s, r);
                for (CheckRecord rec : sub.checks) {
                    rec.name = "r" + std::to_string(r) + "_" + rec.name;
                    rep.add(rec);
                }
            }
            return rep;
        }
        if (suite == "wulff_fit") return wulff_fit(s);
        if (suite == "fbar_reduction") return fbar_reduction_check(s);
        if (suite == "first_variation")
            return first_variation_check(s, separable_sin2_bump(s.surface_dim(), 0.2));
        if (suite == "oracle") {
            std::optional<CurveScenario> cs = oracle_analogue(spec);
            if (!cs) {
                Report rep;
                rep.suite = "oracle";
                CheckRecord rec;
                rec.name = "analogue_available";
                rec.verdict = Verdict::Inconclusive;
                rec.note = "no closed-form curve analogue for this fixture";
                rep.add(rec);
                return rep;
            }
            Report rep = oracle_suite(*cs, config.mc_samples, config.seed ^ 0xabcd);
            rep.suite = "oracle";
            // Main path vs oracle on the shared fixture.
            Report mink = minkowski_residual(s, 1);
            OracleIdentity om = curve_minkowski(*cs);
            rep.add(identity_check("main_vs_oracle_lhs", mink.checks.front().lhs, om.lhs, 1e-9));
            rep.add(identity_check("main_vs_oracle_rhs", mink.checks.front().rhs, om.rhs, 1e-9));
            OracleHk ohk = curve_hk(*cs);
            const Real vol = enclosed_volume(s.patch, s.wedge, s.levels - 1);
            rep.add(identity_check("main_vs_oracle_area", 2.0 * vol, ohk.rhs, 1e-9));
            return rep;
        }
        throw ConfigError("unknown suite '" + suite + "'", "/suites");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        Report rep;
        rep.suite = suite;
        CheckRecord rec;
        rec.name = suite + "_error";
        rec.verdict = Verdict::Fail;
        rec.note = err.what();
        rep.add(rec);
        return rep;
    }
}

namespace {

json report_to_json(const Report& rep, bool expected_fail, bool strict) {
    json checks = json::array();
    for (const CheckRecord& c : rep.checks) {
        json rec;
        rec["name"] = c.name;
        rec["lhs"] = c.lhs;
        rec["rhs"] = c.rhs;
        rec["residual_abs"] = c.residual_abs;
        rec["residual_rel"] = c.residual_rel;
        rec["level"] = c.level;
        if (std::isfinite(c.rate))
            rec["rate"] = c.rate;
        else
            rec["rate"] = c.rate > 0 ? "converged" : "n/a";
        rec["verdict"] = to_string(c.verdict);
        rec["expected_fail"] = c.expected_fail;
        if (!c.note.empty()) rec["note"] = c.note;
        checks.push_back(rec);
    }
    const bool ok = expected_fail ? !rep.ok(strict) : rep.ok(strict);
    return json{{"name", rep.suite},
                {"verdict", to_string(rep.verdict())},
                {"expected_fail", expected_fail},
                {"ok", ok},
                {"checks", checks}};
}

void write_csv(const std::filesystem::path& path, const Report& rep) {
    std::ofstream out(path);
    out << "name,lhs,rhs,residual_abs,residual_rel,level,rate,verdict,expected_fail,note\n";
    for (const CheckRecord& c : rep.checks) {
        std::ostringstream line;
        line.precision(17);
        line << c.name << ',' << c.lhs << ',' << c.rhs << ',' << c.residual_abs << ','
             << c.residual_rel << ',' << c.level << ',' << c.rate << ',' << to_string(c.verdict)
             << ',' << (c.expected_fail ? 1 : 0) << ',' << '"' << c.note << '"' << '\n';
        out << line.str();
    }
}

}  // namespace

RunResult run(const RunConfig& config) {
    RunResult result;
    ScenarioSpec spec;
    try {
        if (is_fixture(config.scenario)) {
            spec = make_fixture(config.scenario);
        } else {
            std::ifstream in(config.scenario);
            if (!in) throw ConfigError("cannot open scenario file '" + config.scenario + "'");
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& err) {
                throw ConfigError(std::string("scenario JSON parse error: ") + err.what());
            }
            spec = scenario_from_json(j);
        }
        spec.scenario.levels = config.levels;
        spec.scenario.seed = config.seed;
        for (const auto& [key, value] : config.tol_overrides) spec.scenario.tol.set(key, value);
    } catch (const ConfigError& err) {
        result.exit_code = 2;
        result.report = json{{"error", err.what()}, {"pointer", err.pointer}};
        return result;
    }

    std::vector<std::string> suites = config.suites.empty() ? spec.suites : config.suites;
    json suites_json = json::array();
    bool all_ok = true;
    int pass = 0, fail = 0, inconclusive = 0;
    for (const std::string& suite : suites) {
        Report rep;
        try {
            rep = run_suite(spec, suite, config);
        } catch (const ConfigError& err) {
            result.exit_code = 2;
            result.report = json{{"error", err.what()}, {"pointer", err.pointer}};
            return result;
        }
        const bool expected_fail =
            std::find(spec.expected_fail.begin(), spec.expected_fail.end(), suite) !=
            spec.expected_fail.end();
        json jrep = report_to_json(rep, expected_fail, config.strict);
        all_ok &= jrep["ok"].get<bool>();
        for (const CheckRecord& c : rep.checks) {
            if (c.verdict == Verdict::Pass) ++pass;
            else if (c.verdict == Verdict::Fail) ++fail;
            else ++inconclusive;
        }
        suites_json.push_back(jrep);
        result.suite_reports.push_back(rep);
    }

    json header;
    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        header["timestamp"] = buf;
    }
    header["tool"] = "anisowedge";
    header["scenario"] = spec.scenario.name;
    header["seed"] = config.seed;
    header["levels"] = config.levels;
    header["strict"] = config.strict;
    header["suites"] = suites;

    result.report = json{{"header", header},
                         {"suites", suites_json},
                         {"summary", {{"ok", all_ok},
                                      {"pass", pass},
                                      {"fail", fail},
                                      {"inconclusive", inconclusive}}}};
    result.exit_code = all_ok ? 0 : 1;

    if (config.write_files) {
        std::filesystem::create_directories(config.out_dir);
        std::ofstream out(std::filesystem::path(config.out_dir) / "report.json");
        out << result.report.dump(2) << "\n";
        for (const Report& rep : result.suite_reports)
            write_csv(std::filesystem::path(config.out_dir) /
                          (spec.scenario.name + "_" + rep.suite + ".csv"),
                      rep);
        std::ofstream summary(std::filesystem::path(config.out_dir) / "summary.txt");
        summary << spec.scenario.name << ": " << (all_ok ? "OK" : "FAIL") << " (" << pass
                << " pass, " << fail << " fail, " << inconclusive << " inconclusive)\n";
    }
    return result;
}

}  // namespace aniso
