#pragma once

#include "aniso/oracle.hpp"
#include "aniso/verify.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace aniso {

// Serializable description of a patch; enough to rebuild it and, for curve
// fixtures, to derive the matching oracle scenario.
struct PatchSpec {
    std::string kind = "wulff";  // wulff | perturbed | custom
    Vec center;
    Real radius = 1.0;
    std::string bump_kind = "separable_sin2";  // or edge_tilt
    Real bump_amplitude = 0.0;
    Real bump_skew = 0.0;
    std::string custom_name;  // polar_graph
    Real rho0 = 1.0, amp = 0.0;
    int m = 2;
    QuadratureSpec quad;
};

struct ScenarioSpec {
    VerificationScenario scenario;
    PatchSpec patch_spec;
    std::vector<std::string> suites;
    std::vector<std::string> expected_fail;  // suites whose failure is the point
    std::string summary;                     // one-line provenance for the catalog
};

// --- JSON (config schema shipped under schemas/) -------------------------------

nlohmann::json norm_to_json(const NormSpec& norm);
NormSpec norm_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json wedge_to_json(const Wedge& w);
Wedge wedge_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

// --- fixture catalog -----------------------------------------------------------

std::vector<std::string> fixture_names();
ScenarioSpec make_fixture(const std::string& name);
bool is_fixture(const std::string& name);

// Catalog listing with one-line summaries; optional suite filter.
std::string list_fixtures_text(const std::string& suite_filter = "");

// Matching oracle scenario for curve fixtures (empty optional when the
// fixture has no closed-form analogue).
std::optional<CurveScenario> oracle_analogue(const ScenarioSpec& spec);

// --- run driver ----------------------------------------------------------------

struct RunConfig {
    std::string scenario;  // fixture name or path to a scenario JSON file
    std::vector<std::string> suites;  // empty: the scenario's defaults
    std::string out_dir = "out";
    int levels = 3;
    std::uint64_t seed = 20240601;
    std::vector<std::pair<std::string, Real>> tol_overrides;
    bool strict = false;
    int duality_samples = 10000;
    int monotonicity_trials = 1000;
    int coverage_samples = 1000;
    long mc_samples = 10000000;
    bool write_files = true;
};

struct RunResult {
    int exit_code = 0;  // 0 pass, 1 fail, 2 config error
    nlohmann::json report;
    std::vector<Report> suite_reports;
};

RunResult run(const RunConfig& config);

// Target of a whole suite on a scenario; errors become Fail records.
Report run_suite(const ScenarioSpec& spec, const std::string& suite, const RunConfig& config);

}  // namespace aniso
