#include "aniso/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace aniso;

int main(int argc, char** argv) {
    CLI::App app{"anisotropic capillary geometry verification in a wedge"};
    app.require_subcommand(1);

    RunConfig config;
    std::string suites_csv;
    std::vector<std::string> tol_raw;

    CLI::App* run_cmd = app.add_subcommand("run", "run verification suites on a scenario");
    run_cmd->add_option("--scenario", config.scenario, "fixture name or scenario JSON path")
        ->required();
    run_cmd->add_option("--suite", suites_csv, "comma-separated suite list (default: scenario's)");
    run_cmd->add_option("--levels", config.levels, "quadrature refinement levels (>= 2)");
    run_cmd->add_option("--seed", config.seed, "random seed for the sampling suites");
    run_cmd->add_option("--out", config.out_dir, "output directory for report.json and CSVs");
    run_cmd->add_option("--tol", tol_raw, "tolerance override KEY=VALUE (repeatable)");
    run_cmd->add_flag("--strict", config.strict, "treat Inconclusive verdicts as failures");
    run_cmd->add_option("--duality-samples", config.duality_samples,
                        "sample count for the duality suite");
    run_cmd->add_option("--monotonicity-trials", config.monotonicity_trials,
                        "trial count for the monotonicity suite");
    run_cmd->add_option("--coverage-samples", config.coverage_samples,
                        "interior sample count for the coverage suite");
    run_cmd->add_option("--mc-samples", config.mc_samples,
                        "Monte-Carlo sample count for the oracle suite");

    std::string filter;
    CLI::App* list_cmd = app.add_subcommand("fixtures", "list the built-in scenario catalog");
    list_cmd->add_option("--suite", filter, "only fixtures that include this suite");

    CLI11_PARSE(app, argc, argv);

    if (list_cmd->parsed()) {
        std::cout << list_fixtures_text(filter);
        return 0;
    }

    if (!suites_csv.empty()) {
        std::stringstream ss(suites_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) config.suites.push_back(item);
    }
    for (const std::string& raw : tol_raw) {
        const auto eq = raw.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --tol expects KEY=VALUE, got '" << raw << "'\n";
            return 2;
        }
        try {
            config.tol_overrides.emplace_back(raw.substr(0, eq), std::stod(raw.substr(eq + 1)));
        } catch (const std::exception&) {
            std::cerr << "error: cannot parse tolerance value in '" << raw << "'\n";
            return 2;
        }
    }

    RunResult result = run(config);
    if (result.exit_code == 2) {
        std::cerr << "config error: " << result.report.value("error", std::string("unknown"));
        const std::string ptr = result.report.value("pointer", std::string());
        if (!ptr.empty()) std::cerr << " (at " << ptr << ")";
        std::cerr << "\n";
        return 2;
    }

    for (const auto& suite : result.report["suites"]) {
        std::printf("%-18s %-12s %s\n", suite["name"].get<std::string>().c_str(),
                    suite["verdict"].get<std::string>().c_str(),
                    suite["ok"].get<bool>() ? "ok" : "NOT OK");
    }
    const auto& summary = result.report["summary"];
    std::printf("summary: %s (%d pass, %d fail, %d inconclusive)\n",
                summary["ok"].get<bool>() ? "OK" : "FAIL", summary["pass"].get<int>(),
                summary["fail"].get<int>(), summary["inconclusive"].get<int>());
    return result.exit_code;
}
