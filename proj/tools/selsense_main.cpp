#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "selsense/experiment.hpp"

namespace {

using namespace selsense;

int run(int argc, char** argv) {
    CLI::App app{"Trace-driven selective-sensing simulator: runs theta/psi experiment "
                 "pairs over scenario timelines and reports energy/storage/network savings."};

    std::string scenario_name;
    std::string trace_path;
    std::string scenario_json_path;
    std::string query_text;
    std::string policy_name;
    std::string mode = "both";
    std::string params_path;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_path;
    std::string format = "csv";
    bool net = false;
    bool bus_full_cycles = false;
    bool theta_context_overhead = false;
    std::string emit_trace_path;
    std::string emit_scenario_path;
    std::string emit_params_path;
    std::string fences_path;

    app.add_option("--scenario", scenario_name, "Built-in scenario: bus, rehab, park, cycle-commute");
    app.add_option("--trace", trace_path, "Per-second trace CSV to run instead of a built-in");
    app.add_option("--scenario-json", scenario_json_path, "Segment-list scenario JSON to run");
    app.add_option("--query", query_text, "Query text (default: the scenario's canonical query)");
    app.add_option("--policy", policy_name,
                   "Push policy: DEFERRED_WIFI, RAIN_REALTIME_3G or IMMEDIATE");
    app.add_option("--mode", mode, "theta, psi or both")->check(CLI::IsMember({"theta", "psi", "both"}));
    app.add_option("--params", params_path, "Cost parameter JSON file");
    app.add_option("--seed", seed, "Sensor generator seed");
    app.add_option("--workers", workers, "Number of worker nodes")->check(CLI::PositiveNumber);
    app.add_option("--out", out_path, "Report output path (default <scenario>_report.<format>)");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--net", net, "Run the coordinator over the wire protocol on localhost");
    app.add_flag("--bus-full-cycles", bus_full_cycles,
                 "Bus scenario: ten full move+stop cycles (70 min) instead of the 60-min cut");
    app.add_flag("--theta-context-overhead", theta_context_overhead,
                 "Charge the context-machinery overhead in theta mode without using it");
    app.add_option("--emit-trace", emit_trace_path, "Write the scenario's trace CSV and exit");
    app.add_option("--emit-scenario-json", emit_scenario_path,
                   "Write the scenario's segment JSON and exit");
    app.add_option("--emit-params", emit_params_path, "Write the default parameter JSON and exit");
    app.add_option("--fences", fences_path, "Extra fence catalog JSON merged into the scenario");

    CLI11_PARSE(app, argc, argv);

    if (!emit_params_path.empty()) {
        std::ofstream out(emit_params_path, std::ios::binary);
        if (!out) throw Error("IO_ERROR", "cannot write " + emit_params_path);
        out << CostParams::defaults().to_json();
        return 0;
    }

    Scenario scenario;
    if (!trace_path.empty()) {
        scenario = load_scenario_csv(trace_path);
    } else if (!scenario_json_path.empty()) {
        scenario = load_scenario_json(scenario_json_path);
    } else if (!scenario_name.empty()) {
        scenario = builtin_scenario(scenario_name, BusOptions{bus_full_cycles});
    } else {
        throw Error("BAD_OPTIONS", "one of --scenario, --trace or --scenario-json is required");
    }
    if (!fences_path.empty()) {
        for (auto& f : load_fence_catalog(fences_path)) scenario.fences.push_back(std::move(f));
    }

    if (!emit_trace_path.empty()) {
        std::ofstream out(emit_trace_path, std::ios::binary);
        if (!out) throw Error("IO_ERROR", "cannot write " + emit_trace_path);
        out << trace_to_csv(scenario);
        return 0;
    }
    if (!emit_scenario_path.empty()) {
        std::ofstream out(emit_scenario_path, std::ios::binary);
        if (!out) throw Error("IO_ERROR", "cannot write " + emit_scenario_path);
        out << scenario_to_json(scenario);
        return 0;
    }

    if (query_text.empty()) {
        if (scenario_name.empty()) {
            throw Error("BAD_OPTIONS", "--query is required for custom scenarios");
        }
        query_text = canonical_query(scenario_name);
    }

    PushPolicy policy = PushPolicy::Immediate;
    if (!policy_name.empty()) {
        policy = push_policy_from_name(policy_name);
    } else if (scenario_name == "bus") {
        policy = PushPolicy::RainRealtime3G;
    }

    const CostParams params =
        params_path.empty() ? CostParams::defaults() : CostParams::load(params_path);

    ExperimentOptions options;
    options.workers = workers;
    options.seed = seed;
    options.run_theta = mode != "psi";
    options.run_psi = mode != "theta";
    options.networked = net;
    options.theta_context_overhead = theta_context_overhead;

    const ComparisonReport report = run_experiment(scenario, query_text, policy, params, options);

    if (out_path.empty()) out_path = scenario.name + "_report." + format;
    emit_report(report, format, out_path);

    std::cout << report_summary_text(report);
    std::cout << "report written to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const selsense::Error& e) {
        nlohmann::ordered_json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = "INTERNAL";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
