#pragma once

#include <optional>
#include <string>

#include "selsense/coordinator.hpp"
#include "selsense/scenario.hpp"
#include "selsense/worker.hpp"

namespace selsense {

// One scenario's paired non-selective/selective outcome.
struct ComparisonReport {
    std::string scenario_name;
    std::string query_text;
    int workers = 1;
    std::uint64_t seed = 0;
    bool has_theta = false;
    bool has_psi = false;
    CostLedger theta;
    CostLedger psi;
    SavingsReport savings; // meaningful only when both modes ran
    TaskReport theta_task_report;
    TaskReport psi_task_report;
};

struct ExperimentOptions {
    int workers = 1;
    std::uint64_t seed = 1;
    bool run_theta = true;
    bool run_psi = true;
    bool networked = false;             // push batches through the wire protocol
    bool theta_context_overhead = false; // context machinery on but unused in theta
    std::optional<std::string> data_dir; // coordinator log directory (default: temp)
};

// Builds a coordinator and worker fleet, submits the query as a task, runs
// the requested modes over the scenario, and assembles the paired report.
// Fully deterministic for fixed (scenario, query, params, options).
ComparisonReport run_experiment(const Scenario& scenario, const std::string& query_text,
                                PushPolicy policy, const CostParams& params,
                                const ExperimentOptions& options = {});

// File emission. "csv" writes the two-row comparison table plus a .txt
// summary next to it; "json" writes a single document. Re-running with
// equal inputs produces byte-identical files.
void emit_report(const ComparisonReport& report, const std::string& format,
                 const std::string& out_path);

std::string report_to_csv(const ComparisonReport& report);
std::string report_to_json_text(const ComparisonReport& report);
std::string report_summary_text(const ComparisonReport& report);

} // namespace selsense
