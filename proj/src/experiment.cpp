#include "selsense/experiment.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "selsense/wire.hpp"

namespace selsense {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string worker_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%02d", index + 1);
    return buf;
}

WorkerNode make_node(const std::string& id) {
    WorkerNode node(id);
    // Plugin sensors the canonical queries rely on.
    node.register_plugin({"pm25", 1});
    node.register_plugin({"sound", 1});
    node.register_plugin({"heart", 1});
    return node;
}

nlohmann::ordered_json ledger_to_json(const CostLedger& ledger) {
    nlohmann::ordered_json doc;
    doc["mode"] = mode_name(ledger.mode);
    doc["t_td_sec"] = ledger.t_td_sec;
    doc["t_art_sec"] = ledger.t_art_sec;
    doc["t_pi_sec"] = ledger.t_pi_sec;
    doc["t_ncf_sec"] = ledger.t_ncf_sec;
    doc["t_sf_sec"] = ledger.t_sf_sec;
    doc["pt_cpu_sec"] = ledger.pt_cpu_sec;
    doc["tt_dcom_sec"] = ledger.tt_dcom_sec;
    doc["tt_dcom_by_protocol"] = ledger.tt_dcom_by_protocol;
    doc["n_records"] = ledger.n_records;
    doc["n_pushes"] = ledger.n_pushes;
    doc["storage_bytes"] = ledger.storage_bytes;
    doc["network_bytes"] = ledger.network_bytes;
    doc["e_cpu_j"] = ledger.e_cpu_j;
    doc["e_dcom_j"] = ledger.e_dcom_j;
    doc["e_dcom_s2d_j"] = ledger.e_dcom_s2d_j;
    doc["e_dcom_d2c_j"] = ledger.e_dcom_d2c_j;
    doc["k_j"] = ledger.k_j;
    doc["e_omega_j"] = ledger.e_omega_j;
    doc["e_total_j"] = ledger.e_total_j;
    return doc;
}

nlohmann::ordered_json task_report_to_json(const TaskReport& report) {
    nlohmann::ordered_json doc;
    doc["task_id"] = report.task_id;
    doc["records"] = report.records;
    doc["bytes"] = report.bytes;
    doc["batches"] = report.batches;
    doc["per_worker_records"] = report.per_worker_records;
    return doc;
}

struct ModeOutcome {
    CostLedger ledger;
    TaskReport report;
};

ModeOutcome run_mode_in_process(Coordinator& coord, const std::vector<WorkerNode>& nodes,
                                const Scenario& scenario, const ConsumerRequest& request,
                                Mode mode, const CostParams& params,
                                const ExperimentOptions& options) {
    const std::uint64_t task_id = coord.submit_task(request);
    const Assignment assignment = coord.schedule(task_id);
    const SensingTask task = coord.task(task_id);

    ModeOutcome outcome;
    outcome.ledger.mode = mode;
    RunOptions run_options;
    run_options.theta_context_overhead = options.theta_context_overhead;
    for (const auto& worker_id : assignment.worker_ids) {
        const auto node = std::find_if(nodes.begin(), nodes.end(), [&](const WorkerNode& n) {
            return n.worker_id() == worker_id;
        });
        if (node == nodes.end()) throw Error("UNKNOWN_WORKER", worker_id);
        const std::uint64_t worker_seed = mix64(options.seed ^ hash_string(worker_id));
        NodeRunResult result = node->run(task, scenario, mode, params, worker_seed, run_options);
        for (const auto& batch : result.batches) coord.ingest_batch(batch);
        outcome.ledger += result.ledger;
    }
    outcome.report = coord.task_report(task_id);
    return outcome;
}

ModeOutcome run_mode_networked(Coordinator& coord, CoordinatorServer& server,
                               const std::vector<WorkerNode>& nodes, const Scenario& scenario,
                               const ConsumerRequest& request, Mode mode, const CostParams& params,
                               const ExperimentOptions& options,
                               std::map<std::string, WireClient>& clients) {
    const std::uint64_t task_id = coord.submit_task(request);
    const Assignment assignment = coord.schedule(task_id);
    server.push_assignment(coord.task(task_id), assignment.worker_ids);

    ModeOutcome outcome;
    outcome.ledger.mode = mode;
    RunOptions run_options;
    run_options.theta_context_overhead = options.theta_context_overhead;
    for (const auto& worker_id : assignment.worker_ids) {
        const auto node = std::find_if(nodes.begin(), nodes.end(), [&](const WorkerNode& n) {
            return n.worker_id() == worker_id;
        });
        if (node == nodes.end()) throw Error("UNKNOWN_WORKER", worker_id);
        WireClient& client = clients.at(worker_id);
        const SensingTask task = client.wait_assignment();
        const std::uint64_t worker_seed = mix64(options.seed ^ hash_string(worker_id));
        NodeRunResult result = node->run(task, scenario, mode, params, worker_seed, run_options);
        for (const auto& batch : result.batches) client.send_batch(batch);
        outcome.ledger += result.ledger;
    }

    WireClient control;
    control.connect("127.0.0.1", server.port());
    outcome.report = control.fetch_report(task_id);
    control.close();
    return outcome;
}

} // namespace

ComparisonReport run_experiment(const Scenario& scenario, const std::string& query_text,
                                PushPolicy policy, const CostParams& params,
                                const ExperimentOptions& options) {
    params.validate();
    scenario.validate();
    if (options.workers < 1) throw Error("BAD_OPTIONS", "worker count must be >= 1");

    namespace fs = std::filesystem;
    fs::path data_dir;
    bool scratch_dir = false;
    if (options.data_dir) {
        data_dir = *options.data_dir;
    } else {
        data_dir = fs::temp_directory_path() /
                   ("selsense-run-" + std::to_string(::getpid()) + "-" +
                    std::to_string(reinterpret_cast<std::uintptr_t>(&scenario)));
        scratch_dir = true;
    }

    ComparisonReport report;
    report.scenario_name = scenario.name;
    report.query_text = query_text;
    report.workers = options.workers;
    report.seed = options.seed;

    {
        Coordinator coord(data_dir);
        for (const auto& f : scenario.fences) coord.add_fence(f);

        std::vector<WorkerNode> nodes;
        nodes.reserve(static_cast<size_t>(options.workers));
        for (int i = 0; i < options.workers; ++i) nodes.push_back(make_node(worker_name(i)));

        ConsumerRequest request;
        request.query_text = query_text;
        request.t_td_sec = scenario.total_duration_sec;
        request.worker_cap = options.workers;
        request.push_policy = policy;
        request.t_ncf_sec = 1.0;
        request.t_sf_sec = 1.0;

        if (options.networked) {
            CoordinatorServer server(coord);
            server.start();
            std::map<std::string, WireClient> clients;
            for (const auto& node : nodes) {
                WireClient& client = clients[node.worker_id()];
                client.connect("127.0.0.1", server.port());
                client.register_worker(node.worker_id(), node.field_catalog());
            }
            if (options.run_theta) {
                const auto outcome = run_mode_networked(coord, server, nodes, scenario, request,
                                                        Mode::Theta, params, options, clients);
                report.theta = outcome.ledger;
                report.theta_task_report = outcome.report;
            }
            if (options.run_psi) {
                const auto outcome = run_mode_networked(coord, server, nodes, scenario, request,
                                                        Mode::Psi, params, options, clients);
                report.psi = outcome.ledger;
                report.psi_task_report = outcome.report;
            }
            for (auto& [id, client] : clients) client.close();
            server.stop();
        } else {
            for (const auto& node : nodes) {
                coord.register_worker({node.worker_id(), node.field_catalog(), true});
            }
            if (options.run_theta) {
                const auto outcome = run_mode_in_process(coord, nodes, scenario, request,
                                                         Mode::Theta, params, options);
                report.theta = outcome.ledger;
                report.theta_task_report = outcome.report;
            }
            if (options.run_psi) {
                const auto outcome = run_mode_in_process(coord, nodes, scenario, request,
                                                         Mode::Psi, params, options);
                report.psi = outcome.ledger;
                report.psi_task_report = outcome.report;
            }
        }
    }

    if (scratch_dir) {
        std::error_code ec;
        fs::remove_all(data_dir, ec);
    }

    report.has_theta = options.run_theta;
    report.has_psi = options.run_psi;
    if (report.has_theta && report.has_psi) {
        report.savings = saving_ratios(report.psi, report.theta);
    }
    return report;
}

std::string report_to_csv(const ComparisonReport& report) {
    std::string out = "scenario,mode,energy_J,storage_B,network_B,energy_ratio,storage_ratio,"
                      "network_ratio\n";
    auto row = [&](const CostLedger& ledger, double e_ratio, double s_ratio, double n_ratio) {
        out += report.scenario_name;
        out += ',';
        out += mode_name(ledger.mode);
        out += ',';
        out += fmt("%.6f", ledger.e_total_j);
        out += ',';
        out += fmt("%.0f", ledger.storage_bytes);
        out += ',';
        out += fmt("%.0f", ledger.network_bytes);
        out += ',';
        out += fmt("%.6f", e_ratio);
        out += ',';
        out += fmt("%.6f", s_ratio);
        out += ',';
        out += fmt("%.6f", n_ratio);
        out += '\n';
    };
    const bool both = report.has_theta && report.has_psi;
    if (report.has_theta) row(report.theta, 1.0, 1.0, 1.0);
    if (report.has_psi) {
        row(report.psi, both ? report.savings.energy_ratio : 1.0,
            both ? report.savings.storage_ratio : 1.0,
            both ? report.savings.network_ratio : 1.0);
    }
    return out;
}

std::string report_summary_text(const ComparisonReport& report) {
    const bool both = report.has_theta && report.has_psi;
    std::string out;
    out += "scenario: " + report.scenario_name + "\n";
    out += "query:    " + report.query_text + "\n";
    out += "workers:  " + std::to_string(report.workers) + "\n";
    if (report.has_theta) {
        out += "theta:    records=" + std::to_string(report.theta.n_records) +
               " pushes=" + std::to_string(report.theta.n_pushes) +
               " energy=" + fmt("%.6f", report.theta.e_total_j) +
               " J storage=" + fmt("%.0f", report.theta.storage_bytes) +
               " B network=" + fmt("%.0f", report.theta.network_bytes) + " B\n";
    }
    if (report.has_psi) {
        out += "psi:      records=" + std::to_string(report.psi.n_records) +
               " pushes=" + std::to_string(report.psi.n_pushes) +
               " energy=" + fmt("%.6f", report.psi.e_total_j) +
               " J storage=" + fmt("%.0f", report.psi.storage_bytes) +
               " B network=" + fmt("%.0f", report.psi.network_bytes) + " B\n";
    }
    if (both) {
        out += "reduction: energy=" + fmt("%.3f", report.savings.energy_reduction_percent) +
               "% storage=" + fmt("%.3f", report.savings.storage_reduction_percent) +
               "% network=" + fmt("%.3f", report.savings.network_reduction_percent) + "%\n";
    }
    return out;
}

std::string report_to_json_text(const ComparisonReport& report) {
    nlohmann::ordered_json doc;
    doc["scenario"] = report.scenario_name;
    doc["query"] = report.query_text;
    doc["workers"] = report.workers;
    doc["seed"] = report.seed;
    doc["has_theta"] = report.has_theta;
    doc["has_psi"] = report.has_psi;
    doc["theta"] = ledger_to_json(report.theta);
    doc["psi"] = ledger_to_json(report.psi);
    nlohmann::ordered_json savings;
    savings["energy_ratio"] = report.savings.energy_ratio;
    savings["storage_ratio"] = report.savings.storage_ratio;
    savings["network_ratio"] = report.savings.network_ratio;
    savings["energy_reduction_percent"] = report.savings.energy_reduction_percent;
    savings["storage_reduction_percent"] = report.savings.storage_reduction_percent;
    savings["network_reduction_percent"] = report.savings.network_reduction_percent;
    doc["savings"] = std::move(savings);
    doc["theta_task_report"] = task_report_to_json(report.theta_task_report);
    doc["psi_task_report"] = task_report_to_json(report.psi_task_report);
    return doc.dump(2) + "\n";
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IO_ERROR", "cannot write " + path);
    out << content;
    if (!out) throw Error("IO_ERROR", "write failed for " + path);
}

std::string with_extension(const std::string& path, const char* ext) {
    return std::filesystem::path(path).replace_extension(ext).string();
}

} // namespace

void emit_report(const ComparisonReport& report, const std::string& format,
                 const std::string& out_path) {
    if (format == "csv") {
        write_file(out_path, report_to_csv(report));
        write_file(with_extension(out_path, ".txt"), report_summary_text(report));
        return;
    }
    if (format == "json") {
        write_file(out_path, report_to_json_text(report));
        return;
    }
    throw Error("BAD_FORMAT", "unknown report format: " + format);
}

} // namespace selsense
