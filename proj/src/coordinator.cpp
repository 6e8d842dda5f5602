#include "selsense/coordinator.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace selsense {

std::string record_to_json(const Record& record) {
    nlohmann::ordered_json doc;
    doc["t_sec"] = record.t_sec;
    doc["worker_id"] = record.worker_id;
    nlohmann::ordered_json fields;
    for (const auto& [name, values] : record.fields) fields[name] = values;
    doc["fields"] = std::move(fields);
    return doc.dump();
}

Record record_from_json(const std::string& json_text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("BAD_RECORD", e.what());
    }
    Record rec;
    rec.t_sec = doc.at("t_sec").get<double>();
    rec.worker_id = doc.at("worker_id").get<std::string>();
    for (const auto& [name, values] : doc.at("fields").items()) {
        rec.fields.emplace_back(name, values.get<std::vector<double>>());
    }
    return rec;
}

Coordinator::Coordinator(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
    std::error_code ec;
    std::filesystem::create_directories(data_dir_, ec);
    if (ec) throw Error("IO_ERROR", "cannot create data dir: " + data_dir_.string());
}

void Coordinator::add_fence(const GeoFence& fence) {
    validate_fence(fence);
    std::lock_guard lock(mu_);
    fences_.push_back(fence);
}

void Coordinator::register_worker(const WorkerInfo& info) {
    if (info.worker_id.empty()) throw Error("BAD_WORKER", "worker id must be non-empty");
    std::lock_guard lock(mu_);
    if (workers_.contains(info.worker_id)) {
        throw Error("DUPLICATE_WORKER", "worker '" + info.worker_id + "' already registered");
    }
    workers_[info.worker_id] = info;
}

std::size_t Coordinator::worker_count() const {
    std::lock_guard lock(mu_);
    return workers_.size();
}

std::set<std::string> Coordinator::union_catalog_locked() const {
    std::set<std::string> fields;
    for (const auto& [id, info] : workers_) fields.insert(info.sensors.begin(), info.sensors.end());
    return fields;
}

std::uint64_t Coordinator::submit_task(const ConsumerRequest& request) {
    QueryAst ast = parse_query(request.query_text); // throws ParseError on bad text
    ast.push_policy = request.push_policy;

    std::lock_guard lock(mu_);
    const ValidationReport report = validate_query(ast, union_catalog_locked(), fences_);
    if (!report.ok) {
        std::string detail;
        for (const auto& issue : report.issues) {
            if (!detail.empty()) detail += "; ";
            detail += issue.code + ": " + issue.message;
        }
        throw Error("INVALID_QUERY", detail);
    }

    TaskState state;
    state.task.task_id = next_task_id_++;
    state.task.query = std::move(ast);
    state.task.query_text = request.query_text;
    state.task.t_td_sec = request.t_td_sec;
    state.task.worker_cap = request.worker_cap;
    state.task.push_policy = request.push_policy;
    state.task.t_ncf_sec = request.t_ncf_sec;
    state.task.t_sf_sec = request.t_sf_sec;
    state.task.validate();
    state.report.task_id = state.task.task_id;

    const std::uint64_t id = state.task.task_id;
    tasks_.emplace(id, std::move(state));
    return id;
}

const Coordinator::TaskState& Coordinator::task_state(std::uint64_t task_id) const {
    const auto it = tasks_.find(task_id);
    if (it == tasks_.end()) {
        throw Error("UNKNOWN_TASK", "no task with id " + std::to_string(task_id));
    }
    return it->second;
}

const SensingTask& Coordinator::task(std::uint64_t task_id) const {
    std::lock_guard lock(mu_);
    return task_state(task_id).task;
}

TaskStatus Coordinator::task_status(std::uint64_t task_id) const {
    std::lock_guard lock(mu_);
    return task_state(task_id).status;
}

Assignment Coordinator::schedule(std::uint64_t task_id) {
    std::lock_guard lock(mu_);
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) {
        throw Error("UNKNOWN_TASK", "no task with id " + std::to_string(task_id));
    }
    TaskState& state = it->second;

    // Eligibility: available and advertising every field the query reads,
    // both the selected fields and any numeric-compare gate fields.
    std::set<std::string> needed;
    for (const auto& f : state.task.query.selected_fields) needed.insert(f.name);
    const auto gate_fields = gate_numeric_fields(state.task.query.gate);
    needed.insert(gate_fields.begin(), gate_fields.end());

    std::vector<std::string> eligible;
    for (const auto& [id, info] : workers_) { // std::map iterates in ascending id order
        if (!info.available) continue;
        const bool capable = std::all_of(needed.begin(), needed.end(), [&](const std::string& f) {
            return info.sensors.contains(f);
        });
        if (capable) eligible.push_back(id);
    }
    if (eligible.empty()) throw Error("NO_CAPACITY", "no eligible worker for task");

    const auto take = std::min<std::size_t>(eligible.size(),
                                            static_cast<std::size_t>(state.task.worker_cap));
    Assignment assignment;
    assignment.task_id = task_id;
    assignment.worker_ids.assign(eligible.begin(), eligible.begin() + static_cast<long>(take));
    state.assigned = assignment.worker_ids;
    state.status = TaskStatus::Active;
    return assignment;
}

std::filesystem::path Coordinator::task_log_path(std::uint64_t task_id) const {
    return data_dir_ / ("task_" + std::to_string(task_id) + ".ndjson");
}

BatchAck Coordinator::ingest_batch(const DataBatch& batch) {
    std::lock_guard lock(mu_);
    auto it = tasks_.find(batch.task_id);
    if (it == tasks_.end()) {
        throw Error("UNKNOWN_TASK", "no task with id " + std::to_string(batch.task_id));
    }
    TaskState& state = it->second;
    if (state.status != TaskStatus::Active) {
        throw Error("TASK_NOT_ACTIVE", "task " + std::to_string(batch.task_id) + " is not active");
    }
    if (!std::binary_search(state.assigned.begin(), state.assigned.end(), batch.worker_id)) {
        throw Error("UNKNOWN_ASSIGNMENT",
                    "worker '" + batch.worker_id + "' not assigned to task " +
                        std::to_string(batch.task_id));
    }
    if (state.seen_batches.contains(batch.batch_id)) {
        return BatchAck{batch.batch_id, false}; // replay: ack without re-storing
    }

    std::ofstream log(task_log_path(batch.task_id), std::ios::app);
    if (!log) throw Error("IO_ERROR", "cannot append to " + task_log_path(batch.task_id).string());
    for (const auto& br : batch.records) {
        const std::string record_json = record_to_json(br.record);
        nlohmann::ordered_json line;
        line["batch_id"] = batch.batch_id;
        line["worker_id"] = batch.worker_id;
        line["record"] = nlohmann::ordered_json::parse(record_json);
        log << line.dump() << '\n';
        state.report.bytes += static_cast<std::int64_t>(record_json.size());
    }
    log.flush();

    state.seen_batches.insert(batch.batch_id);
    state.report.records += static_cast<std::int64_t>(batch.records.size());
    state.report.batches += 1;
    state.report.per_worker_records[batch.worker_id] +=
        static_cast<std::int64_t>(batch.records.size());
    return BatchAck{batch.batch_id, true};
}

TaskReport Coordinator::task_report(std::uint64_t task_id) const {
    std::lock_guard lock(mu_);
    return task_state(task_id).report;
}

TaskReport Coordinator::report_from_log(std::uint64_t task_id) const {
    std::lock_guard lock(mu_);
    task_state(task_id); // existence check
    TaskReport report;
    report.task_id = task_id;
    std::ifstream log(task_log_path(task_id));
    if (!log) return report; // nothing ingested yet
    std::set<std::string> batch_ids;
    std::string line;
    while (std::getline(log, line)) {
        if (line.empty()) continue;
        nlohmann::ordered_json doc;
        try {
            doc = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("BAD_LOG", e.what());
        }
        report.records += 1;
        report.bytes += static_cast<std::int64_t>(doc.at("record").dump().size());
        report.per_worker_records[doc.at("worker_id").get<std::string>()] += 1;
        batch_ids.insert(doc.at("batch_id").get<std::string>());
    }
    report.batches = static_cast<std::int64_t>(batch_ids.size());
    return report;
}

} // namespace selsense
