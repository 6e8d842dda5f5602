#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "selsense/geo.hpp"
#include "selsense/task.hpp"
#include "selsense/worker.hpp"

namespace selsense {

struct WorkerInfo {
    std::string worker_id;
    std::set<std::string> sensors;
    bool available = true;
};

struct Assignment {
    std::uint64_t task_id = 0;
    std::vector<std::string> worker_ids; // ascending order
};

struct BatchAck {
    std::string batch_id;
    bool stored = false; // false when the batch_id was replayed
};

struct TaskReport {
    std::uint64_t task_id = 0;
    std::int64_t records = 0;
    std::int64_t bytes = 0;
    std::int64_t batches = 0;
    std::map<std::string, std::int64_t> per_worker_records;

    bool operator==(const TaskReport&) const = default;
};

// What a consumer submits: the query text plus schedule parameters.
struct ConsumerRequest {
    std::string query_text;
    double t_td_sec = 0.0;
    int worker_cap = 1;
    PushPolicy push_policy = PushPolicy::Immediate;
    double t_ncf_sec = 1.0;
    double t_sf_sec = 1.0;
};

enum class TaskStatus { Pending, Active };

// Canonical serialization used for persisted records, wire batches, and the
// report byte accounting. Both ingest paths meter the same bytes.
std::string record_to_json(const Record& record);
Record record_from_json(const std::string& json_text);

// The cloud-side stand-in: accepts consumer requests, schedules them onto a
// capped set of capable workers, ingests batches idempotently, and persists
// every accepted record to an append-only per-task log.
class Coordinator {
public:
    explicit Coordinator(std::filesystem::path data_dir);

    void add_fence(const GeoFence& fence);
    const std::vector<GeoFence>& fences() const { return fences_; }

    void register_worker(const WorkerInfo& info); // DUPLICATE_WORKER on reuse
    std::size_t worker_count() const;

    // Parses and validates the query against the union of registered worker
    // catalogs; propagates validation issues as errors.
    std::uint64_t submit_task(const ConsumerRequest& request);

    // Picks min(cap, eligible) available capability-matching workers by
    // ascending worker_id and marks the task active.
    Assignment schedule(std::uint64_t task_id);

    BatchAck ingest_batch(const DataBatch& batch);
    TaskReport task_report(std::uint64_t task_id) const;

    const SensingTask& task(std::uint64_t task_id) const;
    TaskStatus task_status(std::uint64_t task_id) const;
    std::filesystem::path task_log_path(std::uint64_t task_id) const;

    // Recomputes a report from the persisted log alone (audit path).
    TaskReport report_from_log(std::uint64_t task_id) const;

private:
    struct TaskState {
        SensingTask task;
        TaskStatus status = TaskStatus::Pending;
        std::vector<std::string> assigned; // sorted
        std::set<std::string> seen_batches;
        TaskReport report;
    };

    const TaskState& task_state(std::uint64_t task_id) const;
    std::set<std::string> union_catalog_locked() const;

    mutable std::mutex mu_;
    std::filesystem::path data_dir_;
    std::vector<GeoFence> fences_;
    std::map<std::string, WorkerInfo> workers_;
    std::map<std::uint64_t, TaskState> tasks_;
    std::uint64_t next_task_id_ = 1;
};

} // namespace selsense
