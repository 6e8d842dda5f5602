#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selsense/cost.hpp"
#include "selsense/scenario.hpp"
#include "selsense/sensors.hpp"
#include "selsense/task.hpp"

namespace selsense {

struct Transport {
    enum class Kind { WiFi, ThreeG };
    Kind kind = Kind::WiFi;

    std::string protocol_name() const { return kind == Kind::WiFi ? "WiFi" : "3G"; }
    bool operator==(const Transport&) const = default;
};

struct TransportChoice {
    Transport transport;
    bool flush_now = false;
};

// Transport/flush decision for one push interval, from the current context.
TransportChoice select_transport(const ContextState& state, PushPolicy policy);

// A captured record plus the context that admitted it.
struct GateSnapshot {
    int activity_code = 0;
    std::map<std::string, bool> fence_flags;
    bool raining = false;

    bool operator==(const GateSnapshot&) const = default;
};

struct BufferedRecord {
    Record record;
    GateSnapshot snapshot;

    bool operator==(const BufferedRecord&) const = default;
};

struct DataBatch {
    std::uint64_t task_id = 0;
    std::string worker_id;
    std::string batch_id;
    Transport transport;
    double flush_t_sec = 0.0;
    std::vector<BufferedRecord> records;
};

struct NodeRunResult {
    std::vector<BufferedRecord> emitted;
    std::vector<DataBatch> batches;
    CostLedger ledger;
};

struct RunOptions {
    // Theta arm that leaves the context machinery running without using it,
    // so the overhead term accrues while nothing is filtered.
    bool theta_context_overhead = false;
};

// A worker engine instance: fixed worker id, a sensor catalog extensible by
// plugins, and derived windowed-average fields. Runs are pure given
// (task, scenario, mode, params, seed).
class WorkerNode {
public:
    explicit WorkerNode(std::string worker_id);

    const std::string& worker_id() const { return worker_id_; }

    // Fails with DUPLICATE_SENSOR when the name is taken.
    void register_plugin(const VirtualSensor& sensor);
    void register_average_field(const std::string& derived_name, const std::string& source_field,
                                std::size_t window);

    std::set<std::string> field_catalog() const;
    const std::vector<VirtualSensor>& sensors() const { return sensors_; }

    SampleSet sample_all(Activity activity, double t_sec, std::uint64_t seed) const;

    NodeRunResult run(const SensingTask& task, const Scenario& scenario, Mode mode,
                      const CostParams& params, std::uint64_t seed,
                      const RunOptions& options = {}) const;

private:
    struct AverageField {
        std::string name;
        std::string source;
        std::size_t window;
    };

    std::string worker_id_;
    std::vector<VirtualSensor> sensors_;
    std::vector<AverageField> average_fields_;
};

} // namespace selsense
