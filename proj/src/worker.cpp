#include "selsense/worker.hpp"

#include <algorithm>
#include <cmath>

#include "selsense/context.hpp"

namespace selsense {

TransportChoice select_transport(const ContextState& state, PushPolicy policy) {
    switch (policy) {
        case PushPolicy::DeferredWifi:
            return {Transport{Transport::Kind::WiFi}, state.wifi_available};
        case PushPolicy::RainRealtime3G:
            if (state.raining) return {Transport{Transport::Kind::ThreeG}, true};
            return {Transport{Transport::Kind::WiFi}, state.wifi_available};
        case PushPolicy::Immediate:
            return {Transport{state.wifi_available ? Transport::Kind::WiFi
                                                   : Transport::Kind::ThreeG},
                    true};
    }
    throw Error("BAD_POLICY", "unknown push policy");
}

WorkerNode::WorkerNode(std::string worker_id)
    : worker_id_(std::move(worker_id)), sensors_(standard_sensor_set()) {}

void WorkerNode::register_plugin(const VirtualSensor& sensor) {
    if (sensor.value_arity != 1 && sensor.value_arity != 3) {
        throw Error("BAD_SENSOR", "sensor arity must be 1 or 3");
    }
    if (field_catalog().contains(sensor.name)) {
        throw Error("DUPLICATE_SENSOR", "sensor '" + sensor.name + "' already registered");
    }
    sensors_.push_back(sensor);
}

void WorkerNode::register_average_field(const std::string& derived_name,
                                        const std::string& source_field, std::size_t window) {
    if (window == 0) throw Error("BAD_WINDOW", "window length must be >= 1");
    if (field_catalog().contains(derived_name)) {
        throw Error("DUPLICATE_SENSOR", "field '" + derived_name + "' already registered");
    }
    const bool source_known =
        std::any_of(sensors_.begin(), sensors_.end(),
                    [&](const VirtualSensor& s) { return s.name == source_field; });
    if (!source_known) {
        throw Error("UNKNOWN_FIELD", "average source '" + source_field + "' not registered");
    }
    average_fields_.push_back({derived_name, source_field, window});
}

std::set<std::string> WorkerNode::field_catalog() const {
    std::set<std::string> names;
    for (const auto& s : sensors_) names.insert(s.name);
    for (const auto& a : average_fields_) names.insert(a.name);
    return names;
}

SampleSet WorkerNode::sample_all(Activity activity, double t_sec, std::uint64_t seed) const {
    SampleSet samples;
    for (const auto& s : sensors_) {
        samples[s.name] = s.generate(activity, t_sec, seed);
    }
    return samples;
}

namespace {

double scalarize(const std::vector<double>& values) {
    if (values.size() == 1) return values[0];
    double sq = 0.0;
    for (double v : values) sq += v * v;
    return std::sqrt(sq);
}

std::string make_batch_id(const std::string& worker_id, std::uint64_t seq) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(seq));
    return worker_id + "-" + buf;
}

} // namespace

NodeRunResult WorkerNode::run(const SensingTask& task, const Scenario& scenario, Mode mode,
                              const CostParams& params, std::uint64_t seed,
                              const RunOptions& options) const {
    task.validate();
    params.validate();
    scenario.validate();
    if (scenario.total_duration_sec + 1e-9 < task.t_td_sec) {
        throw Error("SCENARIO_TOO_SHORT", "scenario covers " +
                                              std::to_string(scenario.total_duration_sec) +
                                              " s, task needs " + std::to_string(task.t_td_sec));
    }
    const double wifi_rate = params.per_protocol_rates.contains("WiFi")
                                 ? params.per_protocol_rates.at("WiFi")
                                 : throw Error("BAD_PARAMS", "missing WiFi protocol rate");
    const double g3_rate = params.per_protocol_rates.contains("3G")
                               ? params.per_protocol_rates.at("3G")
                               : throw Error("BAD_PARAMS", "missing 3G protocol rate");

    NodeRunResult result;
    CostLedger& ledger = result.ledger;
    ledger.mode = mode;
    ledger.t_td_sec = task.t_td_sec;
    ledger.t_ncf_sec = task.t_ncf_sec;
    ledger.t_sf_sec = task.t_sf_sec;

    const double period = task.query.sample_period_sec;
    const auto n_steps = static_cast<std::int64_t>(std::ceil(task.t_td_sec / period - 1e-9));
    const auto steps_per_flush =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(task.t_ncf_sec / period)));

    std::vector<WindowedAverage> averages;
    averages.reserve(average_fields_.size());
    for (const auto& a : average_fields_) averages.emplace_back(a.source, a.window);

    std::vector<BufferedRecord> buffer;
    std::uint64_t batch_seq = 0;

    auto flush = [&](const Transport& transport, double t_sec) {
        if (buffer.empty()) return;
        DataBatch batch;
        batch.task_id = task.task_id;
        batch.worker_id = worker_id_;
        batch.batch_id = make_batch_id(worker_id_, batch_seq++);
        batch.transport = transport;
        batch.flush_t_sec = t_sec;
        batch.records = std::move(buffer);
        buffer.clear();

        const std::string proto = transport.protocol_name();
        const double d2c_rate = transport.kind == Transport::Kind::WiFi ? wifi_rate : g3_rate;
        ledger.tt_dcom_sec += params.t_dcom_round;
        ledger.tt_dcom_by_protocol[proto] += params.t_dcom_round;
        ledger.e_dcom_d2c_j += d2c_rate * params.t_dcom_round;
        ledger.e_dcom_s2d_j += params.e_s2d_rate * params.t_dcom_round;
        ledger.n_pushes += 1;
        result.batches.push_back(std::move(batch));
    };

    for (std::int64_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * period;
        ContextState state = context_state_at(scenario, scenario.fences, t);

        const SampleSet raw = sample_all(state.activity, t, seed);
        for (const auto& [name, values] : raw) state.latest_samples[name] = scalarize(values);
        for (size_t i = 0; i < averages.size(); ++i) {
            averages[i].push(state.latest_samples.at(average_fields_[i].source));
            state.latest_samples[average_fields_[i].name] = averages[i].value();
        }

        const bool gate_open = mode == Mode::Theta || evaluate_gate(task.query.gate, state);
        if (gate_open) {
            BufferedRecord br;
            br.record = select_fields(task.query, raw, t, worker_id_);
            br.snapshot.activity_code = activity_code(state.activity);
            br.snapshot.fence_flags = state.fence_membership;
            br.snapshot.raining = state.raining;
            result.emitted.push_back(br);
            buffer.push_back(std::move(br));
            ledger.n_records += 1;
        } else {
            ledger.t_pi_sec += period;
        }

        if (k % steps_per_flush == 0) {
            const TransportChoice choice = select_transport(state, task.push_policy);
            if (choice.flush_now) flush(choice.transport, t);
        }
    }

    // Whatever is still buffered leaves the node when the task ends; data is
    // never dropped. The deferred path's transport (WiFi) carries it.
    flush(Transport{Transport::Kind::WiFi}, task.t_td_sec);

    ledger.t_art_sec = ledger.t_td_sec - ledger.t_pi_sec;
    ledger.pt_cpu_sec = static_cast<double>(ledger.n_records) * params.cpu_sec_per_record;
    ledger.e_cpu_j = params.e_cpu_rate * ledger.pt_cpu_sec;
    ledger.e_dcom_j = ledger.e_dcom_s2d_j + ledger.e_dcom_d2c_j;
    ledger.k_j = params.k_rate * ledger.t_td_sec;
    const bool overhead_on = mode == Mode::Psi || options.theta_context_overhead;
    ledger.e_omega_j = overhead_on ? params.e_overhead_rate * ledger.t_td_sec : 0.0;
    ledger.e_total_j = ledger.e_cpu_j + ledger.e_dcom_j + ledger.k_j + ledger.e_omega_j;
    ledger.storage_bytes = storage_total(ledger.n_records, params.record_size_bytes);
    ledger.network_bytes = network_total(ledger.storage_bytes, params.network_overhead_frac);
    ledger.check_invariants();
    return result;
}

} // namespace selsense
