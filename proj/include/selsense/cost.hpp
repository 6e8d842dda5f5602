#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selsense/error.hpp"

namespace selsense {

enum class Mode { Theta, Psi }; // Theta: non-selective, Psi: selective

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

// Instantaneous rates and per-unit constants feeding the cost equations.
// The shipped defaults are illustrative engineering numbers, not device
// measurements; savings ratios do not depend on them.
struct CostParams {
    double e_cpu_rate = 0.6;      // W, CPU draw while processing
    double e_s2d_rate = 0.05;     // W, sensor-to-device leg
    double e_d2c_rate = 0.7;      // W, device-to-cloud leg (nominal)
    double e_dcom_rate = 0.75;    // W, aggregate communication draw (= s2d + d2c)
    std::map<std::string, double> per_protocol_rates = {
        {"3G", 1.2}, {"WiFi", 0.7}, {"BT", 0.05}, {"ZigBee", 0.03}, {"Z-Wave", 0.03}};
    double k_rate = 0.3;          // W, baseline platform draw
    double e_overhead_rate = 0.05; // W, context-awareness machinery
    double t_dcom_round = 0.02;   // s per push round
    double record_size_bytes = 64.0;
    double network_overhead_frac = 0.0; // protocol framing on top of payload
    double cpu_sec_per_record = 0.001;  // CPU time charged per processed record

    void validate() const;

    static CostParams defaults() { return CostParams{}; }
    static CostParams from_json(const std::string& json_text);
    static CostParams load(const std::string& path);
    std::string to_json() const;
};

// Accumulated durations, counters, and derived totals for one run.
struct CostLedger {
    Mode mode = Mode::Theta;
    double t_td_sec = 0.0;   // total scenario duration
    double t_art_sec = 0.0;  // actual (gate-open) running time
    double t_pi_sec = 0.0;   // gated-out time; t_art = t_td - t_pi
    double t_ncf_sec = 1.0;  // push cadence
    double t_sf_sec = 1.0;   // storage cadence
    double pt_cpu_sec = 0.0; // CPU processing time
    double tt_dcom_sec = 0.0; // total transmission time
    std::map<std::string, double> tt_dcom_by_protocol;
    std::int64_t n_records = 0;
    std::int64_t n_pushes = 0;
    double storage_bytes = 0.0;
    double network_bytes = 0.0;
    double e_cpu_j = 0.0;
    double e_dcom_j = 0.0;
    double e_dcom_s2d_j = 0.0;
    double e_dcom_d2c_j = 0.0;
    double k_j = 0.0;
    double e_omega_j = 0.0;
    double e_total_j = 0.0;

    void check_invariants() const; // throws on violation
    CostLedger& operator+=(const CostLedger& other); // element-wise accumulation
};

struct EnergyBreakdown {
    double e_cpu_j = 0.0;
    double e_dcom_j = 0.0;
    double e_dcom_s2d_j = 0.0;
    double e_dcom_d2c_j = 0.0;
    double k_j = 0.0;
    double e_omega_j = 0.0;
    double e_total_j = 0.0;
};

struct SavingsReport {
    double energy_ratio = 1.0;
    double storage_ratio = 1.0;
    double network_ratio = 1.0;
    double energy_reduction_percent = 0.0;
    double storage_reduction_percent = 0.0;
    double network_reduction_percent = 0.0;
};

// Half-open [start_sec, end_sec) stretch during which the gate held.
struct Interval {
    double start_sec = 0.0;
    double end_sec = 0.0;
};

struct ActiveTime {
    double t_art_sec = 0.0;
    double t_pi_sec = 0.0;
};

// t_art = sum of interval lengths, t_pi = t_td - t_art. Intervals must be
// disjoint and inside [0, t_td].
ActiveTime active_time(double t_td_sec, std::vector<Interval> gate_open_intervals);

// Transmission time: (active / t_ncf) * t_dcom_round.
double comm_time(double active_sec, double t_ncf_sec, double t_dcom_round_sec);

// Energy totals from the ledger durations: E_CPU = rate * pt_cpu,
// E_DCom = rate * tt_dcom, K = rate * t_td, and the overhead term accrues
// over t_td in selective mode only.
EnergyBreakdown energy_components(const CostLedger& ledger, const CostParams& params);

// floor(active / t_sf): partial storage intervals produce no record.
std::int64_t record_count(double active_sec, double t_sf_sec);

double storage_total(std::int64_t n_records, double record_size_bytes);

// network bytes = storage bytes * (1 + overhead_frac).
double network_total(double storage_bytes, double network_overhead_frac);

// Per-dimension psi/theta ratios and (1 - ratio) * 100 reductions.
SavingsReport saving_ratios(const CostLedger& psi, const CostLedger& theta);

} // namespace selsense
