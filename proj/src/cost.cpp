#include "selsense/cost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace selsense {

std::string mode_name(Mode m) { return m == Mode::Theta ? "theta" : "psi"; }

Mode mode_from_name(const std::string& name) {
    if (name == "theta") return Mode::Theta;
    if (name == "psi") return Mode::Psi;
    throw Error("BAD_MODE", "unknown mode: " + name);
}

void CostParams::validate() const {
    auto nonneg = [](double v, const char* what) {
        if (!(v >= 0.0)) throw Error("BAD_PARAMS", std::string(what) + " must be >= 0");
    };
    nonneg(e_cpu_rate, "e_cpu_rate");
    nonneg(e_s2d_rate, "e_s2d_rate");
    nonneg(e_d2c_rate, "e_d2c_rate");
    nonneg(e_dcom_rate, "e_dcom_rate");
    nonneg(k_rate, "k_rate");
    nonneg(e_overhead_rate, "e_overhead_rate");
    nonneg(network_overhead_frac, "network_overhead_frac");
    nonneg(cpu_sec_per_record, "cpu_sec_per_record");
    for (const auto& [proto, rate] : per_protocol_rates) nonneg(rate, proto.c_str());
    if (!(t_dcom_round > 0.0)) throw Error("BAD_PARAMS", "t_dcom_round must be > 0");
    if (!(record_size_bytes > 0.0)) throw Error("BAD_PARAMS", "record_size_bytes must be > 0");
}

CostParams CostParams::from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("BAD_PARAMS_FILE", e.what());
    }
    CostParams p;
    auto get = [&](const char* key, double& out) {
        if (doc.contains(key)) out = doc.at(key).get<double>();
    };
    get("e_cpu_rate", p.e_cpu_rate);
    get("e_s2d_rate", p.e_s2d_rate);
    get("e_d2c_rate", p.e_d2c_rate);
    get("e_dcom_rate", p.e_dcom_rate);
    get("k_rate", p.k_rate);
    get("e_overhead_rate", p.e_overhead_rate);
    get("t_dcom_round", p.t_dcom_round);
    get("record_size_bytes", p.record_size_bytes);
    get("network_overhead_frac", p.network_overhead_frac);
    get("cpu_sec_per_record", p.cpu_sec_per_record);
    if (doc.contains("per_protocol_rates")) {
        for (const auto& [proto, rate] : doc.at("per_protocol_rates").items()) {
            p.per_protocol_rates[proto] = rate.get<double>();
        }
    }
    p.validate();
    return p;
}

CostParams CostParams::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IO_ERROR", "cannot open params file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string CostParams::to_json() const {
    nlohmann::ordered_json doc;
    doc["note"] = "illustrative default rates, not device measurements";
    doc["e_cpu_rate"] = e_cpu_rate;
    doc["e_s2d_rate"] = e_s2d_rate;
    doc["e_d2c_rate"] = e_d2c_rate;
    doc["e_dcom_rate"] = e_dcom_rate;
    doc["per_protocol_rates"] = per_protocol_rates;
    doc["k_rate"] = k_rate;
    doc["e_overhead_rate"] = e_overhead_rate;
    doc["t_dcom_round"] = t_dcom_round;
    doc["record_size_bytes"] = record_size_bytes;
    doc["network_overhead_frac"] = network_overhead_frac;
    doc["cpu_sec_per_record"] = cpu_sec_per_record;
    return doc.dump(2) + "\n";
}

void CostLedger::check_invariants() const {
    const double art = t_td_sec - t_pi_sec;
    if (std::abs(t_art_sec - art) > 1e-9 * std::max(1.0, t_td_sec)) {
        throw Error("LEDGER_INVARIANT", "t_art != t_td - t_pi");
    }
    if (t_art_sec > t_td_sec + 1e-9 * std::max(1.0, t_td_sec)) {
        throw Error("LEDGER_INVARIANT", "t_art exceeds t_td");
    }
    if (mode == Mode::Theta) {
        if (t_pi_sec != 0.0) throw Error("LEDGER_INVARIANT", "theta run with gated-out time");
    }
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
    t_td_sec += other.t_td_sec;
    t_art_sec += other.t_art_sec;
    t_pi_sec += other.t_pi_sec;
    pt_cpu_sec += other.pt_cpu_sec;
    tt_dcom_sec += other.tt_dcom_sec;
    for (const auto& [proto, tt] : other.tt_dcom_by_protocol) tt_dcom_by_protocol[proto] += tt;
    n_records += other.n_records;
    n_pushes += other.n_pushes;
    storage_bytes += other.storage_bytes;
    network_bytes += other.network_bytes;
    e_cpu_j += other.e_cpu_j;
    e_dcom_j += other.e_dcom_j;
    e_dcom_s2d_j += other.e_dcom_s2d_j;
    e_dcom_d2c_j += other.e_dcom_d2c_j;
    k_j += other.k_j;
    e_omega_j += other.e_omega_j;
    e_total_j += other.e_total_j;
    return *this;
}

ActiveTime active_time(double t_td_sec, std::vector<Interval> gate_open_intervals) {
    if (!(t_td_sec >= 0.0)) throw Error("BAD_DURATION", "t_td must be >= 0");
    std::sort(gate_open_intervals.begin(), gate_open_intervals.end(),
              [](const Interval& a, const Interval& b) { return a.start_sec < b.start_sec; });
    double art = 0.0;
    double prev_end = 0.0;
    for (const auto& iv : gate_open_intervals) {
        if (!(iv.end_sec > iv.start_sec)) {
            throw Error("BAD_INTERVAL", "interval must have positive length");
        }
        if (iv.start_sec < 0.0 || iv.end_sec > t_td_sec) {
            throw Error("BAD_INTERVAL", "interval outside [0, t_td]");
        }
        if (iv.start_sec < prev_end) {
            throw Error("BAD_INTERVAL", "intervals overlap");
        }
        art += iv.end_sec - iv.start_sec;
        prev_end = iv.end_sec;
    }
    return ActiveTime{art, t_td_sec - art};
}

double comm_time(double active_sec, double t_ncf_sec, double t_dcom_round_sec) {
    if (!(t_ncf_sec > 0.0)) throw Error("BAD_PARAMS", "t_ncf must be > 0");
    if (!(t_dcom_round_sec > 0.0)) throw Error("BAD_PARAMS", "t_dcom_round must be > 0");
    if (!(active_sec >= 0.0)) throw Error("BAD_DURATION", "active time must be >= 0");
    return active_sec / t_ncf_sec * t_dcom_round_sec;
}

EnergyBreakdown energy_components(const CostLedger& ledger, const CostParams& params) {
    params.validate();
    EnergyBreakdown e;
    e.e_cpu_j = params.e_cpu_rate * ledger.pt_cpu_sec;
    e.e_dcom_j = params.e_dcom_rate * ledger.tt_dcom_sec;
    e.e_dcom_s2d_j = params.e_s2d_rate * ledger.tt_dcom_sec;
    e.e_dcom_d2c_j = params.e_d2c_rate * ledger.tt_dcom_sec;
    e.k_j = params.k_rate * ledger.t_td_sec;
    e.e_omega_j = ledger.mode == Mode::Psi ? params.e_overhead_rate * ledger.t_td_sec : 0.0;
    e.e_total_j = e.e_cpu_j + e.e_dcom_j + e.k_j + e.e_omega_j;
    return e;
}

std::int64_t record_count(double active_sec, double t_sf_sec) {
    if (!(t_sf_sec > 0.0)) throw Error("BAD_PARAMS", "t_sf must be > 0");
    if (!(active_sec >= 0.0)) throw Error("BAD_DURATION", "active time must be >= 0");
    return static_cast<std::int64_t>(std::floor(active_sec / t_sf_sec));
}

double storage_total(std::int64_t n_records, double record_size_bytes) {
    if (n_records < 0) throw Error("BAD_COUNT", "record count must be >= 0");
    if (!(record_size_bytes >= 0.0)) throw Error("BAD_PARAMS", "record size must be >= 0");
    return static_cast<double>(n_records) * record_size_bytes;
}

double network_total(double storage_bytes, double network_overhead_frac) {
    if (!(network_overhead_frac >= 0.0)) throw Error("BAD_PARAMS", "overhead must be >= 0");
    return storage_bytes * (1.0 + network_overhead_frac);
}

SavingsReport saving_ratios(const CostLedger& psi, const CostLedger& theta) {
    if (!(theta.e_total_j > 0.0) || !(theta.storage_bytes > 0.0) || !(theta.network_bytes > 0.0)) {
        throw Error("DIVISION_BY_ZERO", "theta totals must be positive to form ratios");
    }
    SavingsReport r;
    r.energy_ratio = psi.e_total_j / theta.e_total_j;
    r.storage_ratio = psi.storage_bytes / theta.storage_bytes;
    r.network_ratio = psi.network_bytes / theta.network_bytes;
    r.energy_reduction_percent = (1.0 - r.energy_ratio) * 100.0;
    r.storage_reduction_percent = (1.0 - r.storage_ratio) * 100.0;
    r.network_reduction_percent = (1.0 - r.network_ratio) * 100.0;
    return r;
}

} // namespace selsense
