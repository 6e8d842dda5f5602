#pragma once

#include <cstdint>
#include <string>

#include "selsense/query.hpp"

namespace selsense {

// The unit the coordinator dispatches: a validated query plus schedule
// parameters and the worker cap.
struct SensingTask {
    std::uint64_t task_id = 0;
    QueryAst query;
    std::string query_text;
    double t_td_sec = 0.0;  // total duration the task runs for
    int worker_cap = 1;     // max workers assigned
    PushPolicy push_policy = PushPolicy::Immediate;
    double t_ncf_sec = 1.0; // push cadence
    double t_sf_sec = 1.0;  // storage cadence

    void validate() const {
        if (!(t_td_sec > 0.0)) throw Error("BAD_TASK", "t_td must be > 0");
        if (worker_cap < 1) throw Error("BAD_TASK", "worker_cap must be >= 1");
        if (!(t_ncf_sec > 0.0)) throw Error("BAD_TASK", "t_ncf must be > 0");
        if (!(t_sf_sec > 0.0)) throw Error("BAD_TASK", "t_sf must be > 0");
        if (!(query.sample_period_sec > 0.0)) throw Error("BAD_TASK", "sample period must be > 0");
    }
};

} // namespace selsense
