#pragma once

#include <string>
#include <vector>

#include "selsense/activity.hpp"
#include "selsense/geo.hpp"

namespace selsense {

// One homogeneous stretch of a scenario timeline, [start_sec, end_sec).
// Position moves linearly from waypoint_start to waypoint_end over the
// segment; activity and the rain/wifi flags are constant within it.
struct Segment {
    double start_sec = 0.0;
    double end_sec = 0.0;
    Activity activity = Activity::Still;
    GeoPoint waypoint_start;
    GeoPoint waypoint_end;
    bool raining = false;
    bool wifi = false;
};

// One row of the normative per-second trace CSV.
struct TraceRow {
    long t_sec = 0;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    int activity = 5;
    int raining = 0;
    int wifi = 0;
};

// A reproducible experiment timeline: contiguous, non-overlapping segments
// covering [0, total_duration_sec), plus the fences the scenario refers to.
struct Scenario {
    std::string name;
    std::vector<Segment> segments;
    std::vector<GeoFence> fences;
    double total_duration_sec = 0.0;

    void validate() const;
    const Segment& segment_at(double t_sec) const; // throws OUT_OF_RANGE
    GeoPoint position_at(double t_sec) const;
};

struct BusOptions {
    // False: truncate the 5-min-move / 2-min-stop pattern at 60 minutes.
    // True: honor ten full cycles (70 minutes).
    bool full_cycles = false;
};

// Built-in names: bus, rehab, park, cycle-commute.
Scenario builtin_scenario(const std::string& name, const BusOptions& bus = {});
std::vector<std::string> builtin_scenario_names();

// Canonical gate/query text and push policy per built-in scenario.
std::string canonical_query(const std::string& scenario_name);

// Per-second trace expansion and the normative CSV form
// (header: t_sec,lat_deg,lon_deg,activity,raining,wifi).
std::vector<TraceRow> expand_trace(const Scenario& scenario);
std::string trace_to_csv(const Scenario& scenario);
Scenario scenario_from_trace_csv(const std::string& csv_text, const std::string& name = "trace");

// Segment-list JSON: {segments:[{start_sec,end_sec,activity,
// waypoint_start,waypoint_end,raining,wifi}]}.
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& json_text);
Scenario load_scenario_json(const std::string& path);
Scenario load_scenario_csv(const std::string& path);

} // namespace selsense
