#include "selsense/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace selsense {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

Segment make_segment(double start, double end, Activity act, GeoPoint a, GeoPoint b, bool rain,
                     bool wifi) {
    return Segment{start, end, act, a, b, rain, wifi};
}

} // namespace

void Scenario::validate() const {
    if (segments.empty()) throw Error("BAD_SCENARIO", "scenario has no segments");
    if (segments.front().start_sec != 0.0) {
        throw Error("BAD_SCENARIO", "first segment must start at 0");
    }
    for (size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.end_sec > s.start_sec)) {
            throw Error("BAD_SCENARIO", "segment " + std::to_string(i) + " has non-positive span");
        }
        if (i > 0 && segments[i - 1].end_sec != s.start_sec) {
            throw Error("BAD_SCENARIO", "segments must be contiguous at index " + std::to_string(i));
        }
    }
    if (segments.back().end_sec != total_duration_sec) {
        throw Error("BAD_SCENARIO", "total duration must match last segment end");
    }
    for (const auto& f : fences) validate_fence(f);
}

const Segment& Scenario::segment_at(double t_sec) const {
    if (t_sec < 0.0 || t_sec >= total_duration_sec) {
        throw Error("OUT_OF_RANGE", "t=" + std::to_string(t_sec) + " outside [0, " +
                                         std::to_string(total_duration_sec) + ")");
    }
    // Segments are sorted by start; find the last with start <= t.
    auto it = std::upper_bound(segments.begin(), segments.end(), t_sec,
                               [](double t, const Segment& s) { return t < s.start_sec; });
    return *std::prev(it);
}

GeoPoint Scenario::position_at(double t_sec) const {
    const Segment& s = segment_at(t_sec);
    const double span = s.end_sec - s.start_sec;
    const double u = (t_sec - s.start_sec) / span;
    return GeoPoint{s.waypoint_start.lat_deg + u * (s.waypoint_end.lat_deg - s.waypoint_start.lat_deg),
                    s.waypoint_start.lon_deg + u * (s.waypoint_end.lon_deg - s.waypoint_start.lon_deg)};
}

std::vector<std::string> builtin_scenario_names() {
    return {"bus", "rehab", "park", "cycle-commute"};
}

Scenario builtin_scenario(const std::string& name, const BusOptions& bus) {
    Scenario sc;
    sc.name = name;
    if (name == "bus") {
        // 5 min moving / 2 min stopped, wifi only at stops. The default run
        // truncates the pattern at 60 minutes; full_cycles keeps ten whole
        // move+stop cycles (70 minutes).
        const double move = 300.0, stop = 120.0, cycle = move + stop;
        const double total = bus.full_cycles ? 10.0 * cycle : 3600.0;
        const double lon_per_move = 0.004;
        double t = 0.0;
        int c = 0;
        while (t < total) {
            const double lon0 = lon_per_move * c;
            const double move_end = std::min(t + move, total);
            const double frac = (move_end - t) / move;
            sc.segments.push_back(make_segment(t, move_end, Activity::InVehicle,
                                               {52.0, lon0}, {52.0, lon0 + lon_per_move * frac},
                                               false, false));
            t = move_end;
            if (t >= total) break;
            const double stop_end = std::min(t + stop, total);
            const GeoPoint at{52.0, lon0 + lon_per_move};
            sc.segments.push_back(make_segment(t, stop_end, Activity::Still, at, at, false, true));
            t = stop_end;
            ++c;
        }
        sc.total_duration_sec = total;
    } else if (name == "rehab") {
        const GeoPoint clinic{52.04, -0.76};
        sc.segments = {
            make_segment(0, 1200, Activity::Walking, clinic, clinic, false, true),
            make_segment(1200, 2100, Activity::Still, clinic, clinic, false, true),
            make_segment(2100, 3000, Activity::Walking, clinic, clinic, false, true),
        };
        sc.total_duration_sec = 3000.0;
    } else if (name == "park") {
        // Fence covers only the running segment; the bar-exercise rest and
        // both cycling legs stay outside it.
        sc.fences = {GeoFence{"park", 52.0, 0.0, 300.0}};
        sc.segments = {
            make_segment(0, 600, Activity::Cycling, {51.9900, 0.0}, {51.9970, 0.0}, false, true),
            make_segment(600, 2400, Activity::Running, {51.9992, 0.0}, {52.0008, 0.0}, false, true),
            make_segment(2400, 3300, Activity::Still, {52.0040, 0.0100}, {52.0040, 0.0100}, false,
                         true),
            make_segment(3300, 3900, Activity::Cycling, {52.0040, 0.0100}, {51.9900, 0.0100}, false,
                         true),
        };
        sc.total_duration_sec = 3900.0;
    } else if (name == "cycle-commute") {
        sc.segments = {
            make_segment(0, 600, Activity::Walking, {51.5000, -0.1000}, {51.5030, -0.1000}, false,
                         true),
            make_segment(600, 1800, Activity::Cycling, {51.5030, -0.1000}, {51.5150, -0.1000}, false,
                         true),
            make_segment(1800, 2400, Activity::Walking, {51.5150, -0.1000}, {51.5180, -0.1000},
                         false, true),
        };
        sc.total_duration_sec = 2400.0;
    } else {
        throw Error("UNKNOWN_SCENARIO", "no built-in scenario named '" + name + "'");
    }
    sc.validate();
    return sc;
}

std::string canonical_query(const std::string& scenario_name) {
    if (scenario_name == "bus") {
        return "SELECT pm25, sound FROM node WHERE activity IN (1) EVERY 1s";
    }
    if (scenario_name == "rehab") {
        return "SELECT accelerometer FROM node WHERE activity = 3 EVERY 1s";
    }
    if (scenario_name == "park") {
        return "SELECT heart FROM node WHERE within(park) = 1 AND activity = 4 EVERY 1s";
    }
    if (scenario_name == "cycle-commute") {
        return "SELECT accelerometer FROM node WHERE activity = 2 EVERY 1s";
    }
    throw Error("UNKNOWN_SCENARIO", "no canonical query for scenario '" + scenario_name + "'");
}

std::vector<TraceRow> expand_trace(const Scenario& scenario) {
    scenario.validate();
    const long total = static_cast<long>(std::floor(scenario.total_duration_sec));
    std::vector<TraceRow> rows;
    rows.reserve(static_cast<size_t>(total));
    for (long t = 0; t < total; ++t) {
        const Segment& s = scenario.segment_at(static_cast<double>(t));
        const GeoPoint p = scenario.position_at(static_cast<double>(t));
        rows.push_back(TraceRow{t, p.lat_deg, p.lon_deg, activity_code(s.activity),
                                s.raining ? 1 : 0, s.wifi ? 1 : 0});
    }
    return rows;
}

std::string trace_to_csv(const Scenario& scenario) {
    std::string out = "t_sec,lat_deg,lon_deg,activity,raining,wifi\n";
    for (const auto& r : expand_trace(scenario)) {
        out += std::to_string(r.t_sec);
        out += ',';
        out += fmt_double(r.lat_deg);
        out += ',';
        out += fmt_double(r.lon_deg);
        out += ',';
        out += std::to_string(r.activity);
        out += ',';
        out += std::to_string(r.raining);
        out += ',';
        out += std::to_string(r.wifi);
        out += '\n';
    }
    return out;
}

Scenario scenario_from_trace_csv(const std::string& csv_text, const std::string& name) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw Error("BAD_TRACE", "empty trace file");
    if (line != "t_sec,lat_deg,lon_deg,activity,raining,wifi") {
        throw Error("BAD_TRACE", "unexpected trace header: " + line);
    }
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        TraceRow r;
        try {
            std::getline(ls, cell, ',');
            r.t_sec = std::stol(cell);
            std::getline(ls, cell, ',');
            r.lat_deg = std::stod(cell);
            std::getline(ls, cell, ',');
            r.lon_deg = std::stod(cell);
            std::getline(ls, cell, ',');
            r.activity = std::stoi(cell);
            std::getline(ls, cell, ',');
            r.raining = std::stoi(cell);
            std::getline(ls, cell, ',');
            r.wifi = std::stoi(cell);
        } catch (const std::exception&) {
            throw Error("BAD_TRACE", "malformed trace row: " + line);
        }
        if (r.t_sec != static_cast<long>(rows.size())) {
            throw Error("BAD_TRACE", "trace rows must be one per second from 0");
        }
        if (!activity_code_valid(r.activity)) {
            throw Error("BAD_ACTIVITY_CODE", "trace row " + std::to_string(r.t_sec));
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw Error("BAD_TRACE", "trace has no rows");

    // One segment per second; the end waypoint of row t is row t+1's
    // position so interpolation reproduces the sampled path.
    Scenario sc;
    sc.name = name;
    sc.total_duration_sec = static_cast<double>(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& next = rows[std::min(i + 1, rows.size() - 1)];
        sc.segments.push_back(make_segment(static_cast<double>(r.t_sec),
                                           static_cast<double>(r.t_sec + 1),
                                           activity_from_code(r.activity), {r.lat_deg, r.lon_deg},
                                           {next.lat_deg, next.lon_deg}, r.raining != 0,
                                           r.wifi != 0));
    }
    sc.validate();
    return sc;
}

std::string scenario_to_json(const Scenario& scenario) {
    scenario.validate();
    nlohmann::ordered_json doc;
    doc["name"] = scenario.name;
    doc["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : scenario.segments) {
        nlohmann::ordered_json seg;
        seg["start_sec"] = s.start_sec;
        seg["end_sec"] = s.end_sec;
        seg["activity"] = activity_code(s.activity);
        seg["waypoint_start"] = {{"lat", s.waypoint_start.lat_deg}, {"lon", s.waypoint_start.lon_deg}};
        seg["waypoint_end"] = {{"lat", s.waypoint_end.lat_deg}, {"lon", s.waypoint_end.lon_deg}};
        seg["raining"] = s.raining ? 1 : 0;
        seg["wifi"] = s.wifi ? 1 : 0;
        doc["segments"].push_back(std::move(seg));
    }
    if (!scenario.fences.empty()) {
        doc["fences"] = nlohmann::ordered_json::parse(fence_catalog_to_json(scenario.fences));
    }
    return doc.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("BAD_SCENARIO_FILE", e.what());
    }
    Scenario sc;
    sc.name = doc.value("name", "scenario");
    if (!doc.contains("segments") || !doc["segments"].is_array()) {
        throw Error("BAD_SCENARIO_FILE", "missing segments array");
    }
    auto read_flag = [](const nlohmann::json& v) {
        return v.is_boolean() ? v.get<bool>() : v.get<int>() != 0;
    };
    for (const auto& seg : doc["segments"]) {
        Segment s;
        s.start_sec = seg.at("start_sec").get<double>();
        s.end_sec = seg.at("end_sec").get<double>();
        s.activity = activity_from_code(seg.at("activity").get<int>());
        s.waypoint_start = {seg.at("waypoint_start").at("lat").get<double>(),
                            seg.at("waypoint_start").at("lon").get<double>()};
        s.waypoint_end = {seg.at("waypoint_end").at("lat").get<double>(),
                          seg.at("waypoint_end").at("lon").get<double>()};
        s.raining = read_flag(seg.at("raining"));
        s.wifi = read_flag(seg.at("wifi"));
        sc.segments.push_back(s);
    }
    sc.total_duration_sec = sc.segments.empty() ? 0.0 : sc.segments.back().end_sec;
    if (doc.contains("fences")) {
        sc.fences = parse_fence_catalog(doc["fences"].dump());
    }
    sc.validate();
    return sc;
}

namespace {
std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IO_ERROR", "cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}
} // namespace

Scenario load_scenario_json(const std::string& path) { return scenario_from_json(read_file(path)); }

Scenario load_scenario_csv(const std::string& path) {
    return scenario_from_trace_csv(read_file(path));
}

} // namespace selsense
