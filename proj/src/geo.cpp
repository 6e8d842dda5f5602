#include "selsense/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace selsense {

namespace {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

} // namespace

void validate_coordinates(const GeoPoint& p) {
    if (!(p.lat_deg >= -90.0 && p.lat_deg <= 90.0)) {
        throw Error("BAD_COORDINATE", "latitude out of range: " + std::to_string(p.lat_deg));
    }
    if (!(p.lon_deg >= -180.0 && p.lon_deg <= 180.0)) {
        throw Error("BAD_COORDINATE", "longitude out of range: " + std::to_string(p.lon_deg));
    }
}

void validate_fence(const GeoFence& f) {
    validate_coordinates({f.center_lat_deg, f.center_lon_deg});
    if (!(f.radius_m > 0.0)) {
        throw Error("BAD_FENCE", "fence radius must be positive: " + f.id);
    }
}

double haversine_distance(const GeoPoint& p1, const GeoPoint& p2) {
    validate_coordinates(p1);
    validate_coordinates(p2);
    const double phi1 = deg2rad(p1.lat_deg);
    const double phi2 = deg2rad(p2.lat_deg);
    const double dphi = deg2rad(p2.lat_deg - p1.lat_deg);
    const double dlambda = deg2rad(p2.lon_deg - p1.lon_deg);

    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlambda / 2.0);
    double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    a = std::clamp(a, 0.0, 1.0);
    return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(a));
}

bool geofence_contains(const GeoFence& fence, const GeoPoint& position) {
    validate_fence(fence);
    return haversine_distance({fence.center_lat_deg, fence.center_lon_deg}, position) <=
           fence.radius_m;
}

std::vector<FenceEvent> fence_transitions(const GeoFence& fence,
                                          const std::vector<TimedPoint>& trace) {
    validate_fence(fence);
    for (size_t i = 1; i < trace.size(); ++i) {
        if (!(trace[i].t_sec > trace[i - 1].t_sec)) {
            throw Error("UNSORTED_TRACE", "trace timestamps must be strictly increasing");
        }
    }
    std::vector<FenceEvent> events;
    bool inside = false;
    for (const auto& tp : trace) {
        const bool now = geofence_contains(fence, tp.pos);
        if (now && !inside) {
            events.push_back({tp.t_sec, fence.id, FenceEvent::Kind::Enter});
        } else if (!now && inside) {
            events.push_back({tp.t_sec, fence.id, FenceEvent::Kind::Exit});
        }
        inside = now;
    }
    return events;
}

std::vector<GeoFence> parse_fence_catalog(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("BAD_FENCE_FILE", e.what());
    }
    if (!doc.is_array()) throw Error("BAD_FENCE_FILE", "fence catalog must be a JSON array");
    std::vector<GeoFence> fences;
    for (const auto& item : doc) {
        GeoFence f;
        f.id = item.at("id").get<std::string>();
        f.center_lat_deg = item.at("lat").get<double>();
        f.center_lon_deg = item.at("lon").get<double>();
        f.radius_m = item.at("radius_m").get<double>();
        validate_fence(f);
        fences.push_back(std::move(f));
    }
    return fences;
}

std::vector<GeoFence> load_fence_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IO_ERROR", "cannot open fence catalog: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_fence_catalog(buf.str());
}

std::string fence_catalog_to_json(const std::vector<GeoFence>& fences) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& f : fences) {
        nlohmann::ordered_json item;
        item["id"] = f.id;
        item["lat"] = f.center_lat_deg;
        item["lon"] = f.center_lon_deg;
        item["radius_m"] = f.radius_m;
        arr.push_back(std::move(item));
    }
    return arr.dump(2) + "\n";
}

} // namespace selsense
