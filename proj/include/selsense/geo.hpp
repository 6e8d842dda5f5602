#pragma once

#include <string>
#include <vector>

#include "selsense/error.hpp"

namespace selsense {

// Spherical earth model used throughout. Fence radii are tens to hundreds
// of meters, so ellipsoid corrections are below the noise floor.
inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    bool operator==(const GeoPoint&) const = default;
};

// Circular geofence; membership is boundary-inclusive.
struct GeoFence {
    std::string id;
    double center_lat_deg = 0.0;
    double center_lon_deg = 0.0;
    double radius_m = 0.0;
};

struct TimedPoint {
    double t_sec = 0.0;
    GeoPoint pos;
};

struct FenceEvent {
    enum class Kind { Enter, Exit };
    double t_sec = 0.0;
    std::string fence_id;
    Kind kind = Kind::Enter;

    bool operator==(const FenceEvent&) const = default;
};

void validate_coordinates(const GeoPoint& p);
void validate_fence(const GeoFence& f);

// Great-circle distance in meters on a sphere of radius kEarthRadiusMeters.
double haversine_distance(const GeoPoint& p1, const GeoPoint& p2);

bool geofence_contains(const GeoFence& fence, const GeoPoint& position);

// ENTER at the first inside sample and at each outside->inside flip,
// EXIT at each inside->outside flip. Trace timestamps must be strictly
// increasing.
std::vector<FenceEvent> fence_transitions(const GeoFence& fence,
                                          const std::vector<TimedPoint>& trace);

// Fence catalog file: JSON array of {id, lat, lon, radius_m}.
std::vector<GeoFence> load_fence_catalog(const std::string& path);
std::string fence_catalog_to_json(const std::vector<GeoFence>& fences);
std::vector<GeoFence> parse_fence_catalog(const std::string& json_text);

} // namespace selsense
