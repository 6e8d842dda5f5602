#include "selsense/context.hpp"

#include <cmath>

namespace selsense {

Activity activity_at(const Scenario& scenario, double t_sec) {
    return scenario.segment_at(t_sec).activity;
}

Activity classify_window(std::span<const double> accel_magnitudes) {
    if (accel_magnitudes.size() < 10) {
        throw Error("WINDOW_TOO_SHORT", "classifier needs at least 10 samples, got " +
                                            std::to_string(accel_magnitudes.size()));
    }
    double mean = 0.0;
    for (double v : accel_magnitudes) mean += v;
    mean /= static_cast<double>(accel_magnitudes.size());
    double var = 0.0;
    for (double v : accel_magnitudes) var += (v - mean) * (v - mean);
    var /= static_cast<double>(accel_magnitudes.size());
    const double sigma = std::sqrt(var);

    if (sigma < 0.3) return Activity::Still;
    if (sigma < 1.5) return Activity::Walking;
    if (sigma < 3.0) return Activity::Running;
    if (std::abs(mean - 9.81) < 1.0) return Activity::InVehicle;
    return Activity::Running;
}

ContextState context_state_at(const Scenario& scenario, const std::vector<GeoFence>& fences,
                              double t_sec) {
    const Segment& seg = scenario.segment_at(t_sec); // throws OUT_OF_RANGE
    ContextState state;
    state.t_sec = t_sec;
    state.activity = seg.activity;
    state.position = scenario.position_at(t_sec);
    state.raining = seg.raining;
    state.wifi_available = seg.wifi;
    for (const auto& f : fences) {
        state.fence_membership[f.id] = geofence_contains(f, state.position);
    }
    return state;
}

} // namespace selsense
