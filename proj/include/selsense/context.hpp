#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "selsense/activity.hpp"
#include "selsense/geo.hpp"
#include "selsense/scenario.hpp"

namespace selsense {

// Everything a gate can look at for one instant. fence_membership holds an
// entry for every registered fence; latest_samples maps field name to a
// scalar (3-axis sensors contribute their magnitude).
struct ContextState {
    double t_sec = 0.0;
    Activity activity = Activity::Still;
    GeoPoint position;
    std::map<std::string, bool> fence_membership;
    bool raining = false;
    bool wifi_available = false;
    std::map<std::string, double> latest_samples;
};

// Activity of the segment containing t_sec; segments are half-open [start, end).
Activity activity_at(const Scenario& scenario, double t_sec);

// Threshold classifier over a window of accelerometer magnitudes. Bands on
// the standard deviation sigma (m/s^2):
//   sigma < 0.3            -> still
//   0.3 <= sigma < 1.5     -> walking
//   1.5 <= sigma < 3.0     -> running
//   sigma >= 3.0           -> in-vehicle when |mean - 9.81| < 1.0, else running
// Cycling and tilting come only from the scenario trace; magnitude statistics
// alone cannot separate them. Window must hold at least 10 samples.
Activity classify_window(std::span<const double> accel_magnitudes);

// Assembles the full context snapshot at t_sec: segment activity, linearly
// interpolated position, membership for every fence in the catalog, and the
// segment's rain/wifi flags. latest_samples is left empty; the worker node
// fills it from its sensor catalog.
ContextState context_state_at(const Scenario& scenario, const std::vector<GeoFence>& fences,
                              double t_sec);

} // namespace selsense
