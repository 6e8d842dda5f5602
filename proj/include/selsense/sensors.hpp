#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selsense/activity.hpp"
#include "selsense/error.hpp"

namespace selsense {

// One timestamped reading from one virtual sensor on one worker.
struct SensorSample {
    std::string worker_id;
    std::string sensor;
    double t_sec = 0.0;
    std::vector<double> values; // length = sensor arity
};

// A data producer exposed to queries: a built-in sensor or a plugin.
// Values are a deterministic function of (activity, t, seed); they are
// payload only, cost accounting depends on counts and sizes.
struct VirtualSensor {
    std::string name;
    int value_arity = 1; // 1 or 3

    std::vector<double> generate(Activity activity, double t_sec, std::uint64_t seed) const;
};

// The ten standard sensors every node exposes.
std::vector<VirtualSensor> standard_sensor_set();

// Stable 64-bit mix used by the generators; exposed for seeding helpers.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_string(const std::string& s);

// Running mean over the last `window` scalar samples of a source field.
// Registered on a node as a derived field so queries can reference
// smoothed values through the ordinary grammar.
class WindowedAverage {
public:
    WindowedAverage(std::string source_field, std::size_t window);

    const std::string& source_field() const { return source_field_; }
    std::size_t window() const { return window_; }

    void push(double value);
    double value() const; // mean of the samples seen so far, capped at window
    bool has_samples() const { return !buf_.empty(); }
    void reset();

private:
    std::string source_field_;
    std::size_t window_;
    std::vector<double> buf_; // ring buffer
    std::size_t next_ = 0;
    bool full_ = false;
};

} // namespace selsense
