#include "selsense/sensors.hpp"

#include <cmath>
#include <numbers>

namespace selsense {

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

double unit_noise(std::uint64_t seed, std::uint64_t name_hash, double t_sec, int lane) {
    std::uint64_t t_bits;
    static_assert(sizeof(t_bits) == sizeof(t_sec));
    std::memcpy(&t_bits, &t_sec, sizeof(t_bits));
    const std::uint64_t h =
        mix64(seed ^ mix64(name_hash) ^ mix64(t_bits) ^ mix64(static_cast<std::uint64_t>(lane)));
    return static_cast<double>(h >> 11) * 0x1.0p-53; // uniform [0, 1)
}

// Accelerometer magnitude spread per activity, matching the classifier bands.
double accel_sigma(Activity a) {
    switch (a) {
        case Activity::Still: return 0.05;
        case Activity::Walking: return 1.0;
        case Activity::Running: return 2.0;
        case Activity::Cycling: return 1.2;
        case Activity::InVehicle: return 3.5;
        case Activity::Tilting: return 3.5;
    }
    return 0.05;
}

double heart_rate_base(Activity a) {
    switch (a) {
        case Activity::Still: return 62.0;
        case Activity::Walking: return 95.0;
        case Activity::Running: return 150.0;
        case Activity::Cycling: return 130.0;
        case Activity::InVehicle: return 70.0;
        case Activity::Tilting: return 80.0;
    }
    return 62.0;
}

} // namespace

std::vector<double> VirtualSensor::generate(Activity activity, double t_sec,
                                            std::uint64_t seed) const {
    const std::uint64_t nh = hash_string(name);
    auto noise = [&](int lane) { return unit_noise(seed, nh, t_sec, lane); };
    auto centered = [&](int lane) { return 2.0 * noise(lane) - 1.0; };

    if (name == "accelerometer" || name == "linear_acceleration") {
        const double amp = std::numbers::sqrt2 * accel_sigma(activity);
        const double mag = 9.81 + amp * std::sin(2.0 * std::numbers::pi * t_sec / 16.0) +
                           0.05 * centered(0);
        return {0.12 * centered(1), 0.12 * centered(2), mag};
    }
    if (name == "gravity") return {0.01 * centered(0), 0.01 * centered(1), 9.81};
    if (name == "gyroscope") {
        const double amp = 0.1 + 0.2 * accel_sigma(activity);
        return {amp * centered(0), amp * centered(1), amp * centered(2)};
    }
    if (name == "rotation_vector" || name == "orientation" || name == "magnetic_field") {
        return {centered(0), centered(1), centered(2)};
    }
    if (name == "light") return {220.0 + 120.0 * noise(0)};
    if (name == "pressure") return {1013.25 + 2.0 * centered(0)};
    if (name == "proximity") return {noise(0) < 0.9 ? 5.0 : 0.0};
    if (name == "pm25") return {12.0 + 6.0 * noise(0)};
    if (name == "sound") return {42.0 + 12.0 * noise(0)};
    if (name == "heart") return {heart_rate_base(activity) + 4.0 * centered(0)};

    // Unknown plugin: flat value with seeded jitter, honoring arity.
    std::vector<double> out;
    out.reserve(static_cast<size_t>(value_arity));
    for (int lane = 0; lane < value_arity; ++lane) out.push_back(centered(lane));
    return out;
}

std::vector<VirtualSensor> standard_sensor_set() {
    return {
        {"accelerometer", 3}, {"gravity", 3},       {"gyroscope", 3},
        {"linear_acceleration", 3}, {"rotation_vector", 3}, {"light", 1},
        {"pressure", 1},      {"magnetic_field", 3}, {"orientation", 3},
        {"proximity", 1},
    };
}

WindowedAverage::WindowedAverage(std::string source_field, std::size_t window)
    : source_field_(std::move(source_field)), window_(window) {
    if (window_ == 0) throw Error("BAD_WINDOW", "window length must be >= 1");
    buf_.reserve(window_);
}

void WindowedAverage::push(double value) {
    if (buf_.size() < window_) {
        buf_.push_back(value);
    } else {
        buf_[next_] = value;
        full_ = true;
    }
    next_ = (next_ + 1) % window_;
}

double WindowedAverage::value() const {
    if (buf_.empty()) throw Error("NO_SAMPLES", "windowed average has no samples yet");
    double sum = 0.0;
    for (double v : buf_) sum += v;
    return sum / static_cast<double>(buf_.size());
}

void WindowedAverage::reset() {
    buf_.clear();
    next_ = 0;
    full_ = false;
}

} // namespace selsense
