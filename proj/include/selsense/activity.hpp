#pragma once

#include <array>
#include <string>
#include <string_view>

#include "selsense/error.hpp"

namespace selsense {

// Fixed six-activity vocabulary; codes 1..6.
enum class Activity : int {
    InVehicle = 1,
    Cycling = 2,
    Walking = 3,
    Running = 4,
    Still = 5,
    Tilting = 6,
};

inline constexpr int kActivityMin = 1;
inline constexpr int kActivityMax = 6;

inline bool activity_code_valid(int code) { return code >= kActivityMin && code <= kActivityMax; }

inline Activity activity_from_code(int code) {
    if (!activity_code_valid(code)) {
        throw Error("BAD_ACTIVITY_CODE", "activity code out of range: " + std::to_string(code));
    }
    return static_cast<Activity>(code);
}

inline int activity_code(Activity a) { return static_cast<int>(a); }

inline std::string_view activity_name(Activity a) {
    static constexpr std::array<std::string_view, 6> names = {
        "in-vehicle", "cycling", "walking", "running", "still", "tilting"};
    return names[static_cast<size_t>(activity_code(a) - 1)];
}

inline Activity activity_from_name(std::string_view name) {
    for (int code = kActivityMin; code <= kActivityMax; ++code) {
        if (activity_name(static_cast<Activity>(code)) == name) return static_cast<Activity>(code);
    }
    throw Error("BAD_ACTIVITY_NAME", "unknown activity name: " + std::string(name));
}

} // namespace selsense
