#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hosim {

// Error categories used across the library. Violated preconditions on
// user-supplied data raise ConfigError/DataError; algorithmic dead ends
// (no rule fired, degenerate policy) raise the more specific types so
// callers can apply their documented fallbacks.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InferenceError : std::runtime_error {
    explicit InferenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Rect {
    double width = 0.0;
    double height = 0.0;

    bool contains(const Vec2& p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

constexpr double kPi = 3.14159265358979323846;

}  // namespace hosim
