#pragma once

#include <cmath>

namespace beamho {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// azimuth of the vector from `from` to `to`, degrees in [0, 360)
inline double azimuth_deg(Vec2 from, Vec2 to) {
    double a = std::atan2(to.y - from.y, to.x - from.x) * 180.0 / M_PI;
    if (a < 0.0) a += 360.0;
    return a;
}

// wrap an angle difference into [-180, 180]
inline double wrap_angle_deg(double a) {
    a = std::fmod(a, 360.0);
    if (a > 180.0) a -= 360.0;
    if (a < -180.0) a += 360.0;
    return a;
}

struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(Vec2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

// mirror a coordinate into [lo, hi]
inline double reflect_into(double v, double lo, double hi) {
    double span = hi - lo;
    while (v < lo || v > hi) {
        if (v < lo) v = 2.0 * lo - v;
        if (v > hi) v = 2.0 * hi - v;
        if (span <= 0.0) return lo;
    }
    return v;
}

}  // namespace beamho
