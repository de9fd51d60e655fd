#pragma once

#include <algorithm>
#include <cmath>

#include "corotree/errors.hpp"

namespace corotree {

// World coordinate in mm, patient LPS convention (+x left, +y posterior, +z superior).
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Point3 operator*(double s, const Point3& a) { return {s * a.x, s * a.y, s * a.z}; }
    friend Point3 operator*(const Point3& a, double s) { return s * a; }
    friend Point3 operator/(const Point3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    Point3& operator+=(const Point3& b) { x += b.x; y += b.y; z += b.z; return *this; }

    friend bool operator==(const Point3& a, const Point3& b) = default;
};

// Directions share the representation of points.
using Vec3 = Point3;

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double squared_norm(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(squared_norm(a)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (n <= 0.0 || !std::isfinite(n)) {
        throw GeometryError("cannot normalize zero or non-finite vector");
    }
    return v / n;
}

// Angle between two vectors in radians, clamped against acos domain error.
inline double angle_between(const Vec3& a, const Vec3& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na <= 0.0 || nb <= 0.0) {
        throw GeometryError("angle of zero vector is undefined");
    }
    const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

// Rodrigues rotation of v about unit axis by the given angle.
inline Vec3 rotate_about_axis(const Vec3& v, const Vec3& unit_axis, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return c * v + s * cross(unit_axis, v) + (1.0 - c) * dot(unit_axis, v) * unit_axis;
}

}  // namespace corotree
