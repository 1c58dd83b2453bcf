#pragma once

#include <cmath>
#include <cstdint>

namespace mirroreval {

// World positions are stored in integer micrometers so that kinematics are
// exact: a forward step followed by a backward step restores the pose
// bit-for-bit, on every platform. Rendering converts to meters once per frame.
inline constexpr double kMetersPerUm = 1e-6;

inline double um_to_m(std::int64_t um) { return static_cast<double>(um) * kMetersPerUm; }
inline std::int64_t m_to_um(double m) { return static_cast<std::int64_t>(std::llround(m * 1e6)); }

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return n > 0 ? v * (1.0 / n) : Vec3{};
}

inline constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
inline constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

}  // namespace mirroreval
