#pragma once

#include <cmath>

namespace gyrolim {

// Point / vector in the plane. perp() is the counterclockwise quarter turn
// v -> (-v2, v1), so perp(perp(v)) == -v.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 perp() const { return {-y, x}; }

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    constexpr double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm_sq()); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

} // namespace gyrolim
