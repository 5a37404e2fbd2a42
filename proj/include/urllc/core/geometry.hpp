// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace urllc {

inline constexpr double kSpeedOfLight = 2.99792458e8;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Room {
  double width = 20.0;
  double height = 20.0;

  bool contains(Vec2 p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  Vec2 center() const { return {0.5 * width, 0.5 * height}; }
};

inline double wavelength_for(double carrier_hz) { return kSpeedOfLight / carrier_hz; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace urllc
