#pragma once

#include <algorithm>
#include <cmath>
#include <compare>

namespace signkin {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }

inline double distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

// Closed time span in milliseconds.
struct Interval {
  double start_ms = 0.0;
  double end_ms = 0.0;

  double length_ms() const { return end_ms - start_ms; }
  bool contains(double t) const { return start_ms <= t && t <= end_ms; }

  friend auto operator<=>(const Interval&, const Interval&) = default;
};

inline double overlap_ms(const Interval& a, const Interval& b) {
  return std::max(0.0, std::min(a.end_ms, b.end_ms) - std::max(a.start_ms, b.start_ms));
}

}  // namespace signkin
