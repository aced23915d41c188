#pragma once

#include <cstddef>
#include <span>

namespace pml::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 v);

// Closest point of a polyline to a query point.
//
// World frame: x forward at track start, y to the right, headings measured
// from +x toward +y. `signed_offset` is positive when the point lies to the
// right of the polyline direction.
struct PolylineProjection {
  double distance = 0.0;
  double signed_offset = 0.0;
  std::size_t segment = 0;
  double t = 0.0;      // fraction along `segment`, in [0, 1]
  double arc = 0.0;    // arc length from polyline start to the foot point
};

// Scans segments [first, last) of `polyline` (last clamped to size - 1).
// Ties keep the lowest segment index.
PolylineProjection project_onto_polyline(Vec2 p, std::span<const Vec2> polyline,
                                         std::size_t first = 0,
                                         std::size_t last = static_cast<std::size_t>(-1));

// Point at arc length `s` along the polyline, clamped to its ends.
Vec2 point_at_arc(std::span<const Vec2> polyline, double s);

double polyline_length(std::span<const Vec2> polyline);

}  // namespace pml::sim
