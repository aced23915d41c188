#include "pml/simworld/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pml::sim {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

PolylineProjection project_onto_polyline(Vec2 p, std::span<const Vec2> polyline,
                                         std::size_t first, std::size_t last) {
  if (polyline.size() < 2) {
    throw std::invalid_argument("project_onto_polyline: need >= 2 points");
  }
  last = std::min(last, polyline.size() - 1);
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double arc_before = 0.0;
  for (std::size_t i = 0; i < first && i + 1 < polyline.size(); ++i) {
    arc_before += norm(polyline[i + 1] - polyline[i]);
  }
  for (std::size_t i = first; i < last; ++i) {
    const Vec2 a = polyline[i];
    const Vec2 d = polyline[i + 1] - a;
    const double len2 = dot(d, d);
    const Vec2 ap = p - a;
    const double t = std::clamp(dot(ap, d) / len2, 0.0, 1.0);
    const Vec2 foot = a + t * d;
    const Vec2 delta = p - foot;
    const double dist = std::sqrt(dot(delta, delta));
    if (dist < best.distance) {
      // Right-hand normal of d in a y-right frame is (-d.y, d.x).
      const double side = -d.y * ap.x + d.x * ap.y;
      best.distance = dist;
      best.signed_offset = side < 0.0 ? -dist : dist;
      best.segment = i;
      best.t = t;
      best.arc = arc_before + t * std::sqrt(len2);
    }
    arc_before += std::sqrt(len2);
  }
  return best;
}

Vec2 point_at_arc(std::span<const Vec2> polyline, double s) {
  if (polyline.empty()) throw std::invalid_argument("point_at_arc: empty");
  if (s <= 0.0) return polyline.front();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 d = polyline[i + 1] - polyline[i];
    const double len = norm(d);
    if (s <= len) return polyline[i] + (s / len) * d;
    s -= len;
  }
  return polyline.back();
}

double polyline_length(std::span<const Vec2> polyline) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    total += norm(polyline[i + 1] - polyline[i]);
  }
  return total;
}

}  // namespace pml::sim
