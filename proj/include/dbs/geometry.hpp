#pragma once

#include <cmath>
#include <span>

namespace dbs::placement {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& p, const Point& q) { return std::hypot(p.x - q.x, p.y - q.y); }

struct Disk {
  Point center;
  double radius = 0.0;

  bool contains(const Point& p, double tol = 0.0) const { return distance(center, p) <= radius + tol; }
};

// Smallest disk enclosing every point (planar 1-center). Randomised
// incremental construction with a fixed internal shuffle, so the output is
// deterministic. Throws EmptyInputError for an empty set.
Disk min_enclosing_disk(std::span<const Point> points);

// Disk through two points as a diameter.
Disk diameter_disk(const Point& p, const Point& q);
// Circumscribed disk of three points; falls back to the widest diameter
// disk when the points are collinear.
Disk circumscribed_disk(const Point& p, const Point& q, const Point& r);

}  // namespace dbs::placement
