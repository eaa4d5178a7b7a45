#include "dbs/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "dbs/error.hpp"

namespace dbs::placement {
namespace {

bool inside(const Disk& d, const Point& p) {
  return distance(d.center, p) <= d.radius * (1.0 + 1e-12) + 1e-12;
}

}  // namespace

Disk diameter_disk(const Point& p, const Point& q) {
  const Point c{0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
  return Disk{c, std::max(distance(c, p), distance(c, q))};
}

Disk circumscribed_disk(const Point& p, const Point& q, const Point& r) {
  // Work relative to p to limit cancellation.
  const double bx = q.x - p.x, by = q.y - p.y;
  const double cx = r.x - p.x, cy = r.y - p.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double scale = std::max({std::abs(bx), std::abs(by), std::abs(cx), std::abs(cy), 1e-300});
  if (std::abs(d) <= 1e-14 * scale * scale) {
    const Disk pq = diameter_disk(p, q), pr = diameter_disk(p, r), qr = diameter_disk(q, r);
    if (pq.radius >= pr.radius && pq.radius >= qr.radius) return pq;
    return pr.radius >= qr.radius ? pr : qr;
  }
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  const double ux = (cy * b2 - by * c2) / d;
  const double uy = (bx * c2 - cx * b2) / d;
  const Point center{p.x + ux, p.y + uy};
  return Disk{center, std::max({distance(center, p), distance(center, q), distance(center, r)})};
}

Disk min_enclosing_disk(std::span<const Point> points) {
  if (points.empty()) throw EmptyInputError("min_enclosing_disk: no points");
  std::vector<Point> pts(points.begin(), points.end());
  std::mt19937_64 shuffle_rng(0x5eed5eedULL);
  std::shuffle(pts.begin(), pts.end(), shuffle_rng);

  Disk d{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (inside(d, pts[i])) continue;
    d = Disk{pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (inside(d, pts[j])) continue;
      d = diameter_disk(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (inside(d, pts[k])) continue;
        d = circumscribed_disk(pts[i], pts[j], pts[k]);
      }
    }
  }
  return d;
}

}  // namespace dbs::placement
