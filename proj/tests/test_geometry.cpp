#include <doctest.h>

#include <random>
#include <vector>

#include "dbs/error.hpp"
#include "dbs/geometry.hpp"
#include "oracles.hpp"

using namespace dbs;
using namespace dbs::placement;

TEST_CASE("enclosing disk of tiny sets") {
  const std::vector<Point> one{{3.0, -2.0}};
  const Disk d1 = min_enclosing_disk(one);
  CHECK(d1.center == one[0]);
  CHECK(d1.radius == 0.0);

  const std::vector<Point> two{{0.0, 0.0}, {4.0, 2.0}};
  const Disk d2 = min_enclosing_disk(two);
  CHECK(d2.center.x == doctest::Approx(2.0));
  CHECK(d2.center.y == doctest::Approx(1.0));
  CHECK(d2.radius == doctest::Approx(std::sqrt(5.0)));

  CHECK_THROWS_AS(min_enclosing_disk(std::vector<Point>{}), EmptyInputError);
}

TEST_CASE("enclosing disk of an acute triangle is its circumcircle") {
  const std::vector<Point> tri{{0.0, 0.0}, {2.0, 0.0}, {1.0, 1.5}};
  const Disk d = min_enclosing_disk(tri);
  const Disk c = circumscribed_disk(tri[0], tri[1], tri[2]);
  CHECK(d.radius == doctest::Approx(c.radius));
  CHECK(d.center.x == doctest::Approx(1.0));
}

TEST_CASE("degenerate point sets") {
  const std::vector<Point> same(7, Point{5.0, 5.0});
  CHECK(min_enclosing_disk(same).radius == 0.0);
  const std::vector<Point> line{{0.0, 0.0}, {1.0, 1.0}, {3.0, 3.0}, {2.0, 2.0}};
  const Disk d = min_enclosing_disk(line);
  CHECK(d.radius == doctest::Approx(std::sqrt(18.0) / 2.0));
  const Disk col = circumscribed_disk({0.0, 0.0}, {1.0, 0.0}, {5.0, 0.0});
  CHECK(col.radius == doctest::Approx(2.5));
}

TEST_CASE("enclosing disk matches pair and triple enumeration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  for (int inst = 0; inst < 40; ++inst) {
    std::vector<Point> pts(50);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const Disk fast = min_enclosing_disk(pts);
    const Disk slow = oracle::enclosing_disk_enumeration(pts);
    CHECK(std::abs(fast.radius - slow.radius) < 1e-9);
    for (const auto& p : pts) CHECK(fast.contains(p, 1e-9));
  }
}

TEST_CASE("enclosing disk does not depend on input order") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<Point> pts(30);
  for (auto& p : pts) p = {u(rng), u(rng)};
  const Disk a = min_enclosing_disk(pts);
  std::shuffle(pts.begin(), pts.end(), rng);
  const Disk b = min_enclosing_disk(pts);
  CHECK(a.radius == doctest::Approx(b.radius).epsilon(1e-12));
}
