#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cocyclelab/torus.hpp"

using namespace cocyclelab;

namespace {
const IMat2 kCat{5, 2, 2, 1};
LatticeAutomorphism cat_map() { return LatticeAutomorphism(kCat); }
}  // namespace

TEST_CASE("check_hyperbolic") {
  CHECK(check_hyperbolic(kCat));
  CHECK(check_hyperbolic(IMat2{2, 1, 1, 1}));  // eigenvalues (3 +- sqrt 5)/2
  CHECK_FALSE(check_hyperbolic(IMat2{1, 1, 0, 1}));
  CHECK_FALSE(check_hyperbolic(IMat2{0, -1, 1, 0}));
  CHECK_THROWS_AS(check_hyperbolic(IMat2{2, 0, 0, 2}), not_unimodular_error);
  // det = -1 cases
  CHECK(check_hyperbolic(IMat2{1, 1, 1, 0}));
  CHECK_FALSE(check_hyperbolic(IMat2{0, 1, 1, 0}));
}

TEST_CASE("apply reduces exactly mod the lattice") {
  auto f = cat_map();
  RationalPoint x(1, 0, 2, 1, 1);  // (1/2, 0)
  auto y = apply(f, x);
  CHECK(y == RationalPoint(1, 0, 2, 1, 1));  // (5/2, 1) == (1/2, 0)

  RationalPoint origin(0, 0, 1, 1, 1);
  CHECK(apply(f, origin) == origin);

  auto f2 = lift_to_cover(f, 2, 1);
  RationalPoint xc(1, 0, 2, 2, 1);
  CHECK(apply(f2, xc) == RationalPoint(1, 0, 2, 2, 1));  // (5/2 mod 2, 1 mod 1)
}

TEST_CASE("period-1 points of the cat map") {
  auto pts = periodic_points(cat_map(), 1);
  REQUIRE(pts.size() == 4);
  std::set<std::pair<double, double>> got;
  for (auto& p : pts) got.insert({p.x1(), p.x2()});
  std::set<std::pair<double, double>> want{{0, 0}, {0, 0.5}, {0.5, 0}, {0.5, 0.5}};
  CHECK(got == want);
}

TEST_CASE("periodic counts match |tr(F^n) - 2|") {
  auto f = cat_map();
  for (int n = 1; n <= 6; ++n) {
    i128 want = f.std_matrix().pow(n).trace() - 2;
    if (want < 0) want = -want;
    auto pts = periodic_points(f, n);
    CHECK((i128)pts.size() == want);
    // points are distinct and each is fixed by f^n
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i - 1] < pts[i]);
    for (auto& p : pts) CHECK(is_fixed_by(f, p, n));
  }
  CHECK(periodic_points(f, 2).size() == 32);  // tr(F^2) = 34
}

TEST_CASE("apply permutes the period-n point set") {
  auto f = cat_map();
  auto pts = periodic_points(f, 3);
  std::set<RationalPoint> s(pts.begin(), pts.end());
  std::set<RationalPoint> img;
  for (auto& p : pts) img.insert(apply(f, p));
  CHECK(s == img);
}

TEST_CASE("denominators divide |det(F^n - I)|") {
  auto f = cat_map();
  for (int n = 1; n <= 5; ++n) {
    i128 D = fixed_point_count(f, n);
    for (auto& p : periodic_points(f, n)) CHECK(D % p.d == 0);
  }
}

TEST_CASE("enumerate_orbits groups points into orbits of least period") {
  auto f = cat_map();
  auto orbits = enumerate_orbits(f, 4);
  std::size_t npts = 0;
  for (auto& o : orbits) {
    CHECK((int)o.points.size() == o.period);
    CHECK(o.base == o.points.front());
    for (int i = 0; i < o.period; ++i)
      CHECK(apply(f, o.points[i]) == o.points[(i + 1) % o.period]);
    if (o.period == 4) npts += o.points.size();
  }
  // count of least-period-4 points: fix(4) minus fix(2) and fix(1) overlaps
  i128 fix4 = fixed_point_count(f, 4), fix2 = fixed_point_count(f, 2);
  CHECK((i128)npts == fix4 - fix2);
}

TEST_CASE("ball_periodic_search") {
  auto f = cat_map();
  auto near_origin = ball_periodic_search(f, {0, 0}, 0.01, 1);
  REQUIRE(near_origin.size() == 1);
  CHECK(near_origin[0].first.base == RationalPoint(0, 0, 1, 1, 1));

  auto center = ball_periodic_search(f, {0.5, 0.5}, 1e-9, 1);
  REQUIRE(center.size() == 1);
  CHECK(center[0].first.base == RationalPoint(1, 1, 2, 1, 1));

  auto generic = ball_periodic_search(f, {0.3, 0.7}, 0.05, 8);
  CHECK(!generic.empty());
  for (std::size_t i = 1; i < generic.size(); ++i)
    CHECK(generic[i - 1].first.period <= generic[i].first.period);
}

TEST_CASE("cover legality and lifting") {
  auto f = cat_map();
  CHECK_NOTHROW(lift_to_cover(f, 2, 1));  // F12 = 2 even
  CHECK_THROWS_AS(LatticeAutomorphism(IMat2{2, 1, 1, 1}, 2, 1), cover_error);

  // project(lift(x)) = x, and each point has q1*q2 preimages
  RationalPoint x(3, 4, 10, 1, 1);
  auto lifts = lift_point(x, 2, 1);
  REQUIRE(lifts.size() == 2);
  for (auto& y : lifts) CHECK(project_point(y) == x);
  CHECK(!(lifts[0] == lifts[1]));

  Vec2 v{0.3, 0.4};
  auto pv = project_point(Vec2{v.x + 1.0, v.y});
  CHECK(pv.x == Catch::Approx(0.3));
  CHECK(pv.y == Catch::Approx(0.4));
}

TEST_CASE("orbits upstairs project to orbits downstairs") {
  auto f = cat_map();
  auto fc = lift_to_cover(f, 2, 1);
  auto orbits = enumerate_orbits(fc, 2);
  for (auto& o : orbits) {
    auto p = project_point(o.base);
    int m = least_period(f, p, o.period);
    CHECK((m == o.period || 2 * m == o.period));
  }
}

TEST_CASE("torus distance") {
  CHECK(torus_dist({0.95, 0.0}, {0.05, 0.0}) == Catch::Approx(0.1));
  CHECK(torus_dist({0.2, 0.9}, {0.2, 0.1}) == Catch::Approx(0.2));
  CHECK(torus_dist({1.9, 0.0}, {0.1, 0.0}, 2, 1) == Catch::Approx(0.2));
}
