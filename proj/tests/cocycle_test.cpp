#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/parser.hpp"

using namespace cocyclelab;

namespace {
const IMat2 kCat{5, 2, 2, 1};
LatticeAutomorphism cat_map() { return LatticeAutomorphism(kCat); }

Cocycle constant_cocycle(const Mat2& G) { return Cocycle(cat_map(), mx::constant(G)); }

Cocycle conjugated_triangular() { return Cocycle(cat_map(), parse_matrix("conj(R(pi*x1), [[1,1],[0,1]])", cat_map())); }

PeriodicOrbit fixed_orbit(const LatticeAutomorphism& f, i64 a, i64 b, i64 d) {
  return orbit_of(f, RationalPoint(a, b, d, f.q1, f.q2));
}
}  // namespace

TEST_CASE("product basics") {
  Mat2 G{2, 1, 1, 1};
  auto A = constant_cocycle(G);
  CHECK(frobenius_dist(product(A, {0.3, 0.7}, 0), Mat2::identity()) == 0.0);
  CHECK(frobenius_dist(product(A, {0.3, 0.7}, 3), G * G * G) < 1e-12);
  CHECK_THROWS_AS(product(A, {0, 0}, 61), std::invalid_argument);

  auto fc = lift_to_cover(cat_map(), 2, 1);
  Cocycle Atil(fc, parse_matrix("conj(R(pi*x1), [[1,1],[0,1]])", fc));
  CHECK(frobenius_dist(product(Atil, {0, 0}, 1), Mat2{1, 1, 0, 1}) < 1e-14);
}

TEST_CASE("cocycle equation and inverses") {
  auto A = conjugated_triangular();
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> len(0, 8);
  for (int k = 0; k < 40; ++k) {
    Vec2 x{uni(rng), uni(rng)};
    int n = len(rng), m = len(rng);
    Vec2 fmx = x;
    for (int i = 0; i < m; ++i) fmx = A.base.apply_float(fmx);
    Mat2 lhs = product(A, x, n + m);
    Mat2 rhs = product(A, fmx, n) * product(A, x, m);
    double scale = std::max(1.0, rhs.frobenius());
    CHECK(frobenius_dist(lhs, rhs) <= 1e-10 * scale);

    Vec2 fmnx = x;
    for (int i = 0; i < n; ++i) fmnx = A.base.apply_float_inverse(fmnx);
    CHECK(frobenius_dist(product(A, x, -n) * product(A, fmnx, n), Mat2::identity()) <= 1e-10);
  }
}

TEST_CASE("determinant multiplicativity along orbits") {
  auto f = cat_map();
  Cocycle A(f, parse_matrix("diag(1 + 0.3*cos(2*pi*x1), 1 + 0.2*sin(2*pi*x2)) * R(2*pi*x2)", f));
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vec2 x{uni(rng), uni(rng)};
    int n = 12;
    double expected = 1.0;
    Vec2 y = x;
    for (int i = 0; i < n; ++i) {
      expected *= A.eval(y).det();
      y = f.apply_float(y);
    }
    double got = product(A, x, n).det();
    CHECK(std::abs(got - expected) <= 1e-12 * std::abs(expected));
  }
}

TEST_CASE("orientation is enforced") {
  CHECK_THROWS_AS(constant_cocycle(Mat2::reflection(0.0)), orientation_error);
  CHECK_NOTHROW(constant_cocycle(Mat2::diagonal(2, 1)));
}

TEST_CASE("periodic_datum jordan types and exponents") {
  auto f = cat_map();
  auto origin = fixed_orbit(f, 0, 0, 1);

  auto par = periodic_datum(constant_cocycle({1, 1, 0, 1}), origin);
  CHECK(par.jordan_type == JordanType::Parabolic);
  CHECK(par.lyap_top == Catch::Approx(0.0).margin(1e-12));
  CHECK(par.lyap_bot == Catch::Approx(0.0).margin(1e-12));

  auto split = periodic_datum(constant_cocycle(Mat2::diagonal(2, 1)), origin);
  CHECK(split.jordan_type == JordanType::RealSplit);
  CHECK(split.lyap_top == Catch::Approx(std::log(2.0)));
  CHECK(split.lyap_bot == Catch::Approx(0.0).margin(1e-12));

  auto ell = periodic_datum(constant_cocycle(Mat2::rotation(1.0)), origin);
  CHECK(ell.jordan_type == JordanType::Elliptic);
  CHECK(ell.lyap_top == Catch::Approx(0.0).margin(1e-12));
  CHECK(std::abs(ell.eigenvalues[0] - std::polar(1.0, 1.0)) < 1e-12);

  auto sc = periodic_datum(constant_cocycle(Mat2::identity() * 3.0), origin);
  CHECK(sc.jordan_type == JordanType::Scalar);
  CHECK(sc.lyap_top == Catch::Approx(std::log(3.0)));

  // datum at a longer orbit multiplies the generator around the loop
  auto orbits = enumerate_orbits(f, 2);
  for (const auto& o : orbits)
    if (o.period == 2) {
      auto d = periodic_datum(constant_cocycle(Mat2::diagonal(2, 1)), o);
      CHECK(d.tr == Catch::Approx(5.0));  // diag(4,1)
      CHECK(d.lyap_top == Catch::Approx(std::log(2.0)));
    }
}

TEST_CASE("check_one_exponent") {
  auto f = cat_map();
  Cocycle conformal(f, parse_matrix("R(0.3 + 0.2*cos(2*pi*x1))", f));
  auto rep = check_one_exponent(conformal, 3);
  CHECK(rep.verdict);
  CHECK(rep.worst <= 1e-10);

  auto bad = check_one_exponent(constant_cocycle(Mat2::diagonal(2, 1)), 1);
  CHECK_FALSE(bad.verdict);
  CHECK(bad.worst == Catch::Approx(0.5));
  REQUIRE(bad.witness.has_value());
  auto worse = check_one_exponent(constant_cocycle(Mat2::diagonal(2, 1)), 2);
  CHECK(worse.worst == Catch::Approx(0.75));  // diag(4,1) at period 2

  auto good = check_one_exponent(conjugated_triangular(), 3);
  CHECK(good.verdict);
}

TEST_CASE("check_conjugate_periodic_data") {
  auto A = conjugated_triangular();
  auto self = check_conjugate_periodic_data(A, A, 3);
  CHECK(self.verdict);
  CHECK(self.failures.empty());

  auto tri = constant_cocycle({1, 0.7, 0, 1});
  auto id = constant_cocycle(Mat2::identity());
  auto rep = check_conjugate_periodic_data(tri, id, 3);
  CHECK_FALSE(rep.verdict);
  // parabolic vs scalar at every orbit despite equal tr and det
  std::size_t orbit_count = enumerate_orbits(cat_map(), 3).size();
  CHECK(rep.failures.size() == orbit_count);
}

TEST_CASE("conjugator canonical cases") {
  auto c0 = conjugator(Mat2::diagonal(2, 1), Mat2::diagonal(2, 1));
  REQUIRE(c0.has_value());
  CHECK(frobenius_dist(c0->C, Mat2::identity()) < 1e-12);

  auto c1 = conjugator(Mat2{1, 2, 0, 1}, Mat2{1, 1, 0, 1});
  REQUIRE(c1.has_value());
  CHECK(frobenius_dist(c1->C, Mat2::diagonal(std::sqrt(2.0), 1.0 / std::sqrt(2.0))) < 1e-12);

  CHECK_FALSE(conjugator(Mat2{1, 1, 0, 1}, Mat2::identity()).has_value());
  CHECK_FALSE(conjugator(Mat2::rotation(0.5), Mat2::rotation(0.7)).has_value());
  CHECK_FALSE(conjugator(Mat2::diagonal(2, 1), Mat2::diagonal(3, 1)).has_value());
}

TEST_CASE("conjugator recovers similarity for random pairs") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  auto random_invertible = [&]() {
    for (;;) {
      Mat2 M{uni(rng), uni(rng), uni(rng), uni(rng)};
      if (std::abs(M.det()) > 0.2) return M;
    }
  };
  std::vector<Mat2> seeds = {Mat2::rotation(0.8) * 1.3, Mat2::diagonal(2.0, 0.5), Mat2{3, 1, 0, 3},
                             Mat2::identity() * -2.0, Mat2::rotation(2.9) * 0.7};
  for (const auto& P : seeds) {
    for (int k = 0; k < 20; ++k) {
      Mat2 S = random_invertible();
      Mat2 Q = S.inverse() * P * S;
      auto c = conjugator(P, Q, 1e-7);
      REQUIRE(c.has_value());
      CHECK(std::abs(std::abs(c->C.det()) - 1.0) < 1e-10);
      Mat2 back = c->C * Q * c->C.inverse();
      CHECK(frobenius_dist(back, P) < 1e-7 * std::max(1.0, P.frobenius()));
      CHECK(c->cond >= 1.0);
    }
  }
}

TEST_CASE("conjugation preserves periodic eigenvalue data") {
  auto f = cat_map();
  auto A = conjugated_triangular();
  auto C = parse_matrix("R(2*pi*x1) * [[1, 0.2*sin(2*pi*x2)], [0, 1]]", f);
  Cocycle B(f, mx::conjugate(C, A.generator, f));

  for (const auto& o : enumerate_orbits(f, 3)) {
    auto da = periodic_datum(A, o), db = periodic_datum(B, o);
    CHECK(std::abs(da.tr - db.tr) <= 1e-9 * std::max(1.0, std::abs(da.tr)));
    CHECK(std::abs(da.det - db.det) <= 1e-9 * std::max(1.0, std::abs(da.det)));
    CHECK(da.jordan_type == db.jordan_type);
  }

  auto ca = classify_periodic(A, 3), cb = classify_periodic(B, 3);
  CHECK(ca.cls == cb.cls);
}

TEST_CASE("classify_periodic") {
  auto f = cat_map();
  Cocycle conformal(f, parse_matrix("R(0.3 + 0.2*cos(2*pi*x1))", f));
  auto ce = classify_periodic(conformal, 3);
  CHECK(ce.cls == PeriodicClass::Elliptic);
  REQUIRE(ce.elliptic_witness.has_value());

  auto cp = classify_periodic(conjugated_triangular(), 3);
  CHECK(cp.cls == PeriodicClass::Parabolic);
  CHECK_FALSE(cp.elliptic_witness.has_value());

  Cocycle rot_id(f, parse_matrix("conj(R(pi*x1), [[1,0],[0,1]])", f));
  auto cs = classify_periodic(rot_id, 3);
  CHECK(cs.cls == PeriodicClass::ScalarLike);

  auto cv = classify_periodic(constant_cocycle(Mat2::diagonal(2, 1)), 2);
  CHECK(cv.cls == PeriodicClass::Violation);
  CHECK(cv.split_witness.has_value());
}
