#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cocyclelab/parser.hpp"
#include "cocyclelab/structures.hpp"

using namespace cocyclelab;

namespace {
const IMat2 kCat{5, 2, 2, 1};
LatticeAutomorphism cat_map() { return LatticeAutomorphism(kCat); }

Mat2 random_spd2(std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (;;) {
    Mat2 M{uni(rng), uni(rng), uni(rng), uni(rng)};
    if (std::abs(M.det()) > 0.3) return spd_normalize(M.transpose() * M);
  }
}

Mat2 random_invertible(std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (;;) {
    Mat2 M{uni(rng), uni(rng), uni(rng), uni(rng)};
    if (std::abs(M.det()) > 0.2 && M.cond() < 10.0) return M;
  }
}
}  // namespace

TEST_CASE("pushforward") {
  CHECK(frobenius_dist(pushforward(Mat2::rotation(0.7), Mat2::identity()), Mat2::identity()) < 1e-14);
  CHECK(frobenius_dist(pushforward(Mat2::diagonal(2, 0.5), Mat2::identity()), Mat2::diagonal(0.25, 4)) < 1e-14);
  // scale cancels
  CHECK(frobenius_dist(pushforward(Mat2::rotation(0.7) * 3.0, Mat2::identity()), Mat2::identity()) < 1e-13);
  CHECK_THROWS_AS(pushforward(Mat2{1, 1, 1, 1}, Mat2::identity()), std::domain_error);

  std::mt19937 rng(5);
  for (int k = 0; k < 50; ++k) {
    Mat2 S = random_spd2(rng);
    Mat2 A1 = random_invertible(rng), A2 = random_invertible(rng);
    CHECK(is_spd2(pushforward(A1, S)));
    // cocycle property
    CHECK(frobenius_dist(pushforward(A2, pushforward(A1, S)), pushforward(A2 * A1, S)) < 1e-11);
  }
}

TEST_CASE("hyperbolic distance and midpoint") {
  Mat2 S = Mat2::diagonal(4.0, 0.25);
  CHECK(hyp_distance(S, S) == 0.0);
  CHECK(hyp_distance(S, Mat2::identity()) == Catch::Approx(std::sqrt(2.0) * std::log(4.0)));
  CHECK(frobenius_dist(midpoint(S, Mat2::identity()), Mat2::diagonal(2.0, 0.5)) < 1e-13);
  CHECK(frobenius_dist(midpoint(S, S), S) < 1e-13);

  std::mt19937 rng(7);
  for (int k = 0; k < 50; ++k) {
    Mat2 S1 = random_spd2(rng), S2 = random_spd2(rng);
    Mat2 A = random_invertible(rng);
    CHECK(hyp_distance(S1, S2) == Catch::Approx(hyp_distance(S2, S1)).margin(1e-12));
    // pushforward is an isometry
    CHECK(std::abs(hyp_distance(pushforward(A, S1), pushforward(A, S2)) - hyp_distance(S1, S2)) < 1e-10);
    // midpoint is equidistant and symmetric
    Mat2 M = midpoint(S1, S2);
    CHECK(std::abs(hyp_distance(S1, M) - hyp_distance(M, S2)) < 1e-10);
    CHECK(frobenius_dist(M, midpoint(S2, S1)) < 1e-12);
  }
}

TEST_CASE("sqrt_spd and log coordinates") {
  CHECK(frobenius_dist(sqrt_spd(Mat2::identity()), Mat2::identity()) < 1e-15);
  CHECK(frobenius_dist(sqrt_spd(Mat2::diagonal(4, 0.25)), Mat2::diagonal(2, 0.5)) < 1e-14);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  for (int k = 0; k < 50; ++k) {
    Mat2 W = random_spd2(rng) * scale(rng);
    Mat2 C = sqrt_spd(W);
    CHECK(frobenius_dist(C * C, W) < 1e-12 * std::max(1.0, W.frobenius()));
    CHECK(std::abs(C.b - C.c) < 1e-13);
    CHECK(C.trace() > 0);
  }
  for (int k = 0; k < 50; ++k) {
    Mat2 S = random_spd2(rng);
    CHECK(frobenius_dist(spd_exp(spd_log(S)), S) < 1e-12);
  }
}

TEST_CASE("find_conformal on an already conformal cocycle") {
  auto f = cat_map();
  Cocycle A(f, parse_matrix("diag(1.2, 1.2) * R(2*pi*x2 + 0.3)", f));
  auto field = find_conformal(A, 32, 200);
  CHECK(field.residual <= 1e-12);
  CHECK_FALSE(field.diverged);
  for (int i = 0; i < 32; i += 5)
    for (int j = 0; j < 32; j += 5) {
      CHECK(is_spd2(field.S.at(i, j)));
      CHECK(hyp_distance(field.S.at(i, j), Mat2::identity()) < 1e-10);
    }
}

TEST_CASE("find_conformal recovers a conjugated structure") {
  auto f = cat_map();
  auto C = parse_matrix("[[1, 0.3*sin(2*pi*x2)], [0, 1]]", f);
  auto A0 = parse_matrix("diag(1.2, 1.2) * R(2*pi*x2 + 0.3)", f);
  Cocycle B(f, mx::conjugate(C, A0, f));

  auto field = find_conformal(B, 64, 600);
  CHECK(field.residual <= 1e-6);
  CHECK(field.anchored_fraction > 0.9);

  // the invariant structure is Id transported through the known conjugacy
  double worst = 0.0;
  for (int i = 0; i < 64; i += 3)
    for (int j = 0; j < 64; j += 3) {
      Vec2 x = field.S.node(i, j);
      Mat2 oracle = pushforward(C->eval(x), Mat2::identity());
      worst = std::max(worst, hyp_distance(field.S.at(i, j), oracle));
    }
  CHECK(worst <= 1e-4);

  // stored residual matches a from-scratch recomputation
  double res = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      auto [ii, jj] = node_image(f, 64, i, j);
      res = std::max(res, hyp_distance(field.S.at(ii, jj), pushforward(B.eval(field.S.node(i, j)), field.S.at(i, j))));
    }
  CHECK(std::abs(res - field.residual) <= 1e-9);
}

TEST_CASE("find_conformal reports failure for a split cocycle") {
  auto f = cat_map();
  Cocycle A(f, mx::constant(Mat2::diagonal(2, 1)));
  auto field = find_conformal(A, 32, 300);
  CHECK(field.anchored_fraction == 0.0);
  CHECK(field.residual > 0.1);  // residual does not tend to 0
}

TEST_CASE("find_line constant cases") {
  auto f = cat_map();
  auto par = find_line(Cocycle(f, mx::constant(Mat2{1, 1, 0, 1})), 32, 200);
  CHECK(par.residual <= 1e-10);
  for (int i = 0; i < 32; i += 3)
    for (int j = 0; j < 32; j += 3) CHECK(line_angle_dist(par.theta.at(i, j), 0.0) < 1e-12);

  Cocycle split(f, mx::constant(Mat2::diagonal(2, 1)));
  auto fwd = find_line(split, 32, 200, LineDirection::Forward);
  auto bwd = find_line(split, 32, 200, LineDirection::Backward);
  CHECK(fwd.residual <= 1e-10);
  CHECK(bwd.residual <= 1e-10);
  for (int i = 0; i < 32; i += 3)
    for (int j = 0; j < 32; j += 3) {
      CHECK(line_angle_dist(fwd.theta.at(i, j), 0.0) < 1e-12);
      CHECK(line_angle_dist(bwd.theta.at(i, j), M_PI / 2) < 1e-12);
    }
  CHECK(holonomy(fwd) == std::array<int, 2>{1, 1});
}

TEST_CASE("find_line on conjugated cocycles with a half-twist") {
  auto f = cat_map();
  // the invariant line of the conjugated unipotent is the rotated first axis
  Cocycle A(f, parse_matrix("conj(R(pi*x1), [[1,1],[0,1]])", f));
  auto L = find_line(A, 64, 400);
  CHECK(L.residual <= 1e-9);
  CHECK(L.anchored_fraction == 1.0);
  for (int i = 0; i < 64; i += 3)
    for (int j = 0; j < 64; j += 3) {
      Vec2 x = L.theta.node(i, j);
      CHECK(line_angle_dist(L.theta.at(i, j), line_angle({std::cos(M_PI * x.x), std::sin(M_PI * x.x)})) < 1e-9);
    }
  CHECK(holonomy(L) == std::array<int, 2>{-1, 1});

  Cocycle S(f, parse_matrix("conj(R(pi*x1), diag(2,1))", f));
  auto Lf = find_line(S, 64, 400, LineDirection::Forward);
  auto Lb = find_line(S, 64, 400, LineDirection::Backward);
  CHECK(Lf.residual <= 1e-9);
  CHECK(Lb.residual <= 1e-9);
  for (int i = 0; i < 64; i += 7)
    for (int j = 0; j < 64; j += 7) {
      Vec2 x = Lf.theta.node(i, j);
      CHECK(line_angle_dist(Lf.theta.at(i, j), line_angle({std::cos(M_PI * x.x), std::sin(M_PI * x.x)})) < 1e-9);
      CHECK(line_angle_dist(Lb.theta.at(i, j), line_angle(Vec2{-std::sin(M_PI * x.x), std::cos(M_PI * x.x)})) < 1e-9);
    }
  CHECK(holonomy(Lf) == std::array<int, 2>{-1, 1});
  CHECK(holonomy(Lb) == std::array<int, 2>{-1, 1});
}

TEST_CASE("holonomy basics and roughness guard") {
  LineField flat;
  flat.theta = GridField<double>(16, 1, 1, 0.4);
  CHECK(holonomy(flat) == std::array<int, 2>{1, 1});

  LineField twist;
  twist.theta = GridField<double>::sample(16, 1, 1, [](const Vec2& x) {
    double t = std::fmod(M_PI * x.x, M_PI);
    return t < 0 ? t + M_PI : t;
  });
  CHECK(holonomy(twist) == std::array<int, 2>{-1, 1});

  LineField rough;
  rough.theta = GridField<double>(16, 1, 1);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(0.0, M_PI);
  for (auto& t : rough.theta.v) t = uni(rng);
  CHECK_THROWS_AS(holonomy(rough), field_too_rough_error);
}

TEST_CASE("line_from_periodic") {
  auto f = cat_map();
  auto par = line_from_periodic(Cocycle(f, mx::constant(Mat2{1, 1, 0, 1})), 3);
  for (const auto& s : par) {
    REQUIRE(s.angles.size() == 1);
    CHECK(line_angle_dist(s.angles[0], 0.0) < 1e-12);
  }

  auto split = line_from_periodic(Cocycle(f, mx::constant(Mat2::diagonal(2, 1))), 3);
  for (const auto& s : split) {
    REQUIRE(s.angles.size() == 2);
    CHECK(line_angle_dist(s.angles[0], 0.0) < 1e-12);     // dominated direction first
    CHECK(line_angle_dist(s.angles[1], M_PI / 2) < 1e-12);
  }

  CHECK_THROWS_AS(line_from_periodic(Cocycle(f, mx::constant(Mat2::rotation(0.5))), 1), elliptic_product_error);
}

TEST_CASE("periodic eigen-directions of a triangular cocycle match the series formula") {
  auto f = cat_map();
  auto alpha = parse_scalar("1 - 0.1*(sin(pi*x1)*sin(pi*x1) + sin(pi*x2)*sin(pi*x2))", f);
  double beta = 1.0;
  Cocycle A(f, parse_matrix("[[1 - 0.1*(sin(pi*x1)*sin(pi*x1) + sin(pi*x2)*sin(pi*x2)), 1], [0, 1]]", f));

  int checked = 0;
  for (const auto& s : line_from_periodic(A, 4)) {
    int n = s.orbit.period;
    // alpha^x = product around the orbit; alpha^* = 1 + a(f^{n-1}p) + a(f^{n-1}p)a(f^{n-2}p) + ...
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = alpha->eval(s.orbit.points[std::size_t(i)].to_vec2());
    double prod = 1.0, star = 1.0;
    for (int i = n - 1; i >= 1; --i) {
      prod *= a[std::size_t(i)];
      star += prod;
    }
    prod *= a[0];
    if (std::abs(1.0 - prod) < 1e-2) continue;  // (near-)parabolic orbit: second direction degenerates
    REQUIRE(s.angles.size() == 2);
    double c = beta * star / (1.0 - prod);
    // eigenvalue 1 dominates alpha^x < 1, so the (c, 1) direction comes first
    Vec2 v = line_vector(s.angles[0]);
    REQUIRE(std::abs(v.y) > 1e-12);
    CHECK(std::abs(v.x / v.y - c) <= 1e-10 * std::max(1.0, std::abs(c)));
    // the contracted direction is the first axis
    CHECK(line_angle_dist(s.angles[1], 0.0) < 1e-12);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("find_line agrees with periodic eigen-directions at node periodic points") {
  auto f = cat_map();
  Cocycle A(f, parse_matrix("conj(R(pi*x1), diag(2,1))", f));
  int N = 64;
  auto L = find_line(A, N, 300);
  REQUIRE(L.residual <= 1e-9);
  int checked = 0;
  for (const auto& s : line_from_periodic(A, 2)) {
    for (const auto& p : s.orbit.points) {
      if ((i64(N) * p.a) % p.d != 0 || (i64(N) * p.b) % p.d != 0) continue;  // not a grid node
      int i = GridField<double>::wrap(int(i64(N) * p.a / p.d), N);
      int j = GridField<double>::wrap(int(i64(N) * p.b / p.d), N);
      Mat2 P = product(A, p.to_vec2(), s.orbit.period);
      auto lines = detail::invariant_lines(P, {});
      REQUIRE_FALSE(lines.empty());
      CHECK(line_angle_dist(L.theta.at(i, j), lines[0]) <= std::max(10.0 * L.residual, 1e-6));
      ++checked;
    }
  }
  CHECK(checked >= 2);
}

TEST_CASE("conjugation equivariance of line fields and holonomy") {
  auto f = cat_map();
  Cocycle A(f, parse_matrix("conj(R(pi*x1), diag(2,1))", f));
  auto C = parse_matrix("R(2*pi*x1) * [[1, 0.2*sin(2*pi*x2)], [0, 1]]", f);
  Cocycle B(f, mx::conjugate(C, A.generator, f));

  int N = 64;
  auto LA = find_line(A, N, 300);
  auto LB = find_line(B, N, 300);
  REQUIRE(LA.residual <= 1e-8);
  REQUIRE(LB.residual <= 1e-8);
  double worst = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Vec2 x = LA.theta.node(i, j);
      double mapped = line_angle(C->eval(x) * line_vector(LA.theta.at(i, j)));
      worst = std::max(worst, line_angle_dist(LB.theta.at(i, j), mapped));
    }
  CHECK(worst <= 1e-4);
  CHECK(holonomy(LA) == holonomy(LB));
}

TEST_CASE("interpolation helpers") {
  // angle interpolation crosses the mod-pi seam along the shortest arc
  GridField<double> g(8, 1, 1);
  for (auto& t : g.v) t = 0.1;
  g.at(3, 3) = M_PI - 0.1;
  double mid = angle_bilinear(g, {(3 + 0.5) / 8.0, 3.0 / 8.0});
  CHECK(line_angle_dist(mid, 0.0) < 1e-12);  // halfway between -0.1 and 0.1 as lines

  auto smooth = GridField<double>::sample(64, 1, 1, [](const Vec2& x) { return 1.0 + 0.4 * std::sin(2 * M_PI * x.x); });
  CHECK(std::abs(angle_bilinear(smooth, {0.37, 0.52}) - bilinear(smooth, {0.37, 0.52})) < 1e-12);

  auto sfield = GridField<Mat2>::sample(32, 1, 1, [](const Vec2& x) {
    return spd_exp({0.3 * std::sin(2 * M_PI * x.x), 0.2 * std::cos(2 * M_PI * x.y)});
  });
  // exact at nodes, SPD in between
  CHECK(frobenius_dist(spd_bilinear(sfield, sfield.node(5, 9)), sfield.at(5, 9)) < 1e-13);
  Mat2 between = spd_bilinear(sfield, {0.171, 0.533});
  CHECK(is_spd2(between));
}
