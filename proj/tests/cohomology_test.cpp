#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cocyclelab/cohomology.hpp"
#include "cocyclelab/parser.hpp"

using namespace cocyclelab;

namespace {
const IMat2 kCat{5, 2, 2, 1};
LatticeAutomorphism cat_map() { return LatticeAutomorphism(kCat); }

ModelField field(const std::string& text, const LatticeAutomorphism& f) {
  return make_field(parse_scalar(text, f), f.q1, f.q2);
}

Cocycle coc(const std::string& text) {
  auto f = cat_map();
  return Cocycle(f, parse_matrix(text, f));
}

using Status = CohomologyVerdict::Status;
}  // namespace

TEST_CASE("model evaluation and validity") {
  auto f = cat_map();
  auto tri = triangular_model(f, field("1", f), field("sin(2*pi*x1)", f));
  Vec2 x{0.23, 0.71};
  Mat2 m = model_eval(tri, x);
  CHECK(m.a == 1.0);
  CHECK(m.c == 0.0);
  CHECK(m.b == Catch::Approx(std::sin(2 * M_PI * 0.23)));

  CHECK(model_validity(tri).ok);
  // a coboundary shear degenerates the model
  auto degen = triangular_model(f, field("1", f), field("compf(0.2*sin(2*pi*x2)) - 0.2*sin(2*pi*x2)", f));
  auto val = model_validity(degen);
  CHECK_FALSE(val.ok);

  auto con = conformal_model(f, field("1.1", f), field("0.3 + 0.2*sin(2*pi*x1)", f));
  CHECK(model_validity(con).ok);
  CHECK(frobenius_dist(model_eval(con, x), Mat2::rotation(0.3 + 0.2 * std::sin(2 * M_PI * 0.23)) * 1.1) < 1e-14);

  auto dia = diagonal_model(f, field("2 + 0.3*cos(2*pi*x1)", f), field("0.5 + 0.1*sin(2*pi*x2)", f));
  CHECK(model_validity(dia).ok);
  auto dia_degen = diagonal_model(f, field("1.5", f), field("1.5", f));
  CHECK_FALSE(model_validity(dia_degen).ok);
}

TEST_CASE("scalar tester") {
  auto f = cat_map();
  std::string k = "1 + 0.3*cos(2*pi*x1)";
  auto A = scalar_model(f, field(k, f));

  SECTION("exp-coboundary twin is cohomologous") {
    auto B = scalar_model(f, field("(" + k + ") * exp(compf(0.2*sin(2*pi*x2)) - 0.2*sin(2*pi*x2))", f));
    auto v = test_scalar(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.residual <= 1e-6);
    REQUIRE(v.log_phi);
    // with B = k exp(u o f - u) the transfer is phi = exp(-u), up to a constant
    Vec2 p{0.31, 0.67}, q{0.05, 0.44};
    double d1 = v.log_phi->eval(p) + 0.2 * std::sin(2 * M_PI * p.y);
    double d2 = v.log_phi->eval(q) + 0.2 * std::sin(2 * M_PI * q.y);
    CHECK(std::abs(d1 - d2) < 1e-9);
    // symmetry
    CHECK(test_scalar(B, A).status == Status::Cohomologous);
  }

  SECTION("rational-twist twin (non-polynomial log transfer)") {
    auto B = scalar_model(
        f, field("(" + k + ") * (2 + cos(2*pi*compf(x2))) / (2 + cos(2*pi*x2))", f));
    auto v = test_scalar(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.residual <= 1e-6);
  }

  SECTION("constant factor 2 is obstructed") {
    auto B = scalar_model(f, field("2*(" + k + ")", f));
    auto v = test_scalar(A, B);
    REQUIRE(v.status == Status::NotCohomologous);
    REQUIRE_FALSE(v.witnesses.empty());
    // period-n obstruction is n log 2
    CHECK(std::abs(v.witnesses[0].value) >= std::log(2.0) - 1e-9);
  }

  SECTION("sign mismatch is obstructed") {
    auto B = scalar_model(f, field("0 - (" + k + ")", f));
    CHECK(test_scalar(A, B).status == Status::NotCohomologous);
  }

  SECTION("transitivity") {
    auto B = scalar_model(f, field("(" + k + ") * exp(compf(0.2*sin(2*pi*x2)) - 0.2*sin(2*pi*x2))", f));
    auto C = scalar_model(f, field("(" + k + ") * exp(compf(0.1*cos(2*pi*x1)) - 0.1*cos(2*pi*x1))", f));
    CHECK(test_scalar(A, B).status == Status::Cohomologous);
    CHECK(test_scalar(A, C).status == Status::Cohomologous);
    CHECK(test_scalar(B, C).status == Status::Cohomologous);
  }
}

TEST_CASE("triangular tester") {
  auto f = cat_map();
  std::string beta = "0.4*sin(2*pi*x1) + 0.2*cos(2*pi*(x1 + x2))";
  auto B = triangular_model(f, field("1", f), field(beta, f));

  SECTION("constant multiple plus coboundary") {
    std::string alpha = "2*(" + beta + ") + compf(0.2*sin(2*pi*x2)) - 0.2*sin(2*pi*x2)";
    auto A = triangular_model(f, field("1", f), field(alpha, f));
    auto v = test_triangular(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    REQUIRE(v.c);
    CHECK(*v.c == Catch::Approx(2.0).margin(1e-8));
    CHECK(v.residual <= 1e-6);
    REQUIRE(v.s);
    // s o f - s must equal alpha - c beta = u o f - u
    for (Vec2 x : {Vec2{0.13, 0.71}, Vec2{0.52, 0.09}}) {
      double lhs = v.s->eval(f.apply_float(x)) - v.s->eval(x);
      double rhs = 0.2 * std::sin(2 * M_PI * f.apply_float(x).y) - 0.2 * std::sin(2 * M_PI * x.y);
      CHECK(std::abs(lhs - rhs) < 1e-9);
    }
    CHECK(test_triangular(B, A).status == Status::Cohomologous);
  }

  SECTION("constant offset breaks the ratio") {
    auto A = triangular_model(f, field("(" + beta + ") + 0.3", f), field("(" + beta + ") + 0.3", f));
    // use matching k = 1 so only the shear differs
    A = triangular_model(f, field("1", f), field("(" + beta + ") + 0.3", f));
    auto v = test_triangular(A, B);
    REQUIRE(v.status == Status::NotCohomologous);
    REQUIRE(v.witnesses.size() == 2);
    // the two witnesses carry distinct alpha+/beta+ ratios
    CHECK(std::abs(v.witnesses[0].value - v.witnesses[1].value) > 1e-3);
  }

  SECTION("scalar factor obstruction dominates") {
    auto A = triangular_model(f, field("1.2", f), field(beta, f));
    auto v = test_triangular(A, B);
    REQUIRE(v.status == Status::NotCohomologous);
    REQUIRE_FALSE(v.witnesses.empty());
  }
}

TEST_CASE("conformal tester") {
  auto f = cat_map();
  std::string alpha = "0.3 + 0.2*sin(2*pi*x1)";
  auto A = conformal_model(f, field("1.1", f), field(alpha, f));

  SECTION("rotation branch") {
    auto B = conformal_model(f, field("1.1", f),
                             field("(" + alpha + ") - (compf(0.15*cos(2*pi*x2)) - 0.15*cos(2*pi*x2))", f));
    auto v = test_conformal(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.branch == 1);
    CHECK(v.residual <= 1e-6);
  }

  SECTION("reflection branch") {
    auto B = conformal_model(f, field("1.1", f), field("0 - (" + alpha + ")", f));
    auto v = test_conformal(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.branch == -1);
    CHECK(v.residual <= 1e-6);
  }

  SECTION("constant angle offset fails both branches") {
    auto B = conformal_model(f, field("1.1", f), field("(" + alpha + ") + 0.3", f));
    auto v = test_conformal(A, B);
    REQUIRE(v.status == Status::NotCohomologous);
    CHECK(v.witnesses.size() >= 2);
  }

  SECTION("winding transfer") {
    int q1 = f.q1, q2 = f.q2;
    ModelField a;
    a.poly = to_trigpoly(parse_scalar("0.1*sin(2*pi*x2)", f), q1, q2);
    a.fn = [](const Vec2& x) { return 2 * M_PI * x.x + 0.1 * std::sin(2 * M_PI * x.y); };
    ModelField b;
    b.poly = a.poly;
    b.fn = [](const Vec2& x) { return 2 * M_PI * (-3 * x.x - 2 * x.y) + 0.1 * std::sin(2 * M_PI * x.y); };
    auto Aw = conformal_model(f, field("1.1", f), a, {1, 0});
    auto Bw = conformal_model(f, field("1.1", f), b, {-3, -2});
    auto v = test_conformal(Aw, Bw);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.branch == 1);
    CHECK(v.s_winding == std::array<int, 2>{1, 0});
    CHECK(v.residual <= 1e-6);
  }
}

TEST_CASE("diagonal tester") {
  auto f = cat_map();
  std::string a1 = "2 + 0.3*cos(2*pi*x1)", a2 = "0.5 + 0.1*sin(2*pi*x2)";
  auto A = diagonal_model(f, field(a1, f), field(a2, f));

  SECTION("straight pairing") {
    auto B = diagonal_model(
        f, field("(" + a1 + ") * exp(compf(0.2*sin(2*pi*x1)) - 0.2*sin(2*pi*x1))", f), field(a2, f));
    auto v = test_diagonal(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.branch == 0);
    CHECK(v.residual <= 1e-6);
  }

  SECTION("swapped pairing uses an anti-diagonal certificate") {
    auto B = diagonal_model(f, field(a2, f), field(a1, f));
    auto v = test_diagonal(A, B);
    REQUIRE(v.status == Status::Cohomologous);
    CHECK(v.branch == 1);
    CHECK(v.residual <= 1e-6);
    REQUIRE(v.certificate);
    Mat2 C = v.certificate(Vec2{0.2, 0.6});
    CHECK(C.a == 0.0);
    CHECK(C.d == 0.0);
  }

  SECTION("scaling one entry is obstructed in both pairings") {
    auto B = diagonal_model(f, field("2*(" + a1 + ")", f), field(a2, f));
    auto v = test_diagonal(A, B);
    REQUIRE(v.status == Status::NotCohomologous);
    CHECK_FALSE(v.witnesses.empty());
  }
}

TEST_CASE("centralizers commute with their models") {
  auto f = cat_map();
  std::vector<ModelForm> models = {
      triangular_model(f, field("1 + 0.2*cos(2*pi*x1)", f), field("sin(2*pi*x1)", f)),
      scalar_model(f, field("1.3", f)),
      conformal_model(f, field("1.1", f), field("0.3 + 0.2*sin(2*pi*x1)", f)),
      diagonal_model(f, field("2 + 0.3*cos(2*pi*x1)", f), field("0.5 + 0.1*sin(2*pi*x2)", f)),
  };
  for (const auto& m : models) {
    auto d = centralizer(m);
    CHECK(d.parameters >= 2);
    for (auto [a, s] : {std::pair{1.5, 0.7}, std::pair{0.8, -0.3}}) {
      Mat2 Z = d.element(a, s);
      REQUIRE(std::abs(Z.det()) > 1e-12);
      CHECK(centralizer_defect(m, Z) < 1e-12);
    }
  }
}

TEST_CASE("angle unwrapping") {
  int N = 64;
  GridField<double> g(N, 1, 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) g.at(i, j) = std::fmod(2 * M_PI * i / N, M_PI);
  auto ug = detail::unwrap_angles(g, M_PI, M_PI / 4);
  CHECK(ug.jump1 == Catch::Approx(2 * M_PI));
  CHECK(ug.jump2 == Catch::Approx(0.0).margin(1e-12));
  // the unwrapped field is the linear lift, bilinear-exact off nodes
  CHECK(ug.eval(Vec2{0.3, 0.7}) - ug.theta.at(0, 0) == Catch::Approx(2 * M_PI * 0.3));

  // a genuinely rough field cannot be unwrapped
  GridField<double> rough(N, 1, 1);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(0.0, M_PI);
  for (auto& v : rough.v) v = uni(rng);
  CHECK_THROWS_AS(detail::unwrap_angles(rough, M_PI, M_PI / 4), field_too_rough_error);
}

TEST_CASE("triangular reduction recovers the model") {
  auto f = cat_map();
  auto M0 = parse_matrix("[[1, 1 + 0.5*sin(2*pi*x1)], [0, 1]]", f);
  auto C0 = parse_matrix("R(2*pi*x1) * [[1, 0], [0, exp(0.2*cos(2*pi*x2))]]", f);
  Cocycle A(f, mx::conjugate(C0, M0, f));

  auto L = find_line(A);
  REQUIRE(L.residual <= 1e-6);
  auto red = reduce_triangular(A, L);
  CHECK(red.residual <= 1e-8);
  CHECK(red.frame_jumps[0] % 2 == 0);
  REQUIRE(red.model.kind == ModelKind::Triangular);
  REQUIRE(red.model.alpha.poly);

  auto target = triangular_model(f, field("1", f), field("1 + 0.5*sin(2*pi*x1)", f));
  auto v = test_triangular(red.model, target);
  REQUIRE(v.status == Status::Cohomologous);
  CHECK(v.residual <= 1e-6);

  // a non-orientable line field is rejected
  Cocycle Ap(f, parse_matrix("conj(R(pi*x1), [[1, 1 + 0.5*sin(2*pi*x1)], [0, 1]])", f));
  auto Lp = find_line(Ap);
  REQUIRE(Lp.residual <= 1e-6);
  CHECK_THROWS_AS(reduce_triangular(Ap, Lp), reduction_error);
}

TEST_CASE("conformal reduction recovers the model") {
  auto f = cat_map();

  SECTION("rotation frame, exact recovery") {
    // A = R(u o f) k R(alpha) R(u)^{-1} = k R(alpha + u o f - u)
    Cocycle A(f, mx::conjugate(parse_matrix("R(0.3*sin(2*pi*x2))", f),
                               parse_matrix("diag(1.2, 1.2) * R(0.4 + 0.2*cos(2*pi*x1))", f), f));
    auto S = find_conformal(A);
    REQUIRE(S.residual <= 1e-6);
    auto red = reduce_conformal(A, S);
    CHECK(red.residual <= 1e-6);
    REQUIRE(red.model.kind == ModelKind::Conformal);
    REQUIRE(red.model.alpha.poly);
    auto target = conformal_model(f, field("1.2", f), field("0.4 + 0.2*cos(2*pi*x1)", f));
    auto v = test_conformal(red.model, target);
    REQUIRE(v.status == Status::Cohomologous);
  }

  SECTION("curved frame, node-exact conformality") {
    Cocycle A(f, mx::conjugate(parse_matrix("[[1, 0.3*sin(2*pi*x2)], [0, 1]]", f),
                               parse_matrix("diag(1.2, 1.2) * R(0.4 + 0.2*cos(2*pi*x1))", f), f));
    auto S = find_conformal(A);
    REQUIRE(S.residual <= 1e-6);
    auto red = reduce_conformal(A, S);
    CHECK(red.residual <= 1e-6);
    // the scalar factor is determinant-exact even between nodes
    REQUIRE(red.model.k.poly);
    CHECK(std::abs(red.model.k(Vec2{0.317, 0.911}) - 1.2) < 1e-10);
  }
}

TEST_CASE("diagonal reduction recovers both entries") {
  auto f = cat_map();
  std::string a1 = "2 + 0.3*cos(2*pi*x1)", a2 = "0.5 + 0.1*sin(2*pi*x2)";
  Cocycle A(f, mx::conjugate(parse_matrix("R(2*pi*x1)", f),
                             parse_matrix("[[" + a1 + ", 0], [0, " + a2 + "]]", f), f));
  auto Lp = find_line(A, 128, 2000, LineDirection::Forward);
  auto Lm = find_line(A, 128, 2000, LineDirection::Backward);
  REQUIRE(Lp.residual <= 1e-8);
  REQUIRE(Lm.residual <= 1e-8);
  auto red = reduce_diagonal(A, Lp, Lm);
  CHECK(red.residual <= 1e-8);

  auto e1 = parse_scalar(a1, f);
  auto e2 = parse_scalar(a2, f);
  int N = red.C_grid.N;
  for (int i = 0; i < N; i += 9)
    for (int j = 0; j < N; j += 9) {
      Vec2 x = red.C_grid.node(i, j);
      CHECK(std::abs(red.model.alpha(x) - e1->eval(x)) < 1e-8);
      CHECK(std::abs(red.model.alpha2(x) - e2->eval(x)) < 1e-8);
    }

  CHECK_THROWS_AS(reduce_diagonal(A, Lp, Lp), transversality_error);
}

TEST_CASE("full classification") {
  SECTION("type I: constant unipotent") {
    auto c = classify_full(coc("[[1, 1 + 0.5*sin(2*pi*x1)], [0, 1]]"));
    CHECK(c.type == FullType::I);
  }
  SECTION("type I': unipotent twisted by a half-winding rotation") {
    auto c = classify_full(coc("conj(R(pi*x1), [[1, 1 + 0.5*sin(2*pi*x1)], [0, 1]])"));
    CHECK(c.type == FullType::Iprime);
    CHECK(c.holonomy_signs == std::array<int, 2>{-1, 1});
  }
  SECTION("type II: rotation coboundary") {
    auto c = classify_full(coc("R(compf(0.3*sin(2*pi*x2)) - 0.3*sin(2*pi*x2))"));
    CHECK(c.type == FullType::II);
  }
  SECTION("type II': scalar conjugate over the double cover only") {
    auto c = classify_full(coc("diag(0.9, 0.9) * R(2*pi*(2*x1 + x2))"));
    CHECK(c.type == FullType::IIprime);
    REQUIRE(c.reduction);
    CHECK(c.reduction->model.on_cover);
  }
  SECTION("type III: genuinely rotating") {
    CHECK(classify_full(coc("diag(1.3, 1.3) * R(0.7)")).type == FullType::III);
    auto f = cat_map();
    Cocycle A(f, mx::conjugate(parse_matrix("[[1, 0.3*sin(2*pi*x2)], [0, 1]]", f),
                               parse_matrix("diag(1.2, 1.2) * R(0.4 + 0.2*cos(2*pi*x1))", f), f));
    CHECK(classify_full(A).type == FullType::III);
  }
  SECTION("two-exponent data is rejected") {
    CHECK(classify_full(coc("[[2, 0], [0, 0.5]]")).type == FullType::Undetermined);
  }
}

TEST_CASE("periodic conjugators and their dispersion") {
  auto f = cat_map();
  Cocycle A = coc("diag(1.2, 1.2) * R(0.4 + 0.2*cos(2*pi*x1))");
  Mat2 C0{1, 0.5, 0, 1};
  Cocycle B(f, mx::conjugate(mx::constant(C0), A.generator, f));

  auto an = periodic_conjugator_analysis(A, B, 4, ModelKind::Conformal, Vec2{0.3, 0.3}, 0.4);
  CHECK(an.failures == 0);
  CHECK(an.sup_norm > 0.0);
  CHECK(an.sup_norm < 100.0);
  CHECK(an.in_ball_count >= 2);
  // all conjugators agree modulo the conformal centralizer
  CHECK(an.dispersion < 1e-6);

  // scalar quotient collapses everything
  CHECK(centralizer_quotient_distance(ModelKind::Scalar, Mat2::identity(), Mat2{3, 1, 0, 2}) == 0.0);
}

TEST_CASE("trace flip witness") {
  Cocycle A = coc("[[1, 1], [0, 1]]");
  Cocycle B = coc("[[-1, -1], [0, -1]]");
  auto w = trace_flip_witness(A, B, 3);
  REQUIRE(w);
  CHECK(w->orbit.period % 2 == 1);
  CHECK(w->trA == Catch::Approx(-w->trB));
  CHECK_FALSE(trace_flip_witness(A, A, 3));
}
