// Expression trees for scalar and 2x2 matrix fields on the torus.
//
// Two tiers: general immutable trees here (sin/cos/exp/div, precomposition
// with the automorphism, smooth bumps), and exact TrigPoly conversion for
// the subset built from trig monomials of integer-frequency linear forms.
#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cocyclelab/torus.hpp"
#include "cocyclelab/trigpoly.hpp"

namespace cocyclelab {

struct parse_error : std::runtime_error {
  int line = 0, col = 0;
  parse_error(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " + std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};
struct periodicity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct not_representable_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct singular_eval_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ScalarExpr;
using ScalarPtr = std::shared_ptr<const ScalarExpr>;

// Immutable node. Evaluation treats the expression as a function on R^2
// (coordinates are never reduced), so periodicity is a checkable property
// rather than an artifact of wrapping.
class ScalarExpr {
 public:
  enum class Kind { Const, Coord, Add, Sub, Mul, Div, Sin, Cos, Exp, Comp, Bump };

  Kind kind;
  double value = 0.0;      // Const
  int axis = 0;            // Coord: 0 = x1, 1 = x2
  ScalarPtr lhs, rhs;
  LatticeAutomorphism map;   // Comp
  std::vector<Vec2> centers; // Bump
  double width = 0.0;
  int bq1 = 1, bq2 = 1;
  double holder_sigma = 1.0;

  explicit ScalarExpr(Kind k) : kind(k) {}

  double eval(const Vec2& x) const {
    switch (kind) {
      case Kind::Const: return value;
      case Kind::Coord: return axis == 0 ? x.x : x.y;
      case Kind::Add: return lhs->eval(x) + rhs->eval(x);
      case Kind::Sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::Mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::Div: {
        double den = rhs->eval(x);
        if (std::abs(den) < 1e-14) throw singular_eval_error("division by a value below 1e-14 in magnitude");
        return lhs->eval(x) / den;
      }
      case Kind::Sin: return std::sin(lhs->eval(x));
      case Kind::Cos: return std::cos(lhs->eval(x));
      case Kind::Exp: return std::exp(lhs->eval(x));
      case Kind::Comp: {
        // raw linear image, no reduction: keeps the function continuous on R^2
        double fa = static_cast<double>(map.F.a), fb = static_cast<double>(map.F.b);
        double fc = static_cast<double>(map.F.c), fd = static_cast<double>(map.F.d);
        return lhs->eval({fa * x.x + fb * x.y, fc * x.x + fd * x.y});
      }
      case Kind::Bump: {
        double s = 0.0;
        for (const auto& c : centers) {
          double d = torus_dist(x, c, bq1, bq2);
          if (d < width) {
            double u = std::cos(M_PI * d / (2.0 * width));
            s += u * u;
          }
        }
        return s;
      }
    }
    throw std::logic_error("ScalarExpr::eval: bad node");
  }
};

namespace sx {

inline ScalarPtr constant(double v) {
  auto e = std::make_shared<ScalarExpr>(ScalarExpr::Kind::Const);
  e->value = v;
  return e;
}
inline ScalarPtr coord(int axis) {
  auto e = std::make_shared<ScalarExpr>(ScalarExpr::Kind::Coord);
  e->axis = axis;
  return e;
}
inline ScalarPtr binary(ScalarExpr::Kind k, ScalarPtr a, ScalarPtr b) {
  auto e = std::make_shared<ScalarExpr>(k);
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}
inline ScalarPtr unary(ScalarExpr::Kind k, ScalarPtr a) {
  auto e = std::make_shared<ScalarExpr>(k);
  e->lhs = std::move(a);
  return e;
}
inline ScalarPtr add(ScalarPtr a, ScalarPtr b) { return binary(ScalarExpr::Kind::Add, std::move(a), std::move(b)); }
inline ScalarPtr sub(ScalarPtr a, ScalarPtr b) { return binary(ScalarExpr::Kind::Sub, std::move(a), std::move(b)); }
inline ScalarPtr mul(ScalarPtr a, ScalarPtr b) { return binary(ScalarExpr::Kind::Mul, std::move(a), std::move(b)); }
inline ScalarPtr div(ScalarPtr a, ScalarPtr b) { return binary(ScalarExpr::Kind::Div, std::move(a), std::move(b)); }
inline ScalarPtr sin(ScalarPtr a) { return unary(ScalarExpr::Kind::Sin, std::move(a)); }
inline ScalarPtr cos(ScalarPtr a) { return unary(ScalarExpr::Kind::Cos, std::move(a)); }
inline ScalarPtr exp(ScalarPtr a) { return unary(ScalarExpr::Kind::Exp, std::move(a)); }

inline ScalarPtr compose(ScalarPtr a, const LatticeAutomorphism& f) {
  auto e = std::make_shared<ScalarExpr>(ScalarExpr::Kind::Comp);
  e->lhs = std::move(a);
  e->map = f;
  return e;
}

// Sum of cos^2 caps of the given half-width around each center; supported
// in the union of the width-balls, C^1, values in [0, 1] per center.
inline ScalarPtr bump(std::vector<Vec2> centers, double width, int q1 = 1, int q2 = 1) {
  auto e = std::make_shared<ScalarExpr>(ScalarExpr::Kind::Bump);
  e->centers = std::move(centers);
  e->width = width;
  e->bq1 = q1;
  e->bq2 = q2;
  return e;
}

inline ScalarPtr with_sigma(ScalarPtr a, double sigma) {
  auto e = std::make_shared<ScalarExpr>(*a);
  e->holder_sigma = sigma;
  return e;
}

}  // namespace sx

class MatrixExpr;
using MatrixPtr = std::shared_ptr<const MatrixExpr>;

class MatrixExpr {
 public:
  enum class Kind { Entries, Rotation, Reflection, Diagonal, Scalar, Product, Conjugate };

  Kind kind;
  ScalarPtr e11, e12, e21, e22;  // Entries
  ScalarPtr s1, s2;              // Rotation/Reflection/Scalar: s1; Diagonal: s1, s2
  MatrixPtr m1, m2;              // Product: m1*m2; Conjugate: m1 = C, m2 = B
  LatticeAutomorphism map;       // Conjugate

  explicit MatrixExpr(Kind k) : kind(k) {}

  Mat2 eval(const Vec2& x) const {
    switch (kind) {
      case Kind::Entries:
        return {e11->eval(x), e12->eval(x), e21->eval(x), e22->eval(x)};
      case Kind::Rotation: return Mat2::rotation(s1->eval(x));
      case Kind::Reflection: return Mat2::reflection(s1->eval(x));
      case Kind::Diagonal: return Mat2::diagonal(s1->eval(x), s2->eval(x));
      case Kind::Scalar: {
        double k = s1->eval(x);
        return {k, 0, 0, k};
      }
      case Kind::Product: return m1->eval(x) * m2->eval(x);
      case Kind::Conjugate: {
        double fa = static_cast<double>(map.F.a), fb = static_cast<double>(map.F.b);
        double fc = static_cast<double>(map.F.c), fd = static_cast<double>(map.F.d);
        Vec2 fx{fa * x.x + fb * x.y, fc * x.x + fd * x.y};
        Mat2 c = m1->eval(x);
        if (std::abs(c.det()) < 1e-14) throw singular_eval_error("conjugating matrix is singular at a sample point");
        return m1->eval(fx) * m2->eval(x) * c.inverse();
      }
    }
    throw std::logic_error("MatrixExpr::eval: bad node");
  }
};

namespace mx {

inline MatrixPtr entries(ScalarPtr a, ScalarPtr b, ScalarPtr c, ScalarPtr d) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Entries);
  e->e11 = std::move(a);
  e->e12 = std::move(b);
  e->e21 = std::move(c);
  e->e22 = std::move(d);
  return e;
}
inline MatrixPtr constant(const Mat2& m) {
  return entries(sx::constant(m.a), sx::constant(m.b), sx::constant(m.c), sx::constant(m.d));
}
inline MatrixPtr rotation(ScalarPtr theta) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Rotation);
  e->s1 = std::move(theta);
  return e;
}
inline MatrixPtr reflection(ScalarPtr theta) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Reflection);
  e->s1 = std::move(theta);
  return e;
}
inline MatrixPtr diagonal(ScalarPtr a, ScalarPtr b) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Diagonal);
  e->s1 = std::move(a);
  e->s2 = std::move(b);
  return e;
}
inline MatrixPtr scalar(ScalarPtr k) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Scalar);
  e->s1 = std::move(k);
  return e;
}
inline MatrixPtr product(MatrixPtr a, MatrixPtr b) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Product);
  e->m1 = std::move(a);
  e->m2 = std::move(b);
  return e;
}
// C(fx) B(x) C(x)^-1 with the raw linear action of f.
inline MatrixPtr conjugate(MatrixPtr c, MatrixPtr b, const LatticeAutomorphism& f) {
  auto e = std::make_shared<MatrixExpr>(MatrixExpr::Kind::Conjugate);
  e->m1 = std::move(c);
  e->m2 = std::move(b);
  e->map = f;
  return e;
}

}  // namespace mx

namespace detail {

template <typename Eval>
inline void check_periodic_impl(Eval&& ev, int q1, int q2, int grid, double tol) {
  // offset grid avoids sampling only symmetry points
  const double ox = 0.013, oy = 0.007;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      Vec2 x{q1 * (i + ox) / grid, q2 * (j + oy) / grid};
      double base = ev(x);
      double d1 = std::abs(ev(Vec2{x.x + q1, x.y}) - base);
      double d2 = std::abs(ev(Vec2{x.x, x.y + q2}) - base);
      if (d1 > tol)
        throw periodicity_error("field is not periodic along the x1 generator loop of the (" + std::to_string(q1) +
                                "," + std::to_string(q2) + ") cover");
      if (d2 > tol)
        throw periodicity_error("field is not periodic along the x2 generator loop of the (" + std::to_string(q1) +
                                "," + std::to_string(q2) + ") cover");
    }
  }
}

}  // namespace detail

inline void check_periodic(const ScalarPtr& e, int q1, int q2, int grid = 64, double tol = 1e-9) {
  detail::check_periodic_impl([&](const Vec2& x) { return e->eval(x); }, q1, q2, grid, tol);
}

inline void check_periodic(const MatrixPtr& e, int q1, int q2, int grid = 64, double tol = 1e-9) {
  detail::check_periodic_impl(
      [&](const Vec2& x) {
        Mat2 m = e->eval(x);
        return m.a + 0.7312 * m.b + 0.5189 * m.c + 0.3171 * m.d;  // injective-enough probe of the entries
      },
      q1, q2, grid, tol);
  // probe collisions are possible in principle; spot-check entries on a coarse grid
  detail::check_periodic_impl([&](const Vec2& x) { return e->eval(x).b; }, q1, q2, std::min(grid, 16), tol);
  detail::check_periodic_impl([&](const Vec2& x) { return e->eval(x).c; }, q1, q2, std::min(grid, 16), tol);
}

// ---- exact conversion to TrigPoly -------------------------------------

namespace detail {

struct LinForm {
  double c0 = 0, c1 = 0, c2 = 0;  // c0 + c1 x1 + c2 x2
  bool constant() const { return c1 == 0.0 && c2 == 0.0; }
};
using FieldRep = std::variant<LinForm, TrigPoly>;

inline TrigPoly lin_to_poly(const LinForm& l, int q1, int q2) {
  if (!l.constant()) throw not_representable_error("a bare linear coordinate term is not a trigonometric polynomial");
  return TrigPoly::constant(l.c0, q1, q2);
}

// Frequency of the linear form c1 x1 + c2 x2 in cover units; must land on
// an integer pair to 1e-9.
inline Freq lin_freq(const LinForm& l, int q1, int q2) {
  double f1 = l.c1 * q1 / (2.0 * M_PI), f2 = l.c2 * q2 / (2.0 * M_PI);
  double r1 = std::round(f1), r2 = std::round(f2);
  if (std::abs(f1 - r1) > 1e-9 || std::abs(f2 - r2) > 1e-9)
    throw not_representable_error("trig argument has non-integer frequency on this cover");
  return {static_cast<i64>(r1), static_cast<i64>(r2)};
}

inline FieldRep to_rep(const ScalarExpr& e, int q1, int q2) {
  using K = ScalarExpr::Kind;
  switch (e.kind) {
    case K::Const: return LinForm{e.value, 0, 0};
    case K::Coord: return e.axis == 0 ? LinForm{0, 1, 0} : LinForm{0, 0, 1};
    case K::Add:
    case K::Sub: {
      FieldRep a = to_rep(*e.lhs, q1, q2), b = to_rep(*e.rhs, q1, q2);
      double s = e.kind == K::Add ? 1.0 : -1.0;
      if (std::holds_alternative<LinForm>(a) && std::holds_alternative<LinForm>(b)) {
        auto& la = std::get<LinForm>(a);
        auto& lb = std::get<LinForm>(b);
        return LinForm{la.c0 + s * lb.c0, la.c1 + s * lb.c1, la.c2 + s * lb.c2};
      }
      auto as_poly = [&](FieldRep& r) {
        return std::holds_alternative<TrigPoly>(r) ? std::get<TrigPoly>(r) : lin_to_poly(std::get<LinForm>(r), q1, q2);
      };
      return as_poly(a) + as_poly(b) * s;
    }
    case K::Mul: {
      FieldRep a = to_rep(*e.lhs, q1, q2), b = to_rep(*e.rhs, q1, q2);
      if (std::holds_alternative<LinForm>(a) && std::holds_alternative<LinForm>(b)) {
        auto& la = std::get<LinForm>(a);
        auto& lb = std::get<LinForm>(b);
        if (la.constant()) return LinForm{la.c0 * lb.c0, la.c0 * lb.c1, la.c0 * lb.c2};
        if (lb.constant()) return LinForm{lb.c0 * la.c0, lb.c0 * la.c1, lb.c0 * la.c2};
        throw not_representable_error("product of two coordinate terms is not a trigonometric polynomial");
      }
      if (std::holds_alternative<LinForm>(a) || std::holds_alternative<LinForm>(b)) {
        const LinForm& l = std::holds_alternative<LinForm>(a) ? std::get<LinForm>(a) : std::get<LinForm>(b);
        const TrigPoly& p = std::holds_alternative<TrigPoly>(a) ? std::get<TrigPoly>(a) : std::get<TrigPoly>(b);
        if (!l.constant()) throw not_representable_error("coordinate times a trig sum is not a trigonometric polynomial");
        return p * l.c0;
      }
      return std::get<TrigPoly>(a) * std::get<TrigPoly>(b);
    }
    case K::Div: {
      FieldRep b = to_rep(*e.rhs, q1, q2);
      if (!std::holds_alternative<LinForm>(b) || !std::get<LinForm>(b).constant())
        throw not_representable_error("division node cannot be converted to a trigonometric polynomial");
      double den = std::get<LinForm>(b).c0;
      if (std::abs(den) < 1e-14) throw singular_eval_error("constant divisor below 1e-14 in magnitude");
      FieldRep a = to_rep(*e.lhs, q1, q2);
      if (std::holds_alternative<LinForm>(a)) {
        auto& la = std::get<LinForm>(a);
        return LinForm{la.c0 / den, la.c1 / den, la.c2 / den};
      }
      return std::get<TrigPoly>(a) * (1.0 / den);
    }
    case K::Sin:
    case K::Cos: {
      FieldRep a = to_rep(*e.lhs, q1, q2);
      if (!std::holds_alternative<LinForm>(a))
        throw not_representable_error("trig function of a non-linear argument is not a trigonometric polynomial");
      auto& l = std::get<LinForm>(a);
      Freq m = lin_freq(l, q1, q2);
      double phase = e.kind == K::Cos ? l.c0 : l.c0 - M_PI / 2.0;
      return TrigPoly::cosine(m, 1.0, phase, q1, q2);
    }
    case K::Exp: {
      FieldRep a = to_rep(*e.lhs, q1, q2);
      if (std::holds_alternative<LinForm>(a) && std::get<LinForm>(a).constant())
        return LinForm{std::exp(std::get<LinForm>(a).c0), 0, 0};
      throw not_representable_error("exp of a non-constant is not a trigonometric polynomial");
    }
    case K::Comp: {
      if (e.map.q1 != q1 || e.map.q2 != q2)
        throw cover_error("precomposition automorphism lives on a different cover");
      FieldRep a = to_rep(*e.lhs, q1, q2);
      if (std::holds_alternative<LinForm>(a)) {
        auto& l = std::get<LinForm>(a);
        double fa = static_cast<double>(e.map.F.a), fb = static_cast<double>(e.map.F.b);
        double fc = static_cast<double>(e.map.F.c), fd = static_cast<double>(e.map.F.d);
        return LinForm{l.c0, l.c1 * fa + l.c2 * fc, l.c1 * fb + l.c2 * fd};
      }
      return std::get<TrigPoly>(a).compose(e.map);
    }
    case K::Bump:
      throw not_representable_error("bump field is not a trigonometric polynomial");
  }
  throw std::logic_error("to_rep: bad node");
}

}  // namespace detail

inline TrigPoly to_trigpoly(const ScalarPtr& e, int q1 = 1, int q2 = 1) {
  detail::FieldRep r = detail::to_rep(*e, q1, q2);
  if (std::holds_alternative<detail::LinForm>(r)) return detail::lin_to_poly(std::get<detail::LinForm>(r), q1, q2);
  return std::get<TrigPoly>(r);
}

}  // namespace cocyclelab
