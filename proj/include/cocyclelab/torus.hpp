// Exact arithmetic for hyperbolic automorphisms of the 2-torus and its
// rectangular finite covers: iteration, complete periodic-point
// enumeration via Smith normal form, and cover lifting.
//
// All coordinates of periodic points are rationals; nothing in the core
// path here touches floating point except the distance helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cocyclelab/mat2.hpp"

namespace cocyclelab {

using i64 = std::int64_t;
using i128 = __int128;

struct overflow_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct not_unimodular_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct cover_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline i128 checked_mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("128-bit integer overflow in torus arithmetic");
  return r;
}
inline i128 checked_add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw overflow_error("128-bit integer overflow in torus arithmetic");
  return r;
}
inline i128 imod(i128 a, i128 m) {
  i128 r = a % m;
  return r < 0 ? r + m : r;
}
inline i64 to_i64(i128 v, const char* what) {
  if (v > INT64_MAX || v < INT64_MIN) throw overflow_error(std::string("value out of 64-bit range: ") + what);
  return static_cast<i64>(v);
}
}  // namespace detail

// 2x2 integer matrix with checked 128-bit arithmetic.
struct IMat2 {
  i128 a = 0, b = 0, c = 0, d = 0;

  IMat2() = default;
  IMat2(i128 a_, i128 b_, i128 c_, i128 d_) : a(a_), b(b_), c(c_), d(d_) {}
  static IMat2 identity() { return {1, 0, 0, 1}; }

  i128 det() const {
    using namespace detail;
    return checked_add(checked_mul(a, d), -checked_mul(b, c));
  }
  i128 trace() const { return detail::checked_add(a, d); }

  IMat2 operator*(const IMat2& o) const {
    using namespace detail;
    return {checked_add(checked_mul(a, o.a), checked_mul(b, o.c)),
            checked_add(checked_mul(a, o.b), checked_mul(b, o.d)),
            checked_add(checked_mul(c, o.a), checked_mul(d, o.c)),
            checked_add(checked_mul(c, o.b), checked_mul(d, o.d))};
  }
  IMat2 operator-(const IMat2& o) const {
    using namespace detail;
    return {checked_add(a, -o.a), checked_add(b, -o.b), checked_add(c, -o.c), checked_add(d, -o.d)};
  }

  IMat2 pow(int n) const {
    IMat2 r = identity(), m = *this;
    for (; n > 0; n >>= 1) {
      if (n & 1) r = r * m;
      if (n > 1) m = m * m;
    }
    return r;
  }

  Mat2 to_mat2() const {
    return {static_cast<double>(a), static_cast<double>(b), static_cast<double>(c), static_cast<double>(d)};
  }
};

// True iff F is in GL(2,Z) with |det| = 1 and has no eigenvalue of
// modulus 1. Throws not_unimodular_error when |det| != 1 (such a matrix
// is not a torus automorphism at all).
inline bool check_hyperbolic(const IMat2& F) {
  i128 dt = F.det();
  if (dt != 1 && dt != -1) throw not_unimodular_error("matrix is not unimodular: not a torus automorphism");
  i128 tr = F.trace();
  if (dt == 1) return tr > 2 || tr < -2;
  return tr != 0;  // det = -1: eigenvalues t/2 +- sqrt(t^2/4 + 1), modulus 1 iff t = 0
}

// Hyperbolic automorphism of the torus R^2 / (q1 Z x q2 Z). The standard
// torus is cover (1, 1).
struct LatticeAutomorphism {
  IMat2 F;
  int q1 = 1, q2 = 1;

  LatticeAutomorphism() : F(IMat2::identity()) {}
  LatticeAutomorphism(const IMat2& F_, int q1_ = 1, int q2_ = 1) : F(F_), q1(q1_), q2(q2_) {
    if (q1 < 1 || q2 < 1) throw cover_error("cover multiplicities must be positive");
    if (!check_hyperbolic(F)) throw std::invalid_argument("automorphism is not hyperbolic");
    // F must map the lattice q1 Z x q2 Z into itself. For cover (2,1)
    // this is the parity condition: F12 even (and hence F11 odd).
    if ((F.c * q1) % q2 != 0 || (F.b * q2) % q1 != 0)
      throw cover_error("matrix does not preserve the cover lattice (e.g. cover (2,1) needs F11 odd and F12 even)");
  }

  // Conjugated matrix Q^-1 F Q acting on the standard torus, Q = diag(q1,q2).
  IMat2 std_matrix() const { return {F.a, F.b * q2 / q1, F.c * q1 / q2, F.d}; }

  i128 det() const { return F.det(); }
  i128 trace() const { return F.trace(); }

  bool same_cover(const LatticeAutomorphism& o) const {
    return q1 == o.q1 && q2 == o.q2 && F.a == o.F.a && F.b == o.F.b && F.c == o.F.c && F.d == o.F.d;
  }

  // Float action, coordinates reduced to [0,q1) x [0,q2).
  Vec2 apply_float(const Vec2& x) const {
    double y1 = static_cast<double>(F.a) * x.x + static_cast<double>(F.b) * x.y;
    double y2 = static_cast<double>(F.c) * x.x + static_cast<double>(F.d) * x.y;
    y1 = y1 - q1 * std::floor(y1 / q1);
    y2 = y2 - q2 * std::floor(y2 / q2);
    return {y1, y2};
  }
  Vec2 apply_float_inverse(const Vec2& x) const {
    double dt = static_cast<double>(F.det());  // +-1
    double y1 = (static_cast<double>(F.d) * x.x - static_cast<double>(F.b) * x.y) / dt;
    double y2 = (-static_cast<double>(F.c) * x.x + static_cast<double>(F.a) * x.y) / dt;
    y1 = y1 - q1 * std::floor(y1 / q1);
    y2 = y2 - q2 * std::floor(y2 / q2);
    return {y1, y2};
  }
};

// Rational point (a/d, b/d) on the cover torus, canonically reduced:
// 0 <= a < d*q1, 0 <= b < d*q2, gcd(a, b, d) = 1.
struct RationalPoint {
  i64 a = 0, b = 0, d = 1;
  int q1 = 1, q2 = 1;

  RationalPoint() = default;
  RationalPoint(i128 a_, i128 b_, i128 d_, int q1_, int q2_) : q1(q1_), q2(q2_) {
    if (d_ <= 0) throw std::invalid_argument("RationalPoint: denominator must be positive");
    a_ = detail::imod(a_, d_ * q1);
    b_ = detail::imod(b_, d_ * q2);
    i128 g = std::gcd(std::gcd((i128)a_, (i128)b_), d_);
    a = detail::to_i64(a_ / g, "point numerator");
    b = detail::to_i64(b_ / g, "point numerator");
    d = detail::to_i64(d_ / g, "point denominator");
  }

  double x1() const { return static_cast<double>(a) / d; }
  double x2() const { return static_cast<double>(b) / d; }
  Vec2 to_vec2() const { return {x1(), x2()}; }

  bool operator==(const RationalPoint& o) const {
    return a == o.a && b == o.b && d == o.d && q1 == o.q1 && q2 == o.q2;
  }
  bool operator<(const RationalPoint& o) const {
    // lexicographic by exact value of (x1, x2)
    i128 lhs = (i128)a * o.d, rhs = (i128)o.a * d;
    if (lhs != rhs) return lhs < rhs;
    return (i128)b * o.d < (i128)o.b * d;
  }
};

inline double circle_dist(double x, double y, double period) {
  double d = std::abs(x - y);
  d = d - period * std::floor(d / period);
  return std::min(d, period - d);
}

// Max-metric torus distance on the cover rectangle.
inline double torus_dist(const Vec2& x, const Vec2& y, int q1 = 1, int q2 = 1) {
  return std::max(circle_dist(x.x, y.x, q1), circle_dist(x.y, y.y, q2));
}

// Exact image F*x reduced mod the cover lattice; denominator unchanged.
inline RationalPoint apply(const LatticeAutomorphism& f, const RationalPoint& x) {
  if (x.q1 != f.q1 || x.q2 != f.q2) throw cover_error("point does not live on the automorphism's cover");
  using namespace detail;
  i128 na = checked_add(checked_mul(f.F.a, x.a), checked_mul(f.F.b, x.b));
  i128 nb = checked_add(checked_mul(f.F.c, x.a), checked_mul(f.F.d, x.b));
  return RationalPoint(na, nb, x.d, f.q1, f.q2);
}

struct PeriodicOrbit {
  RationalPoint base;            // lexicographically smallest point of the orbit
  int period = 1;                // least period
  std::vector<RationalPoint> points;
};

namespace detail {

// Smith-style diagonalization: returns diag entries (d1, d2), both > 0,
// and the unimodular V with U M V diagonal, so that solutions of
// M x in Z^2 are x = V (i/d1, j/d2).
struct Diag2 {
  i128 d1, d2;
  IMat2 V;
};

inline Diag2 smith_diagonalize(IMat2 M) {
  IMat2 V = IMat2::identity();
  auto swap_rows = [&]() { std::swap(M.a, M.c); std::swap(M.b, M.d); };
  auto swap_cols = [&]() {
    std::swap(M.a, M.b); std::swap(M.c, M.d);
    std::swap(V.a, V.b); std::swap(V.c, V.d);
  };
  // Alternate row/column euclidean reduction until off-diagonal is clear.
  for (int guard = 0; guard < 512; ++guard) {
    if (M.a == 0) {
      if (M.c != 0) swap_rows();
      else if (M.b != 0) swap_cols();
    }
    if (M.c != 0) {
      if (M.a == 0) { swap_rows(); continue; }
      i128 q = M.c / M.a;
      M.c = checked_add(M.c, -checked_mul(q, M.a));
      M.d = checked_add(M.d, -checked_mul(q, M.b));
      if (M.c != 0) { swap_rows(); continue; }
    }
    if (M.b != 0) {
      if (M.a == 0) { swap_cols(); continue; }
      i128 q = M.b / M.a;
      M.b = checked_add(M.b, -checked_mul(q, M.a));
      M.d = checked_add(M.d, -checked_mul(q, M.c));
      V.b = checked_add(V.b, -checked_mul(q, V.a));
      V.d = checked_add(V.d, -checked_mul(q, V.c));
      if (M.b != 0) { swap_cols(); continue; }
    }
    if (M.b == 0 && M.c == 0) break;
  }
  if (M.b != 0 || M.c != 0) throw std::logic_error("smith_diagonalize failed to terminate");
  i128 d1 = M.a < 0 ? -M.a : M.a;
  i128 d2 = M.d < 0 ? -M.d : M.d;
  if (d1 == 0 || d2 == 0) throw std::logic_error("smith_diagonalize: singular matrix");
  return {d1, d2, V};
}

}  // namespace detail

// Number of fixed points of f^n, |det(F^n - I)| (count on the cover).
inline i128 fixed_point_count(const LatticeAutomorphism& f, int n) {
  IMat2 M = f.std_matrix().pow(n) - IMat2::identity();
  i128 dt = M.det();
  return dt < 0 ? -dt : dt;
}

// Streams every fixed point of f^n, in enumeration order.
inline void for_each_fixed_point(const LatticeAutomorphism& f, int n,
                                 const std::function<void(const RationalPoint&)>& fn) {
  using namespace detail;
  IMat2 M = f.std_matrix().pow(n) - IMat2::identity();
  Diag2 sd = smith_diagonalize(M);
  i128 D = checked_mul(sd.d1, sd.d2);
  for (i128 i = 0; i < sd.d1; ++i) {
    for (i128 j = 0; j < sd.d2; ++j) {
      // standard-torus point y = V (i/d1, j/d2), common denominator D
      i128 n1 = checked_add(checked_mul(checked_mul(sd.V.a, i), sd.d2), checked_mul(checked_mul(sd.V.b, j), sd.d1));
      i128 n2 = checked_add(checked_mul(checked_mul(sd.V.c, i), sd.d2), checked_mul(checked_mul(sd.V.d, j), sd.d1));
      n1 = imod(n1, D);
      n2 = imod(n2, D);
      // back to cover coordinates x = (q1 y1, q2 y2)
      fn(RationalPoint(checked_mul((i128)f.q1, n1), checked_mul((i128)f.q2, n2), D, f.q1, f.q2));
    }
  }
}

// Complete sorted list of fixed points of f^n.
inline std::vector<RationalPoint> periodic_points(const LatticeAutomorphism& f, int n,
                                                  std::size_t max_points = 50'000'000) {
  i128 count = fixed_point_count(f, n);
  if (count > (i128)max_points)
    throw overflow_error("periodic point count exceeds the enumeration cap at period " + std::to_string(n));
  std::vector<RationalPoint> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for_each_fixed_point(f, n, [&](const RationalPoint& p) { pts.push_back(p); });
  std::sort(pts.begin(), pts.end());
  return pts;
}

inline bool is_fixed_by(const LatticeAutomorphism& f, const RationalPoint& p, int n) {
  RationalPoint q = p;
  for (int i = 0; i < n; ++i) q = apply(f, q);
  return q == p;
}

// Least period of a point known to be fixed by f^n: smallest divisor m of
// n with f^m p = p.
inline int least_period(const LatticeAutomorphism& f, const RationalPoint& p, int n) {
  for (int m = 1; m <= n; ++m)
    if (n % m == 0 && is_fixed_by(f, p, m)) return m;
  throw std::logic_error("least_period: point is not fixed by f^n");
}

// Orbit through p (least period must be the orbit length); base is the
// lexicographic minimum so orbits have one canonical representation.
inline PeriodicOrbit orbit_of(const LatticeAutomorphism& f, const RationalPoint& p) {
  PeriodicOrbit o;
  o.points.push_back(p);
  RationalPoint q = apply(f, p);
  while (!(q == p)) {
    o.points.push_back(q);
    q = apply(f, q);
  }
  o.period = static_cast<int>(o.points.size());
  auto it = std::min_element(o.points.begin(), o.points.end());
  std::rotate(o.points.begin(), it, o.points.end());
  o.base = o.points.front();
  return o;
}

// All orbits of least period <= n_max, canonically ordered by
// (period, base point).
inline std::vector<PeriodicOrbit> enumerate_orbits(const LatticeAutomorphism& f, int n_max) {
  std::vector<PeriodicOrbit> orbits;
  for (int n = 1; n <= n_max; ++n) {
    for_each_fixed_point(f, n, [&](const RationalPoint& p) {
      if (least_period(f, p, n) != n) return;
      // keep one representative per orbit: its lexicographic minimum
      RationalPoint q = apply(f, p);
      while (!(q == p)) {
        if (q < p) return;
        q = apply(f, q);
      }
      orbits.push_back(orbit_of(f, p));
    });
  }
  std::stable_sort(orbits.begin(), orbits.end(), [](const PeriodicOrbit& x, const PeriodicOrbit& y) {
    if (x.period != y.period) return x.period < y.period;
    return x.base < y.base;
  });
  return orbits;
}

// All periodic points of least period <= n_max within torus distance
// radius of center, sorted by (period, distance).
inline std::vector<std::pair<PeriodicOrbit, double>> ball_periodic_search(const LatticeAutomorphism& f,
                                                                          const Vec2& center, double radius,
                                                                          int n_max) {
  if (radius <= 0) throw std::invalid_argument("ball_periodic_search: radius must be positive");
  std::vector<std::pair<PeriodicOrbit, double>> out;
  for (int n = 1; n <= n_max; ++n) {
    for_each_fixed_point(f, n, [&](const RationalPoint& p) {
      double dist = torus_dist(p.to_vec2(), center, f.q1, f.q2);
      if (dist > radius) return;
      if (least_period(f, p, n) != n) return;
      PeriodicOrbit o = orbit_of(f, p);
      o.points.clear();
      o.points.push_back(p);  // report the in-ball point itself
      o.base = p;
      out.emplace_back(std::move(o), dist);
    });
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.first.period != y.first.period) return x.first.period < y.first.period;
    if (x.second != y.second) return x.second < y.second;
    return x.first.base < y.first.base;
  });
  return out;
}

// Same automorphism matrix acting on the cover R^2/(q1 Z x q2 Z);
// legality of the lattice is checked by the constructor.
inline LatticeAutomorphism lift_to_cover(const LatticeAutomorphism& f, int q1, int q2) {
  return LatticeAutomorphism(f.F, q1, q2);
}

inline Vec2 project_point(const Vec2& x) {
  return {x.x - std::floor(x.x), x.y - std::floor(x.y)};
}

inline RationalPoint project_point(const RationalPoint& x) {
  return RationalPoint(detail::imod(x.a, x.d), detail::imod(x.b, x.d), x.d, 1, 1);
}

// The q1*q2 preimages of a standard-torus point on the cover.
inline std::vector<RationalPoint> lift_point(const RationalPoint& x, int q1, int q2) {
  if (x.q1 != 1 || x.q2 != 1) throw cover_error("lift_point expects a standard-torus point");
  std::vector<RationalPoint> out;
  for (int k = 0; k < q1; ++k)
    for (int l = 0; l < q2; ++l)
      out.push_back(RationalPoint((i128)x.a + (i128)k * x.d, (i128)x.b + (i128)l * x.d, x.d, q1, q2));
  return out;
}

}  // namespace cocyclelab
