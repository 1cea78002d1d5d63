// 2x2 real matrix/vector arithmetic used throughout the library.
//
// Everything here is closed-form: eigenvalues via the quadratic formula,
// inverses via the adjugate. No external linear algebra dependency is
// needed at fiber dimension 2.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cocyclelab {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
  // Rotate by +90 degrees.
  Vec2 perp() const { return {-y, x}; }
};

struct Mat2 {
  // Row-major: [[a, b], [c, d]].
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  Mat2() = default;
  Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 zero() { return {0, 0, 0, 0}; }
  static Mat2 rotation(double theta) {
    double co = std::cos(theta), si = std::sin(theta);
    return {co, -si, si, co};
  }
  // Reflection across the line at angle theta/2: Q(theta) as in the
  // conformal-model certificates. det Q = -1.
  static Mat2 reflection(double theta) {
    double co = std::cos(theta), si = std::sin(theta);
    return {co, si, si, -co};
  }
  static Mat2 diagonal(double p, double q) { return {p, 0, 0, q}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  }

  Mat2 transpose() const { return {a, c, b, d}; }

  Mat2 inverse() const {
    double dt = det();
    if (std::abs(dt) < 1e-300) throw std::domain_error("Mat2::inverse: singular matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  Mat2 operator/(double s) const { return {a / s, b / s, c / s, d / s}; }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 operator-() const { return {-a, -b, -c, -d}; }

  std::array<std::complex<double>, 2> eigenvalues() const {
    double t = trace(), dt = det();
    std::complex<double> disc(t * t - 4.0 * dt, 0.0);
    auto s = std::sqrt(disc);
    return {(t + s) / 2.0, (t - s) / 2.0};
  }

  // Operator 2-norm condition number, via singular values.
  double cond() const {
    double g = a * a + b * b + c * c + d * d;
    double dd = std::abs(det());
    double h = std::sqrt(std::max(0.0, g * g / 4.0 - dd * dd));
    double smax2 = g / 2.0 + h, smin2 = g / 2.0 - h;
    if (smin2 <= 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(smax2 / smin2);
  }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }
inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double frobenius_dist(const Mat2& p, const Mat2& q) { return (p - q).frobenius(); }

// Integer power of a matrix (n >= 0).
inline Mat2 mat_pow(Mat2 m, int n) {
  Mat2 r = Mat2::identity();
  while (n > 0) {
    if (n & 1) r = r * m;
    m = m * m;
    n >>= 1;
  }
  return r;
}

// Direction of a nonzero vector as an angle in R/(pi Z), in [0, pi).
inline double line_angle(const Vec2& v) {
  double t = std::atan2(v.y, v.x);
  if (t < 0) t += M_PI * (t < -M_PI ? 2.0 : 1.0);
  while (t >= M_PI) t -= M_PI;
  while (t < 0) t += M_PI;
  return t;
}

// Distance between two lines-through-origin given by angles mod pi.
inline double line_angle_dist(double t1, double t2) {
  double d = std::fmod(std::abs(t1 - t2), M_PI);
  return std::min(d, M_PI - d);
}

inline Vec2 line_vector(double theta) { return {std::cos(theta), std::sin(theta)}; }

}  // namespace cocyclelab
