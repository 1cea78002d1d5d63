// Exact finite Fourier sums on the torus and its rectangular covers.
//
// A TrigPoly stores complex coefficients c_m at integer frequency pairs
// m = (m1, m2), representing sum_m c_m e^{2 pi i (m1 x1/q1 + m2 x2/q2)}.
// Real-valuedness is the Hermitian symmetry c_{-m} = conj(c_m), which all
// constructors and operations preserve. Half-integer frequencies on
// double covers (e.g. cos(pi x1) on cover (2,1)) are exact by the q
// scaling.
#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "cocyclelab/torus.hpp"

namespace cocyclelab {

struct Freq {
  i64 m1 = 0, m2 = 0;
  bool operator<(const Freq& o) const { return m1 != o.m1 ? m1 < o.m1 : m2 < o.m2; }
  bool operator==(const Freq& o) const { return m1 == o.m1 && m2 == o.m2; }
  Freq operator-() const { return {-m1, -m2}; }
  i64 max_abs() const { return std::max(m1 < 0 ? -m1 : m1, m2 < 0 ? -m2 : m2); }
};

class TrigPoly {
 public:
  using Coeffs = std::map<Freq, std::complex<double>>;

  TrigPoly() = default;
  explicit TrigPoly(int q1, int q2) : q1_(q1), q2_(q2) {}

  static TrigPoly constant(double v, int q1 = 1, int q2 = 1) {
    TrigPoly p(q1, q2);
    if (v != 0.0) p.c_[{0, 0}] = v;
    return p;
  }
  // a*cos(2 pi <m,x> + phase) with <m,x> = m1 x1/q1 + m2 x2/q2.
  static TrigPoly cosine(Freq m, double a = 1.0, double phase = 0.0, int q1 = 1, int q2 = 1) {
    TrigPoly p(q1, q2);
    std::complex<double> half = 0.5 * a * std::polar(1.0, phase);
    p.c_[m] += half;
    p.c_[-m] += std::conj(half);
    p.prune();
    return p;
  }
  static TrigPoly sine(Freq m, double a = 1.0, int q1 = 1, int q2 = 1) {
    return cosine(m, a, -M_PI / 2.0, q1, q2);
  }

  int q1() const { return q1_; }
  int q2() const { return q2_; }
  const Coeffs& coeffs() const { return c_; }
  bool empty() const { return c_.empty(); }

  std::complex<double> coeff(Freq m) const {
    auto it = c_.find(m);
    return it == c_.end() ? std::complex<double>(0, 0) : it->second;
  }
  void set_coeff(Freq m, std::complex<double> v) {
    if (std::abs(v) == 0.0) c_.erase(m);
    else c_[m] = v;
  }

  double mean() const { return coeff({0, 0}).real(); }

  double eval(const Vec2& x) const {
    double s = 0.0;
    for (const auto& [m, cm] : c_) {
      double phase = 2.0 * M_PI * (static_cast<double>(m.m1) * x.x / q1_ + static_cast<double>(m.m2) * x.y / q2_);
      s += cm.real() * std::cos(phase) - cm.imag() * std::sin(phase);
    }
    return s;
  }

  TrigPoly operator+(const TrigPoly& o) const {
    check_cover(o);
    TrigPoly r = *this;
    for (const auto& [m, cm] : o.c_) r.c_[m] += cm;
    r.prune();
    return r;
  }
  TrigPoly operator-(const TrigPoly& o) const { return *this + (o * -1.0); }
  TrigPoly operator*(double s) const {
    TrigPoly r = *this;
    for (auto& [m, cm] : r.c_) cm *= s;
    r.prune();
    return r;
  }
  TrigPoly operator*(const TrigPoly& o) const {
    check_cover(o);
    TrigPoly r(q1_, q2_);
    for (const auto& [m, cm] : c_)
      for (const auto& [n, cn] : o.c_) r.c_[{m.m1 + n.m1, m.m2 + n.m2}] += cm * cn;
    r.prune();
    return r;
  }

  // Precomposition with the automorphism: frequency m maps to G^T m where
  // G is the standard-torus matrix of f. Exact in frequency space.
  TrigPoly compose(const LatticeAutomorphism& f) const {
    if (f.q1 != q1_ || f.q2 != q2_) throw cover_error("TrigPoly::compose: cover mismatch");
    IMat2 G = f.std_matrix();
    TrigPoly r(q1_, q2_);
    for (const auto& [m, cm] : c_) {
      Freq n{detail::to_i64(G.a * m.m1 + G.c * m.m2, "frequency"),
             detail::to_i64(G.b * m.m1 + G.d * m.m2, "frequency")};
      r.c_[n] += cm;
    }
    r.prune();
    return r;
  }

  std::vector<Freq> support() const {
    std::vector<Freq> s;
    s.reserve(c_.size());
    for (const auto& [m, cm] : c_) s.push_back(m);
    return s;
  }

  i64 support_radius() const {
    i64 r = 0;
    for (const auto& [m, cm] : c_) r = std::max(r, m.max_abs());
    return r;
  }

  double max_coeff() const {
    double r = 0;
    for (const auto& [m, cm] : c_) r = std::max(r, std::abs(cm));
    return r;
  }

  void prune(double tol = 1e-15) {
    for (auto it = c_.begin(); it != c_.end();) {
      if (std::abs(it->second) <= tol) it = c_.erase(it);
      else ++it;
    }
  }

 private:
  void check_cover(const TrigPoly& o) const {
    if (o.q1_ != q1_ || o.q2_ != q2_) throw cover_error("TrigPoly: cover mismatch");
  }

  int q1_ = 1, q2_ = 1;
  Coeffs c_;
};

inline TrigPoly operator*(double s, const TrigPoly& p) { return p * s; }

}  // namespace cocyclelab
