// Cocycle products over a hyperbolic torus automorphism, periodic data
// (eigenvalues, Jordan type, Lyapunov exponents at periodic orbits), the
// equal-modulus and conjugate-periodic-data conditions, and canonical
// 2x2 conjugators.
#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "cocyclelab/expr.hpp"

namespace cocyclelab {

struct orientation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cocycle {
  LatticeAutomorphism base;
  MatrixPtr generator;

  Cocycle() = default;
  Cocycle(const LatticeAutomorphism& f, MatrixPtr gen, bool validate = true) : base(f), generator(std::move(gen)) {
    if (validate) {
      check_periodic(generator, base.q1, base.q2);
      const int grid = 32;
      for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
          Vec2 x{base.q1 * (i + 0.013) / grid, base.q2 * (j + 0.007) / grid};
          if (generator->eval(x).det() <= 0)
            throw orientation_error("generator must have positive determinant (orientation-preserving)");
        }
    }
  }

  Mat2 eval(const Vec2& x) const { return generator->eval(x); }
};

// A(x, n) = A(f^{n-1}x) ... A(x); A(x, -n) = A(f^{-n}x, n)^{-1}.
inline Mat2 product(const Cocycle& A, Vec2 x, int n, int cap = 60) {
  if (std::abs(n) > cap) throw std::invalid_argument("cocycle product length exceeds the cap");
  if (n < 0) {
    Vec2 y = x;
    for (int i = 0; i < -n; ++i) y = A.base.apply_float_inverse(y);
    return product(A, y, -n, cap).inverse();
  }
  Mat2 P = Mat2::identity();
  for (int i = 0; i < n; ++i) {
    P = A.eval(x) * P;
    x = A.base.apply_float(x);
  }
  return P;
}

enum class JordanType { Scalar, Parabolic, RealSplit, Elliptic };

inline const char* to_string(JordanType t) {
  switch (t) {
    case JordanType::Scalar: return "scalar";
    case JordanType::Parabolic: return "parabolic";
    case JordanType::RealSplit: return "real-split";
    case JordanType::Elliptic: return "elliptic";
  }
  return "?";
}

struct JordanTols {
  double disc_rel = 1e-9;  // discriminant threshold relative to max(tr^2, 4|det|)
  double nil = 1e-6;       // ||P/s - Id|| threshold separating scalar from parabolic
};

struct PeriodicDatum {
  PeriodicOrbit orbit;
  Mat2 P;
  double tr = 0, det = 0;
  std::array<std::complex<double>, 2> eigenvalues{};
  JordanType jordan_type = JordanType::Scalar;
  double lyap_top = 0, lyap_bot = 0;
  double disc = 0, nil_norm = 0;
};

inline JordanType jordan_classify(const Mat2& P, const JordanTols& tols, double* disc_out = nullptr,
                                  double* nil_out = nullptr) {
  double tr = P.trace(), dt = P.det();
  double disc = tr * tr - 4.0 * dt;
  double tol_disc = tols.disc_rel * std::max(tr * tr, 4.0 * std::abs(dt));
  if (disc_out) *disc_out = disc;
  if (disc < -tol_disc) {
    if (nil_out) *nil_out = 0;
    return JordanType::Elliptic;
  }
  if (disc > tol_disc) {
    if (nil_out) *nil_out = 0;
    return JordanType::RealSplit;
  }
  double s = tr / 2.0;
  double nil = (P / s - Mat2::identity()).frobenius();
  if (nil_out) *nil_out = nil;
  return nil <= tols.nil ? JordanType::Scalar : JordanType::Parabolic;
}

// Product around the orbit, evaluated at the exact rational points.
inline PeriodicDatum periodic_datum(const Cocycle& A, const PeriodicOrbit& orbit, const JordanTols& tols = {}) {
  PeriodicDatum d;
  d.orbit = orbit;
  Mat2 P = Mat2::identity();
  for (const auto& p : orbit.points) P = A.eval(p.to_vec2()) * P;
  d.P = P;
  d.tr = P.trace();
  d.det = P.det();
  d.eigenvalues = P.eigenvalues();
  if (std::abs(d.eigenvalues[0]) < std::abs(d.eigenvalues[1])) std::swap(d.eigenvalues[0], d.eigenvalues[1]);
  d.jordan_type = jordan_classify(P, tols, &d.disc, &d.nil_norm);
  double n = orbit.period;
  d.lyap_top = std::log(std::abs(d.eigenvalues[0])) / n;
  d.lyap_bot = std::log(std::abs(d.eigenvalues[1])) / n;
  return d;
}

struct ConditionReport {
  int n_max = 0;
  double worst = 0.0;                 // worst violation measure found
  std::optional<PeriodicOrbit> witness;
  bool verdict = false;
  std::vector<std::string> failures;  // human-readable per-orbit failures
};

inline std::string orbit_label(const PeriodicOrbit& o) {
  return "period " + std::to_string(o.period) + " orbit at (" + std::to_string(o.base.a) + "/" +
         std::to_string(o.base.d) + ", " + std::to_string(o.base.b) + "/" + std::to_string(o.base.d) + ")";
}

// Worst relative gap between eigenvalue moduli over all orbits of period
// <= n_max. Zero gap at every periodic orbit is the one-exponent condition.
inline ConditionReport check_one_exponent(const Cocycle& A, int n_max, double tol = 1e-8,
                                          const JordanTols& tols = {}) {
  ConditionReport r;
  r.n_max = n_max;
  for (const auto& o : enumerate_orbits(A.base, n_max)) {
    PeriodicDatum d = periodic_datum(A, o, tols);
    // moduli are exactly equal except in the real-split case; raw
    // eigenvalue splitting of a near-parabolic product is O(sqrt(eps))
    // noise and must not count as a violation
    double gap = 0.0;
    if (d.jordan_type == JordanType::RealSplit) {
      double m1 = std::abs(d.eigenvalues[0]), m2 = std::abs(d.eigenvalues[1]);
      gap = std::abs(m1 - m2) / std::max(m1, m2);
    }
    if (gap > r.worst) {
      r.worst = gap;
      r.witness = o;
    }
    if (gap > tol) r.failures.push_back(orbit_label(o) + ": modulus gap " + std::to_string(gap));
  }
  r.verdict = r.worst <= tol;
  return r;
}

// Periodic products at the same orbit are conjugate iff they share
// (tr, det) within tolerance and have the same Jordan type.
inline bool products_conjugate(const PeriodicDatum& a, const PeriodicDatum& b, double tol) {
  double scale_tr = std::max({1.0, std::abs(a.tr), std::abs(b.tr)});
  double scale_det = std::max({1.0, std::abs(a.det), std::abs(b.det)});
  return std::abs(a.tr - b.tr) <= tol * scale_tr && std::abs(a.det - b.det) <= tol * scale_det &&
         a.jordan_type == b.jordan_type;
}

inline ConditionReport check_conjugate_periodic_data(const Cocycle& A, const Cocycle& B, int n_max,
                                                     double tol = 1e-8, const JordanTols& tols = {}) {
  if (!A.base.same_cover(B.base)) throw cover_error("cocycles live over different automorphisms");
  ConditionReport r;
  r.n_max = n_max;
  for (const auto& o : enumerate_orbits(A.base, n_max)) {
    PeriodicDatum da = periodic_datum(A, o, tols), db = periodic_datum(B, o, tols);
    double mismatch = std::abs(da.tr - db.tr) / std::max({1.0, std::abs(da.tr), std::abs(db.tr)}) +
                      std::abs(da.det - db.det) / std::max({1.0, std::abs(da.det), std::abs(db.det)});
    if (da.jordan_type != db.jordan_type) mismatch = std::max(mismatch, 1.0);
    if (mismatch > r.worst) {
      r.worst = mismatch;
      r.witness = o;
    }
    if (!products_conjugate(da, db, tol))
      r.failures.push_back(orbit_label(o) + ": " + std::string(to_string(da.jordan_type)) + " tr " +
                           std::to_string(da.tr) + " det " + std::to_string(da.det) + " vs " +
                           std::string(to_string(db.jordan_type)) + " tr " + std::to_string(db.tr) + " det " +
                           std::to_string(db.det));
  }
  r.verdict = r.failures.empty();
  return r;
}

// ---- canonical conjugator ----------------------------------------------

struct CanonicalForm {
  JordanType type;
  Mat2 T;      // P = T * canon * T^{-1}, |det T| = 1
  Mat2 canon;  // scalar sI; parabolic [[s,s],[0,s]]; split diag(l,m), l >= m; elliptic r R(w), w in (0,pi)
};

namespace detail {

inline Mat2 normalize_det(const Mat2& T) {
  double s = std::sqrt(std::abs(T.det()));
  if (s < 1e-150) throw std::domain_error("degenerate basis in canonical reduction");
  return T / s;
}

}  // namespace detail

inline CanonicalForm canonical_form(const Mat2& P, const JordanTols& tols = {}) {
  CanonicalForm cf;
  cf.type = jordan_classify(P, tols);
  double tr = P.trace(), dt = P.det();
  switch (cf.type) {
    case JordanType::Scalar: {
      cf.T = Mat2::identity();
      cf.canon = Mat2::identity() * (tr / 2.0);
      return cf;
    }
    case JordanType::Parabolic: {
      double s = tr / 2.0;
      Mat2 N = P - Mat2::identity() * s;
      // pick the basis vector with the larger image under N
      Vec2 t2 = std::hypot(N.a, N.c) >= std::hypot(N.b, N.d) ? Vec2{1, 0} : Vec2{0, 1};
      Vec2 t1 = (N * t2) * (1.0 / s);
      cf.T = detail::normalize_det(Mat2{t1.x, t2.x, t1.y, t2.y});
      cf.canon = Mat2{s, s, 0, s};
      return cf;
    }
    case JordanType::RealSplit: {
      double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * dt));
      double l = (tr + disc) / 2.0, m = (tr - disc) / 2.0;
      auto eigvec = [&](double lam) {
        // row with the larger residual gives the better-conditioned kernel vector
        Vec2 v1{P.b, lam - P.a}, v2{lam - P.d, P.c};
        return (v1.norm() >= v2.norm() ? v1 : v2).normalized();
      };
      Vec2 u = eigvec(l), v = eigvec(m);
      cf.T = detail::normalize_det(Mat2{u.x, v.x, u.y, v.y});
      cf.canon = Mat2::diagonal(l, m);
      return cf;
    }
    case JordanType::Elliptic: {
      double b_im = std::sqrt(std::max(0.0, 4.0 * dt - tr * tr)) / 2.0;
      double a_re = tr / 2.0;
      // complex eigenvector w = u + iv for eigenvalue a + ib
      Vec2 u, v;
      if (std::abs(P.b) >= std::abs(P.c)) {
        // w = (P12, lambda - P11)
        u = {P.b, a_re - P.a};
        v = {0.0, b_im};
      } else {
        u = {a_re - P.d, P.c};
        v = {b_im, 0.0};
      }
      // in basis [u, -v] the matrix is r R(w) with w = atan2(b, a) in (0, pi)
      cf.T = detail::normalize_det(Mat2{u.x, -v.x, u.y, -v.y});
      double r = std::sqrt(dt);
      cf.canon = Mat2::rotation(std::atan2(b_im, a_re)) * r;
      return cf;
    }
  }
  throw std::logic_error("canonical_form: bad type");
}

struct Conjugator {
  Mat2 C;       // P = C Q C^{-1}, |det C| = 1
  double cond;  // ||C|| * ||C^{-1}||
};

// Canonical conjugator between 2x2 matrices, or nullopt when they are not
// conjugate (at tolerance tol on the canonical parameters).
inline std::optional<Conjugator> conjugator(const Mat2& P, const Mat2& Q, double tol = 1e-9,
                                            const JordanTols& tols = {}) {
  CanonicalForm cp = canonical_form(P, tols), cq = canonical_form(Q, tols);
  if (cp.type != cq.type) return std::nullopt;
  double scale = std::max({1.0, cp.canon.max_abs(), cq.canon.max_abs()});
  if ((cp.canon - cq.canon).max_abs() > tol * scale) return std::nullopt;
  Mat2 C = cp.T * cq.T.inverse();
  double s = std::sqrt(std::abs(C.det()));
  C = C / s;
  return Conjugator{C, C.cond()};
}

// ---- coarse classification by periodic product type ---------------------

enum class PeriodicClass { ScalarLike, Parabolic, Elliptic, Violation };

inline const char* to_string(PeriodicClass c) {
  switch (c) {
    case PeriodicClass::ScalarLike: return "scalar-like";
    case PeriodicClass::Parabolic: return "parabolic";
    case PeriodicClass::Elliptic: return "elliptic";
    case PeriodicClass::Violation: return "violation";
  }
  return "?";
}

struct ClassifyReport {
  PeriodicClass cls = PeriodicClass::ScalarLike;
  std::optional<PeriodicOrbit> elliptic_witness;
  std::optional<PeriodicOrbit> parabolic_witness;
  std::optional<PeriodicOrbit> split_witness;  // real-split contradicts the one-exponent precondition
  int n_max = 0;
};

inline ClassifyReport classify_periodic(const Cocycle& A, int n_max, const JordanTols& tols = {}) {
  ClassifyReport r;
  r.n_max = n_max;
  for (const auto& o : enumerate_orbits(A.base, n_max)) {
    PeriodicDatum d = periodic_datum(A, o, tols);
    switch (d.jordan_type) {
      case JordanType::Elliptic:
        if (!r.elliptic_witness) r.elliptic_witness = o;
        break;
      case JordanType::Parabolic:
        if (!r.parabolic_witness) r.parabolic_witness = o;
        break;
      case JordanType::RealSplit:
        if (!r.split_witness) r.split_witness = o;
        break;
      case JordanType::Scalar: break;
    }
  }
  bool ell = r.elliptic_witness.has_value(), par = r.parabolic_witness.has_value();
  if (r.split_witness || (ell && par)) r.cls = PeriodicClass::Violation;
  else if (ell) r.cls = PeriodicClass::Elliptic;
  else if (par) r.cls = PeriodicClass::Parabolic;
  else r.cls = PeriodicClass::ScalarLike;
  return r;
}

}  // namespace cocyclelab
