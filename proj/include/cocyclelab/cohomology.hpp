// Reductions of one-exponent cocycles to their model forms (triangular,
// scalar, conformal, diagonal), testers deciding whether two models are
// cohomologous, centralizer descriptions, and the continuity analysis of
// canonical conjugators over periodic points.
//
// Verdicts are three-valued. "not-cohomologous" is only issued with a
// periodic-orbit witness whose obstruction clears a 10x margin over the
// tolerance; "cohomologous" is only issued with a certificate that
// validates on a fresh grid. Everything in between is undetermined.
#pragma once

#include <functional>
#include <optional>
#include <random>
#include <variant>

#include "cocyclelab/livsic.hpp"
#include "cocyclelab/structures.hpp"

namespace cocyclelab {

struct reduction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct transversality_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- model forms -----------------------------------------------------------

enum class ModelKind { Triangular, Scalar, Conformal, Diagonal };

// A scalar field entering a model: always evaluable pointwise, with an
// exact trigonometric representation attached when one is known. For
// conformal angle fields the poly holds only the periodic remainder; the
// winding (linear) part lives in the ModelForm.
struct ModelField {
  std::function<double(const Vec2&)> fn;
  std::optional<TrigPoly> poly;
  double operator()(const Vec2& x) const { return fn(x); }
};

inline ModelField make_field(const TrigPoly& p) {
  return {[p](const Vec2& x) { return p.eval(x); }, p};
}
inline ModelField make_field(double v) { return make_field(TrigPoly::constant(v, 1, 1)); }
inline ModelField make_field(std::function<double(const Vec2&)> fn) { return {std::move(fn), std::nullopt}; }
inline ModelField make_field(const ScalarPtr& e, int q1, int q2) {
  ModelField out{[e](const Vec2& x) { return e->eval(x); }, std::nullopt};
  try {
    out.poly = to_trigpoly(e, q1, q2);
  } catch (const not_representable_error&) {
  }
  return out;
}

struct ModelForm {
  ModelKind kind = ModelKind::Scalar;
  LatticeAutomorphism f;
  bool on_cover = false;
  ModelField k;                        // Triangular / Scalar / Conformal factor
  ModelField alpha;                    // Triangular shear, Conformal angle, Diagonal first entry
  ModelField alpha2;                   // Diagonal second entry
  std::array<int, 2> alpha_winding{0, 0};  // Conformal: alpha has linear part 2 pi (w1 x1/q1 + w2 x2/q2)
};

inline ModelForm triangular_model(const LatticeAutomorphism& f, ModelField k, ModelField alpha) {
  ModelForm m;
  m.kind = ModelKind::Triangular;
  m.f = f;
  m.k = std::move(k);
  m.alpha = std::move(alpha);
  return m;
}
inline ModelForm scalar_model(const LatticeAutomorphism& f, ModelField k) {
  ModelForm m;
  m.kind = ModelKind::Scalar;
  m.f = f;
  m.k = std::move(k);
  return m;
}
inline ModelForm conformal_model(const LatticeAutomorphism& f, ModelField k, ModelField alpha,
                                 std::array<int, 2> winding = {0, 0}) {
  ModelForm m;
  m.kind = ModelKind::Conformal;
  m.f = f;
  m.k = std::move(k);
  m.alpha = std::move(alpha);
  m.alpha_winding = winding;
  return m;
}
inline ModelForm diagonal_model(const LatticeAutomorphism& f, ModelField a1, ModelField a2) {
  ModelForm m;
  m.kind = ModelKind::Diagonal;
  m.f = f;
  m.alpha = std::move(a1);
  m.alpha2 = std::move(a2);
  return m;
}

inline Mat2 model_eval(const ModelForm& m, const Vec2& x) {
  switch (m.kind) {
    case ModelKind::Triangular: {
      double k = m.k(x);
      return Mat2{k, k * m.alpha(x), 0, k};
    }
    case ModelKind::Scalar: return Mat2::identity() * m.k(x);
    case ModelKind::Conformal: return Mat2::rotation(m.alpha(x)) * m.k(x);
    case ModelKind::Diagonal: return Mat2::diagonal(m.alpha(x), m.alpha2(x));
  }
  return Mat2::identity();
}

namespace detail {

inline double reduce_mod(double v, double modulus) {
  double r = std::remainder(v, modulus);
  return r;
}

// Fit a smooth function to a trig poly on a uniform grid, cross-validated
// at off-grid points; nullopt when the field is not band-limited enough.
inline std::optional<TrigPoly> fit_function(const std::function<double(const Vec2&)>& fn,
                                            const LatticeAutomorphism& f, int N = 128, int m_max = 48,
                                            double tol = 1e-8) {
  auto g = GridField<double>::sample(N, f.q1, f.q2, fn);
  TrigPoly p = fit_trigpoly(g, std::min(m_max, N / 2 - 1), 1e-13);
  std::mt19937 rng(911);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double scale = 1.0;
  for (const auto& v : g.v) scale = std::max(scale, std::abs(v));
  for (int t = 0; t < 60; ++t) {
    Vec2 x{f.q1 * uni(rng), f.q2 * uni(rng)};
    if (std::abs(p.eval(x) - fn(x)) > tol * scale) return std::nullopt;
  }
  return p;
}

// Additive periodic scan with values reduced into (-m/2, m/2].
inline ObstructionReport scan_mod(const std::function<double(const Vec2&)>& fn, const LatticeAutomorphism& f,
                                  int n_max, double modulus) {
  auto rep = scan_additive(fn, f, n_max);
  rep.max_abs = 0.0;
  for (auto& e : rep.entries) {
    e.value = reduce_mod(e.value, modulus);
    rep.max_abs = std::max(rep.max_abs, std::abs(e.value));
  }
  return rep;
}

inline std::vector<int> node_permutation(const LatticeAutomorphism& f, int N) {
  std::vector<int> img(std::size_t(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      auto [ii, jj] = node_image(f, N, i, j);
      img[std::size_t(i) * N + j] = ii * N + jj;
    }
  return img;
}

}  // namespace detail

// ---- model validity --------------------------------------------------------

struct ModelValidity {
  bool ok = true;
  std::optional<ObstructionEntry> witness;  // the obstruction that makes the model non-degenerate
  std::string note;
};

// Checks the non-degeneracy invariants: a Triangular alpha (or Conformal
// alpha mod pi, or Diagonal log-ratio) must NOT be a coboundary, otherwise
// the model degenerates into a simpler type.
inline ModelValidity model_validity(const ModelForm& m, int n_max = 3, double tol = 1e-8) {
  ModelValidity out;
  auto biggest = [](const ObstructionReport& r) -> std::optional<ObstructionEntry> {
    const ObstructionEntry* best = nullptr;
    for (const auto& e : r.entries)
      if (!best || std::abs(e.value) > std::abs(best->value)) best = &e;
    return best ? std::optional<ObstructionEntry>(*best) : std::nullopt;
  };
  switch (m.kind) {
    case ModelKind::Scalar: out.note = "scalar models carry no extra invariant"; break;
    case ModelKind::Triangular: {
      auto rep = scan_additive(m.alpha.fn, m.f, n_max);
      out.witness = biggest(rep);
      out.ok = rep.max_abs > tol;
      if (!out.ok) out.note = "alpha is a coboundary on scanned orbits; model degenerates to scalar";
      break;
    }
    case ModelKind::Conformal: {
      auto rep = detail::scan_mod(m.alpha.fn, m.f, n_max, M_PI);
      out.witness = biggest(rep);
      out.ok = rep.max_abs > tol;
      if (!out.ok) out.note = "alpha is a coboundary mod pi; model degenerates to scalar";
      break;
    }
    case ModelKind::Diagonal: {
      auto rep = scan_multiplicative([&](const Vec2& x) { return m.alpha(x) / m.alpha2(x); }, m.f, n_max);
      out.witness = biggest(rep);
      out.ok = rep.max_abs > tol;
      if (!out.ok) out.note = "diagonal ratio trivializes on scanned orbits";
      break;
    }
  }
  return out;
}

// ---- verdicts ----------------------------------------------------------------

struct CohomologyVerdict {
  enum class Status { Cohomologous, NotCohomologous, Undetermined };
  Status status = Status::Undetermined;
  std::optional<double> c;          // triangular constant; conformal +-1
  int branch = 0;                   // conformal: +1 rotation / -1 reflection; diagonal: 0 straight / 1 swapped
  std::optional<TrigPoly> s;        // shear / angle transfer function (periodic part)
  std::array<int, 2> s_winding{0, 0};
  std::optional<TrigPoly> log_phi;  // scalar-factor transfer, as a log
  std::function<Mat2(const Vec2&)> certificate;  // set when cohomologous
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<ObstructionEntry> witnesses;
  std::string detail;
};

// sup-norm conjugacy defect of C on an off-node validation grid
inline double conjugacy_residual(const std::function<Mat2(const Vec2&)>& Agen,
                                 const std::function<Mat2(const Vec2&)>& Bgen, const LatticeAutomorphism& f,
                                 const std::function<Mat2(const Vec2&)>& C, int grid = 40) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      Vec2 x{f.q1 * (i + 0.0137) / grid, f.q2 * (j + 0.0071) / grid};
      Mat2 lhs = Agen(x);
      Mat2 rhs = C(f.apply_float(x)) * Bgen(x) * C(x).inverse();
      worst = std::max(worst, frobenius_dist(lhs, rhs) / std::max(1.0, lhs.frobenius()));
    }
  return worst;
}

namespace detail {

struct MultSolve {
  enum class St { Solved, VerdictOnly, Obstructed, SignMismatch, Undetermined } st = St::Undetermined;
  ObstructionReport rep;
  std::optional<TrigPoly> log_phi;
  std::optional<ObstructionEntry> witness;
  std::string note;
};

// Solve num(x) = (phi(fx)/phi(x)) den(x) for continuous nonvanishing phi.
inline MultSolve solve_mult_ratio(const std::function<double(const Vec2&)>& num,
                                  const std::function<double(const Vec2&)>& den, const LatticeAutomorphism& f,
                                  int n_max, double tol, double margin = 10.0) {
  MultSolve out;
  auto ratio = [&](const Vec2& x) { return num(x) / den(x); };
  try {
    out.rep = scan_multiplicative(ratio, f, n_max);
  } catch (const obstruction_error& e) {
    out.st = MultSolve::St::SignMismatch;
    out.note = e.what();
    return out;
  } catch (const singular_eval_error& e) {
    out.st = MultSolve::St::Undetermined;
    out.note = e.what();
    return out;
  }
  if (out.rep.negative_sign) {
    // phi o f / phi is positive for any continuous nonvanishing phi
    out.st = MultSolve::St::SignMismatch;
    out.note = "scalar ratio is negative; no continuous transfer";
    return out;
  }
  for (const auto& e : out.rep.entries)
    if (!out.witness || std::abs(e.value) > std::abs(out.witness->value)) out.witness = e;
  if (out.rep.max_abs > margin * tol) {
    out.st = MultSolve::St::Obstructed;
    return out;
  }
  if (out.rep.max_abs > tol) {
    out.st = MultSolve::St::Undetermined;
    out.note = "obstructions inside the margin band";
    return out;
  }
  auto fitted = fit_function([&](const Vec2& x) { return std::log(std::abs(ratio(x))); }, f);
  if (!fitted) {
    out.st = MultSolve::St::VerdictOnly;
    out.note = "log-ratio not band-limited; verdict stands on periodic data only";
    return out;
  }
  if (std::abs(fitted->mean()) < 1e-7) fitted->set_coeff({0, 0}, 0.0);
  auto res = solve_fourier(*fitted, f, 1e-7);
  if (!fourier_solved(res)) {
    out.st = MultSolve::St::VerdictOnly;
    out.note = "fitted log-ratio not frequency-solvable";
    return out;
  }
  out.log_phi = std::get<TrigPoly>(res);
  out.st = MultSolve::St::Solved;
  return out;
}

inline std::function<double(const Vec2&)> exp_of(const TrigPoly& p) {
  return [p](const Vec2& x) { return std::exp(p.eval(x)); };
}

}  // namespace detail

// ---- testers -----------------------------------------------------------------

inline CohomologyVerdict test_scalar(const ModelForm& A, const ModelForm& B, int n_max = 6, double tol = 1e-8) {
  if (A.kind != ModelKind::Scalar || B.kind != ModelKind::Scalar)
    throw std::invalid_argument("test_scalar: both models must be Scalar");
  CohomologyVerdict v;
  auto ms = detail::solve_mult_ratio(A.k.fn, B.k.fn, A.f, n_max, tol);
  v.detail = ms.note;
  switch (ms.st) {
    case detail::MultSolve::St::Obstructed:
    case detail::MultSolve::St::SignMismatch:
      v.status = CohomologyVerdict::Status::NotCohomologous;
      if (ms.witness) v.witnesses.push_back(*ms.witness);
      return v;
    case detail::MultSolve::St::Undetermined:
    case detail::MultSolve::St::VerdictOnly: return v;
    case detail::MultSolve::St::Solved: break;
  }
  v.log_phi = ms.log_phi;
  TrigPoly lp = *ms.log_phi;
  v.certificate = [lp](const Vec2& x) { return Mat2::identity() * std::exp(lp.eval(x)); };
  auto f = A.f;
  v.residual = conjugacy_residual([&](const Vec2& x) { return model_eval(A, x); },
                                  [&](const Vec2& x) { return model_eval(B, x); }, f, v.certificate);
  v.status = v.residual <= 1e-6 ? CohomologyVerdict::Status::Cohomologous : CohomologyVerdict::Status::Undetermined;
  if (v.status != CohomologyVerdict::Status::Cohomologous) v.detail = "certificate failed validation";
  return v;
}

inline CohomologyVerdict test_triangular(const ModelForm& A, const ModelForm& B, int n_max = 6,
                                         double tol = 1e-8) {
  if (A.kind != ModelKind::Triangular || B.kind != ModelKind::Triangular)
    throw std::invalid_argument("test_triangular: both models must be Triangular");
  CohomologyVerdict v;
  const auto& f = A.f;

  auto ms = detail::solve_mult_ratio(A.k.fn, B.k.fn, f, n_max, tol);
  if (ms.st == detail::MultSolve::St::Obstructed || ms.st == detail::MultSolve::St::SignMismatch) {
    v.status = CohomologyVerdict::Status::NotCohomologous;
    if (ms.witness) v.witnesses.push_back(*ms.witness);
    v.detail = "scalar factors have periodic obstructions: " + ms.note;
    return v;
  }

  // alpha(x) - c beta(x) must be a coboundary for a single constant c
  auto ra = scan_additive(A.alpha.fn, f, n_max);
  auto rb = scan_additive(B.alpha.fn, f, n_max);
  double sab = 0.0, sbb = 0.0, biggest_b = 0.0;
  for (std::size_t i = 0; i < ra.entries.size(); ++i) {
    sab += ra.entries[i].value * rb.entries[i].value;
    sbb += rb.entries[i].value * rb.entries[i].value;
    biggest_b = std::max(biggest_b, std::abs(rb.entries[i].value));
  }
  double c;
  if (biggest_b <= tol) {
    if (ra.max_abs > 10.0 * tol) {
      v.status = CohomologyVerdict::Status::NotCohomologous;
      for (const auto& e : ra.entries)
        if (std::abs(e.value) == ra.max_abs) {
          v.witnesses.push_back(e);
          break;
        }
      v.detail = "beta is a coboundary but alpha is not; no constant c exists";
      return v;
    }
    c = 1.0;  // both coboundaries: any c works
  } else {
    c = sab / sbb;
  }
  v.c = c;
  double worst = 0.0;
  std::size_t worst_i = 0;
  for (std::size_t i = 0; i < ra.entries.size(); ++i) {
    double r = std::abs(ra.entries[i].value - c * rb.entries[i].value);
    if (r > worst) {
      worst = r;
      worst_i = i;
    }
  }
  if (worst > 10.0 * tol) {
    v.status = CohomologyVerdict::Status::NotCohomologous;
    // two orbits whose alpha/beta ratios are incompatible
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t lo_i = worst_i, hi_i = worst_i;
    for (std::size_t i = 0; i < ra.entries.size(); ++i) {
      if (std::abs(rb.entries[i].value) <= tol) continue;
      double r = ra.entries[i].value / rb.entries[i].value;
      if (r < lo) {
        lo = r;
        lo_i = i;
      }
      if (r > hi) {
        hi = r;
        hi_i = i;
      }
    }
    v.witnesses.push_back({ra.entries[lo_i].orbit, lo});
    v.witnesses.push_back({ra.entries[hi_i].orbit, hi});
    v.detail = "periodic ratios alpha+/beta+ are not constant (witness values are the ratios)";
    return v;
  }
  if (worst > tol || ms.st == detail::MultSolve::St::Undetermined) {
    v.detail = "obstructions inside the margin band";
    return v;
  }

  // build the certificate phi(x) [[c, s(x)], [0, 1]]
  std::optional<TrigPoly> pa = A.alpha.poly, pb = B.alpha.poly;
  if (!pa) pa = detail::fit_function(A.alpha.fn, f);
  if (!pb) pb = detail::fit_function(B.alpha.fn, f);
  if (!pa || !pb || ms.st == detail::MultSolve::St::VerdictOnly) {
    v.detail = "verdict consistent on periodic data; transfer function not representable";
    return v;
  }
  TrigPoly diff = *pa - *pb * c;
  if (std::abs(diff.mean()) < 1e-7) diff.set_coeff({0, 0}, 0.0);
  auto sres = solve_fourier(diff, f, 1e-7);
  if (!fourier_solved(sres)) {
    v.detail = "alpha - c beta not frequency-solvable despite clean periodic data";
    return v;
  }
  v.s = std::get<TrigPoly>(sres);
  v.log_phi = ms.log_phi;
  TrigPoly sp = *v.s;
  TrigPoly lp = ms.log_phi ? *ms.log_phi : TrigPoly::constant(0.0, f.q1, f.q2);
  double cc = c;
  v.certificate = [sp, lp, cc](const Vec2& x) {
    double phi = std::exp(lp.eval(x));
    return Mat2{cc * phi, sp.eval(x) * phi, 0, phi};
  };
  v.residual = conjugacy_residual([&](const Vec2& x) { return model_eval(A, x); },
                                  [&](const Vec2& x) { return model_eval(B, x); }, f, v.certificate);
  v.status = v.residual <= 1e-6 ? CohomologyVerdict::Status::Cohomologous : CohomologyVerdict::Status::Undetermined;
  if (v.status != CohomologyVerdict::Status::Cohomologous) v.detail = "certificate failed validation";
  return v;
}

namespace detail {

// Integer solution of (G - I)^T sigma = w, if any.
inline std::optional<std::array<int, 2>> winding_transfer(const IMat2& G, std::array<int, 2> w) {
  double g11 = double(i64(G.a)) - 1, g12 = double(i64(G.b)), g21 = double(i64(G.c)), g22 = double(i64(G.d)) - 1;
  // transpose: rows (g11, g21), (g12, g22)
  double det = g11 * g22 - g21 * g12;
  if (std::abs(det) < 0.5) return std::nullopt;
  double s1 = (w[0] * g22 - w[1] * g21) / det;
  double s2 = (g11 * w[1] - g12 * w[0]) / det;
  double r1 = std::round(s1), r2 = std::round(s2);
  if (std::abs(s1 - r1) > 1e-9 || std::abs(s2 - r2) > 1e-9) return std::nullopt;
  return std::array<int, 2>{int(r1), int(r2)};
}

}  // namespace detail

inline CohomologyVerdict test_conformal(const ModelForm& A, const ModelForm& B, int n_max = 6, double tol = 1e-8) {
  if (A.kind != ModelKind::Conformal || B.kind != ModelKind::Conformal)
    throw std::invalid_argument("test_conformal: both models must be Conformal");
  CohomologyVerdict v;
  const auto& f = A.f;

  auto ms = detail::solve_mult_ratio(A.k.fn, B.k.fn, f, n_max, tol);
  if (ms.st == detail::MultSolve::St::Obstructed || ms.st == detail::MultSolve::St::SignMismatch) {
    v.status = CohomologyVerdict::Status::NotCohomologous;
    if (ms.witness) v.witnesses.push_back(*ms.witness);
    v.detail = "scalar factors have periodic obstructions: " + ms.note;
    return v;
  }

  IMat2 G = f.std_matrix();
  int decisive = 0;
  for (int sgn : {+1, -1}) {
    // sgn = +1: rotation branch, alpha - beta; sgn = -1: reflection branch, alpha + beta
    auto delta = [&, sgn](const Vec2& x) { return A.alpha(x) - sgn * B.alpha(x); };
    auto rep = detail::scan_mod(delta, f, n_max, 2 * M_PI);
    if (rep.max_abs > 10.0 * tol) {
      ++decisive;
      for (const auto& e : rep.entries)
        if (std::abs(e.value) == rep.max_abs) {
          v.witnesses.push_back(e);
          break;
        }
      continue;
    }
    if (rep.max_abs > tol) continue;  // gray zone; neither certificate nor witness
    std::array<int, 2> dw{A.alpha_winding[0] - sgn * B.alpha_winding[0],
                          A.alpha_winding[1] - sgn * B.alpha_winding[1]};
    std::optional<std::array<int, 2>> sw{{0, 0}};
    if (dw[0] != 0 || dw[1] != 0) sw = detail::winding_transfer(G, dw);
    if (!sw) continue;
    if (!A.alpha.poly || !B.alpha.poly || ms.st == detail::MultSolve::St::VerdictOnly ||
        ms.st == detail::MultSolve::St::Undetermined) {
      v.detail = "angles consistent on periodic data; transfer function not representable";
      continue;
    }
    TrigPoly rem = sgn > 0 ? *A.alpha.poly - *B.alpha.poly : *A.alpha.poly + *B.alpha.poly;
    auto cres = solve_circle(rem, f, 2 * M_PI, n_max, std::max(tol, 1e-8));
    if (!std::holds_alternative<CircleCertificate>(cres)) continue;
    auto cert = std::get<CircleCertificate>(cres);
    v.s = cert.s_lift;
    v.s_winding = *sw;
    v.c = double(sgn);
    v.branch = sgn;
    v.log_phi = ms.log_phi;
    TrigPoly sp = cert.s_lift;
    TrigPoly lp = ms.log_phi ? *ms.log_phi : TrigPoly::constant(0.0, f.q1, f.q2);
    std::array<int, 2> w = *sw;
    int q1 = f.q1, q2 = f.q2;
    v.certificate = [sp, lp, w, sgn, q1, q2](const Vec2& x) {
      double s = sp.eval(x) + 2 * M_PI * (double(w[0]) * x.x / q1 + double(w[1]) * x.y / q2);
      double phi = std::exp(lp.eval(x));
      return (sgn > 0 ? Mat2::rotation(s) : Mat2::reflection(s)) * phi;
    };
    v.residual = conjugacy_residual([&](const Vec2& x) { return model_eval(A, x); },
                                    [&](const Vec2& x) { return model_eval(B, x); }, f, v.certificate);
    if (v.residual <= 1e-6) {
      v.status = CohomologyVerdict::Status::Cohomologous;
      return v;
    }
    v.detail = "certificate failed validation";
  }
  if (decisive == 2) {
    v.status = CohomologyVerdict::Status::NotCohomologous;
    v.detail = "both orientation branches carry periodic obstructions";
  }
  return v;
}

inline CohomologyVerdict test_diagonal(const ModelForm& A, const ModelForm& B, int n_max = 6, double tol = 1e-8) {
  if (A.kind != ModelKind::Diagonal || B.kind != ModelKind::Diagonal)
    throw std::invalid_argument("test_diagonal: both models must be Diagonal");
  CohomologyVerdict v;
  const auto& f = A.f;
  int decisive = 0;
  for (int swapped : {0, 1}) {
    const auto& b1 = swapped ? B.alpha2 : B.alpha;
    const auto& b2 = swapped ? B.alpha : B.alpha2;
    auto m1 = detail::solve_mult_ratio(A.alpha.fn, b1.fn, f, n_max, tol);
    auto m2 = detail::solve_mult_ratio(A.alpha2.fn, b2.fn, f, n_max, tol);
    bool bad1 = m1.st == detail::MultSolve::St::Obstructed || m1.st == detail::MultSolve::St::SignMismatch;
    bool bad2 = m2.st == detail::MultSolve::St::Obstructed || m2.st == detail::MultSolve::St::SignMismatch;
    if (bad1 || bad2) {
      ++decisive;
      if (bad1 && m1.witness) v.witnesses.push_back(*m1.witness);
      if (bad2 && m2.witness) v.witnesses.push_back(*m2.witness);
      continue;
    }
    if (m1.st != detail::MultSolve::St::Solved || m2.st != detail::MultSolve::St::Solved) {
      v.detail = "pairing consistent on periodic data; transfer not representable";
      continue;
    }
    TrigPoly l1 = *m1.log_phi, l2 = *m2.log_phi;
    v.branch = swapped;
    v.log_phi = l1;
    v.certificate = swapped ? std::function<Mat2(const Vec2&)>([l1, l2](const Vec2& x) {
      return Mat2{0, std::exp(l1.eval(x)), std::exp(l2.eval(x)), 0};
    })
                            : std::function<Mat2(const Vec2&)>([l1, l2](const Vec2& x) {
                                return Mat2{std::exp(l1.eval(x)), 0, 0, std::exp(l2.eval(x))};
                              });
    v.residual = conjugacy_residual([&](const Vec2& x) { return model_eval(A, x); },
                                    [&](const Vec2& x) { return model_eval(B, x); }, f, v.certificate);
    if (v.residual <= 1e-6) {
      v.status = CohomologyVerdict::Status::Cohomologous;
      return v;
    }
    v.detail = "certificate failed validation";
  }
  if (decisive == 2) {
    v.status = CohomologyVerdict::Status::NotCohomologous;
    v.detail = "both pairings carry periodic obstructions";
  }
  return v;
}

// ---- centralizers ------------------------------------------------------------

struct CentralizerDesc {
  ModelKind kind;
  int parameters = 0;
  std::string description;
  std::function<Mat2(double, double)> element;  // sampled generators
};

inline CentralizerDesc centralizer(const ModelForm& m) {
  CentralizerDesc d;
  d.kind = m.kind;
  switch (m.kind) {
    case ModelKind::Triangular:
      d.parameters = 2;
      d.description = "constant d [[1, s], [0, 1]] (upper triangular, equal diagonal)";
      d.element = [](double a, double s) { return Mat2{a, a * s, 0, a}; };
      break;
    case ModelKind::Scalar:
      d.parameters = 4;
      d.description = "all constant invertible matrices";
      d.element = [](double a, double s) { return Mat2::rotation(s) * a + Mat2{0, a * 0.25, 0, 0}; };
      break;
    case ModelKind::Conformal:
      d.parameters = 2;
      d.description = "constant scalar multiples of rotations d R(s)";
      d.element = [](double a, double s) { return Mat2::rotation(s) * a; };
      break;
    case ModelKind::Diagonal:
      d.parameters = 2;
      d.description = "constant diagonal matrices diag(a, s)";
      d.element = [](double a, double s) { return Mat2::diagonal(a, s); };
      break;
  }
  return d;
}

// sup-norm self-conjugacy defect of a constant matrix against the model
inline double centralizer_defect(const ModelForm& m, const Mat2& D, int grid = 24) {
  Mat2 Di = D.inverse();
  double worst = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      Vec2 x{m.f.q1 * (i + 0.013) / grid, m.f.q2 * (j + 0.007) / grid};
      Mat2 a = model_eval(m, x);
      worst = std::max(worst, frobenius_dist(a, D * a * Di) / std::max(1.0, a.frobenius()));
    }
  return worst;
}

// ---- angle unwrapping (shared by the reductions) -------------------------------

namespace detail {

struct AngleGrid {
  GridField<double> theta;  // unwrapped real angles at nodes
  double jump1 = 0.0, jump2 = 0.0;  // additive increments per coordinate loop (multiples of the modulus)

  double corner(int ci, int cj) const {
    int N = theta.N;
    int wi = GridField<double>::wrap(ci, N), wj = GridField<double>::wrap(cj, N);
    int li = (ci - wi) / N, lj = (cj - wj) / N;
    return theta.v[std::size_t(wi) * N + wj] + li * jump1 + lj * jump2;
  }

  double eval(const Vec2& x) const {
    double u = x.x * theta.N / theta.q1, w = x.y * theta.N / theta.q2;
    double fi = std::floor(u), fj = std::floor(w);
    int i = int(fi), j = int(fj);
    double du = u - fi, dw = w - fj;
    return (1 - du) * (1 - dw) * corner(i, j) + du * (1 - dw) * corner(i + 1, j) +
           (1 - du) * dw * corner(i, j + 1) + du * dw * corner(i + 1, j + 1);
  }
};

inline AngleGrid unwrap_angles(const GridField<double>& g, double modulus, double max_jump) {
  int N = g.N;
  AngleGrid out;
  out.theta = g;
  auto align = [&](double v, double ref) {
    while (v - ref > modulus / 2) v -= modulus;
    while (v - ref < -modulus / 2) v += modulus;
    return v;
  };
  for (int i = 1; i < N; ++i) out.theta.at(i, 0) = align(g.at(i, 0), out.theta.at(i - 1, 0));
  for (int i = 0; i < N; ++i)
    for (int j = 1; j < N; ++j) out.theta.at(i, j) = align(g.at(i, j), out.theta.at(i, j - 1));
  for (int i = 1; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (std::abs(out.theta.at(i, j) - out.theta.at(i - 1, j)) > max_jump)
        throw field_too_rough_error("angle field too rough to unwrap consistently");
  out.jump1 = std::round((align(g.at(0, 0), out.theta.at(N - 1, 0)) - out.theta.at(0, 0)) / modulus) * modulus;
  out.jump2 = std::round((align(g.at(0, 0), out.theta.at(0, N - 1)) - out.theta.at(0, 0)) / modulus) * modulus;
  for (int j = 0; j < N; ++j)
    if (std::abs(out.theta.at(0, j) + out.jump1 - out.theta.at(N - 1, j)) > modulus / 2 + max_jump)
      throw field_too_rough_error("angle field loop jump inconsistent between rows");
  for (int i = 0; i < N; ++i)
    if (std::abs(out.theta.at(i, 0) + out.jump2 - out.theta.at(i, N - 1)) > modulus / 2 + max_jump)
      throw field_too_rough_error("angle field loop jump inconsistent between columns");
  return out;
}

}  // namespace detail

// ---- reductions ----------------------------------------------------------------

struct ReductionResult {
  ModelForm model;
  std::function<Mat2(const Vec2&)> C;
  GridField<Mat2> C_grid;
  double residual = 0.0;  // sup conjugacy defect over the node grid (exact node dynamics)
  bool on_cover = false;
  std::array<int, 2> frame_jumps{0, 0};  // frame winding per loop, in modulus units
};

// Change of basis to {line direction, its orthogonal}, then a multiplicative
// rescale that makes the lower-right entry match the upper-left one.
inline ReductionResult reduce_triangular(const Cocycle& A, const LineField& L, double tol = 1e-8) {
  const auto& f = A.base;
  int N = L.theta.N;
  auto ug = detail::unwrap_angles(L.theta, M_PI, M_PI / 4);
  int j1 = int(std::lround(ug.jump1 / M_PI)), j2 = int(std::lround(ug.jump2 / M_PI));
  if (j1 % 2 != 0 || j2 % 2 != 0)
    throw reduction_error("line field is non-orientable; lift to the double cover first");

  auto img = detail::node_permutation(f, N);
  std::size_t total = std::size_t(N) * N;
  GridField<double> kg(N, f.q1, f.q2), gg(N, f.q1, f.q2), loggg(N, f.q1, f.q2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      int t = img[std::size_t(i) * N + j];
      Mat2 B = Mat2::rotation(-ug.theta.v[std::size_t(t)]) * A.eval(kg.node(i, j)) *
               Mat2::rotation(ug.theta.at(i, j));
      if (B.d / B.a <= 0) throw reduction_error("frame produced a non-positive diagonal ratio");
      kg.at(i, j) = B.a;
      gg.at(i, j) = B.d / B.a;
      loggg.at(i, j) = std::log(B.d / B.a);
    }

  // the diagonal ratio g must have trivial products around every node cycle
  {
    std::vector<uint8_t> seen(total, 0);
    double worst = 0.0;
    for (std::size_t s = 0; s < total; ++s) {
      if (seen[s]) continue;
      double sum = 0.0;
      std::size_t k = s;
      do {
        seen[k] = 1;
        sum += loggg.v[k];
        k = std::size_t(img[k]);
      } while (k != s);
      worst = std::max(worst, std::abs(sum));
    }
    if (worst > 10.0 * std::max(tol, 1e-7))
      throw reduction_error("diagonal ratio has nontrivial periodic products (" + std::to_string(worst) +
                            "); reduction inconsistent");
  }

  // phi with phi o f / phi = g, preferring an exact frequency solve
  std::optional<TrigPoly> phi_log;
  {
    TrigPoly fitted = fit_trigpoly(loggg, std::min(48, N / 2 - 1), 1e-13);
    bool good = true;
    for (int i = 0; i < N && good; i += 7)
      for (int j = 0; j < N && good; j += 7)
        if (std::abs(fitted.eval(loggg.node(i, j)) - loggg.at(i, j)) > 1e-8) good = false;
    if (good) {
      if (std::abs(fitted.mean()) < 1e-7) fitted.set_coeff({0, 0}, 0.0);
      auto res = solve_fourier(fitted, f, 1e-7);
      if (fourier_solved(res)) phi_log = std::get<TrigPoly>(res);
    }
  }
  GridField<double> phi_grid(N, f.q1, f.q2, 1.0);
  if (!phi_log) {
    // telescope along node cycles; constants fixed per cycle by geometric mean
    std::vector<uint8_t> seen(total, 0);
    for (std::size_t s = 0; s < total; ++s) {
      if (seen[s]) continue;
      std::vector<std::size_t> cyc;
      double acc = 0.0, mean_acc = 0.0;
      std::size_t k = s;
      do {
        seen[k] = 1;
        cyc.push_back(k);
        phi_grid.v[k] = acc;
        acc += loggg.v[k];
        mean_acc += phi_grid.v[k];
        k = std::size_t(img[k]);
      } while (k != s);
      double shift = mean_acc / double(cyc.size());
      for (auto idx : cyc) phi_grid.v[idx] = std::exp(phi_grid.v[idx] - shift);
    }
  }
  auto ug_copy = ug;
  auto phi_fn = [phi_log, phi_grid](const Vec2& x) {
    return phi_log ? std::exp(phi_log->eval(x)) : bilinear(phi_grid, x);
  };

  // pointwise model fields through the frame closure
  auto gen = A.generator;
  auto fc = f;
  auto frame_B = [ug_copy, gen, fc](const Vec2& x) {
    return Mat2::rotation(-ug_copy.eval(fc.apply_float(x))) * gen->eval(x) * Mat2::rotation(ug_copy.eval(x));
  };
  auto k_fn = [frame_B](const Vec2& x) { return frame_B(x).a; };
  auto alpha_fn = [frame_B, phi_fn](const Vec2& x) {
    Mat2 B = frame_B(x);
    return B.b * phi_fn(x) / B.a;
  };

  ReductionResult out;
  out.frame_jumps = {j1, j2};
  out.model = triangular_model(f, make_field(std::function<double(const Vec2&)>(k_fn)),
                               make_field(std::function<double(const Vec2&)>(alpha_fn)));
  if (auto p = detail::fit_function(k_fn, f)) out.model.k.poly = p;
  if (auto p = detail::fit_function(alpha_fn, f)) out.model.alpha.poly = p;
  out.C = [ug_copy, phi_fn](const Vec2& x) {
    return Mat2::rotation(ug_copy.eval(x)) * Mat2::diagonal(1.0, phi_fn(x));
  };
  out.C_grid = GridField<Mat2>(N, f.q1, f.q2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out.C_grid.at(i, j) = out.C(out.C_grid.node(i, j));

  const ModelForm& m = out.model;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Vec2 x = out.C_grid.node(i, j);
      int t = img[std::size_t(i) * N + j];
      Mat2 lhs = A.eval(x);
      Mat2 rhs = out.C_grid.v[std::size_t(t)] * model_eval(m, x) * out.C_grid.at(i, j).inverse();
      out.residual = std::max(out.residual, frobenius_dist(lhs, rhs) / std::max(1.0, lhs.frobenius()));
    }
  return out;
}

// C(x) = sqrt of the invariant conformal structure; the conjugated cocycle
// is (close to) k R(alpha), with the deviation reported and gated.
inline ReductionResult reduce_conformal(const Cocycle& A, const ConformalField& Sf, double dev_tol = 1e-4) {
  const auto& f = A.base;
  int N = Sf.S.N;
  auto Sgrid = Sf.S;
  auto gen = A.generator;
  auto fc = f;
  auto C_fn = [Sgrid](const Vec2& x) { return sqrt_spd(spd_bilinear(Sgrid, x)); };
  auto Aprime = [C_fn, gen, fc](const Vec2& x) {
    return C_fn(fc.apply_float(x)) * gen->eval(x) * C_fn(x).inverse();
  };

  GridField<double> ag(N, f.q1, f.q2);
  double dev = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Mat2 M = Aprime(ag.node(i, j));
      double k = std::sqrt(std::max(M.det(), 1e-300));
      double al = std::atan2(M.c - M.b, M.a + M.d);
      ag.at(i, j) = al;
      dev = std::max(dev, frobenius_dist(M, Mat2::rotation(al) * k) / M.frobenius());
    }
  if (dev > dev_tol)
    throw reduction_error("conjugated cocycle is not conformal (deviation " + std::to_string(dev) + ")");

  auto ug = detail::unwrap_angles(ag, 2 * M_PI, M_PI / 2);
  int w1 = int(std::lround(ug.jump1 / (2 * M_PI))), w2 = int(std::lround(ug.jump2 / (2 * M_PI)));
  auto ug_copy = ug;
  auto alpha_fn = [ug_copy, Aprime](const Vec2& x) {
    // exact pointwise angle, unwrapped against the interpolated field
    Mat2 M = Aprime(x);
    double raw = std::atan2(M.c - M.b, M.a + M.d);
    double guide = ug_copy.eval(x);
    return guide + detail::reduce_mod(raw - guide, 2 * M_PI);
  };
  auto k_fn = [Aprime](const Vec2& x) { return std::sqrt(std::max(Aprime(x).det(), 1e-300)); };

  ReductionResult out;
  out.frame_jumps = {w1, w2};
  int q1 = f.q1, q2 = f.q2;
  auto alpha_rem = [alpha_fn, w1, w2, q1, q2](const Vec2& x) {
    return alpha_fn(x) - 2 * M_PI * (double(w1) * x.x / q1 + double(w2) * x.y / q2);
  };
  out.model = conformal_model(f, make_field(std::function<double(const Vec2&)>(k_fn)),
                              make_field(std::function<double(const Vec2&)>(alpha_fn)), {w1, w2});
  if (auto p = detail::fit_function(k_fn, f)) out.model.k.poly = p;
  if (auto p = detail::fit_function(alpha_rem, f)) out.model.alpha.poly = p;
  // report C with the A = C(fx) A' C(x)^{-1} convention shared by all reductions
  out.C = [C_fn](const Vec2& x) { return C_fn(x).inverse(); };
  out.C_grid = GridField<Mat2>(N, f.q1, f.q2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out.C_grid.at(i, j) = out.C(out.C_grid.node(i, j));

  auto img = detail::node_permutation(f, N);
  const ModelForm& m = out.model;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Vec2 x = out.C_grid.node(i, j);
      Mat2 lhs = A.eval(x);
      Mat2 rhs = out.C_grid.v[std::size_t(img[std::size_t(i) * N + j])] * model_eval(m, x) *
                 out.C_grid.at(i, j).inverse();
      out.residual = std::max(out.residual, frobenius_dist(lhs, rhs) / std::max(1.0, lhs.frobenius()));
    }
  return out;
}

// Change of basis to a transverse pair of invariant line fields.
inline ReductionResult reduce_diagonal(const Cocycle& A, const LineField& Lp, const LineField& Lm,
                                       double min_gap = 0.05) {
  const auto& f = A.base;
  int N = Lp.theta.N;
  if (Lm.theta.N != N) throw std::invalid_argument("reduce_diagonal: grid sizes differ");
  auto up = detail::unwrap_angles(Lp.theta, M_PI, M_PI / 4);
  auto um = detail::unwrap_angles(Lm.theta, M_PI, M_PI / 4);
  for (double j : {up.jump1 / M_PI, up.jump2 / M_PI, um.jump1 / M_PI, um.jump2 / M_PI})
    if (int(std::lround(j)) % 2 != 0)
      throw reduction_error("line field is non-orientable; lift to the double cover first");

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (line_angle_dist(Lp.theta.at(i, j), Lm.theta.at(i, j)) < min_gap)
        throw transversality_error("line fields nearly parallel at grid cell (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");

  auto up_c = up;
  auto um_c = um;
  auto C_fn = [up_c, um_c](const Vec2& x) {
    double t1 = up_c.eval(x), t2 = um_c.eval(x);
    return Mat2{std::cos(t1), std::cos(t2), std::sin(t1), std::sin(t2)};
  };
  auto gen = A.generator;
  auto fc = f;
  auto Aprime = [C_fn, gen, fc](const Vec2& x) {
    return C_fn(fc.apply_float(x)).inverse() * gen->eval(x) * C_fn(x);
  };
  auto a1_fn = [Aprime](const Vec2& x) { return Aprime(x).a; };
  auto a2_fn = [Aprime](const Vec2& x) { return Aprime(x).d; };

  ReductionResult out;
  out.model = diagonal_model(f, make_field(std::function<double(const Vec2&)>(a1_fn)),
                             make_field(std::function<double(const Vec2&)>(a2_fn)));
  if (auto p = detail::fit_function(a1_fn, f)) out.model.alpha.poly = p;
  if (auto p = detail::fit_function(a2_fn, f)) out.model.alpha2.poly = p;
  out.C = C_fn;
  out.C_grid = GridField<Mat2>(N, f.q1, f.q2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out.C_grid.at(i, j) = C_fn(out.C_grid.node(i, j));

  auto img = detail::node_permutation(f, N);
  const ModelForm& m = out.model;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Vec2 x = out.C_grid.node(i, j);
      Mat2 lhs = A.eval(x);
      Mat2 rhs = out.C_grid.v[std::size_t(img[std::size_t(i) * N + j])] * model_eval(m, x) *
                 out.C_grid.at(i, j).inverse();
      out.residual = std::max(out.residual, frobenius_dist(lhs, rhs) / std::max(1.0, lhs.frobenius()));
    }
  return out;
}

// ---- full classification ---------------------------------------------------------

enum class FullType { I, Iprime, II, IIprime, III, Undetermined };

inline const char* to_string(FullType t) {
  switch (t) {
    case FullType::I: return "I";
    case FullType::Iprime: return "I'";
    case FullType::II: return "II";
    case FullType::IIprime: return "II'";
    case FullType::III: return "III";
    case FullType::Undetermined: return "undetermined";
  }
  return "?";
}

struct ClassifyOptions {
  int n_max = 3;
  int grid = 128;
  int iterations = 2000;
  double zero_tol = 1e-6;    // below: obstruction treated as vanishing
  double big_tol = 1e-2;     // above: obstruction treated as decisively nonzero
  double residual_gate = 1e-4;
};

struct Classification {
  FullType type = FullType::Undetermined;
  std::optional<ReductionResult> reduction;
  std::array<int, 2> holonomy_signs{1, 1};
  std::string diagnostics;
};

inline Cocycle lift_cocycle(const Cocycle& A, int q1, int q2) {
  auto fc = lift_to_cover(LatticeAutomorphism(A.base.F), q1, q2);
  return Cocycle(fc, A.generator, false);
}

inline Classification classify_full(const Cocycle& A, const ClassifyOptions& opt = {}) {
  Classification out;
  auto pc = classify_periodic(A, opt.n_max);
  if (pc.cls == PeriodicClass::Violation) {
    out.diagnostics = "periodic products have distinct Lyapunov exponents; not a one-exponent cocycle";
    return out;
  }

  if (pc.cls == PeriodicClass::Elliptic || pc.cls == PeriodicClass::ScalarLike) {
    auto cf = find_conformal(A, opt.grid, opt.iterations);
    if (cf.residual > opt.residual_gate) {
      out.diagnostics = "no invariant conformal structure found (residual " + std::to_string(cf.residual) + ")";
      return out;
    }
    ReductionResult red;
    try {
      red = reduce_conformal(A, cf);
    } catch (const reduction_error& e) {
      out.diagnostics = e.what();
      return out;
    }
    auto rep_pi = detail::scan_mod(red.model.alpha.fn, A.base, opt.n_max, M_PI);
    if (rep_pi.max_abs > opt.big_tol) {
      out.type = FullType::III;
      out.reduction = red;
      return out;
    }
    if (rep_pi.max_abs > opt.zero_tol) {
      out.diagnostics = "angle obstruction mod pi in the gray zone";
      out.reduction = red;
      return out;
    }
    auto rep_2pi = detail::scan_mod(red.model.alpha.fn, A.base, opt.n_max, 2 * M_PI);
    out.reduction = red;
    if (rep_2pi.max_abs <= opt.zero_tol) {
      out.type = FullType::II;
    } else if (rep_2pi.max_abs > opt.big_tol) {
      out.type = FullType::IIprime;
      out.reduction->model.on_cover = true;
      out.reduction->on_cover = true;
    } else {
      out.diagnostics = "angle obstruction mod 2pi in the gray zone";
    }
    return out;
  }

  // parabolic family: invariant line field, then triangular reduction
  auto L = find_line(A, opt.grid, opt.iterations);
  if (L.residual > opt.residual_gate) {
    out.diagnostics = "no invariant line field found (residual " + std::to_string(L.residual) + ")";
    return out;
  }
  std::array<int, 2> h{1, 1};
  try {
    h = holonomy(L);
  } catch (const field_too_rough_error& e) {
    out.diagnostics = std::string("holonomy undecidable: ") + e.what();
    return out;
  }
  out.holonomy_signs = h;
  bool primed = h[0] < 0 || h[1] < 0;
  Cocycle work = A;
  LineField Lwork = L;
  if (primed) {
    int q1 = h[0] < 0 ? 2 * A.base.q1 : A.base.q1;
    int q2 = h[1] < 0 ? 2 * A.base.q2 : A.base.q2;
    work = lift_cocycle(A, q1, q2);
    Lwork = find_line(work, opt.grid, opt.iterations);
    if (Lwork.residual > opt.residual_gate) {
      out.diagnostics = "line field lost on the cover";
      return out;
    }
    auto hc = holonomy(Lwork);
    if (hc[0] < 0 || hc[1] < 0) {
      out.diagnostics = "line field still non-orientable on the chosen cover";
      return out;
    }
  }
  ReductionResult red;
  try {
    red = reduce_triangular(work, Lwork);
  } catch (const reduction_error& e) {
    out.diagnostics = e.what();
    return out;
  }
  red.on_cover = primed;
  red.model.on_cover = primed;
  auto rep = scan_additive(red.model.alpha.fn, work.base, opt.n_max);
  out.reduction = red;
  if (rep.max_abs > opt.big_tol) {
    out.type = primed ? FullType::Iprime : FullType::I;
  } else if (rep.max_abs <= opt.zero_tol) {
    out.type = primed ? FullType::IIprime : FullType::II;
  } else {
    out.diagnostics = "shear obstruction in the gray zone";
  }
  return out;
}

// ---- periodic conjugator continuity probe ------------------------------------------

// Distance between conjugators after quotienting the centralizer freedom
// of the relevant model type (left multiplication by Z).
inline double centralizer_quotient_distance(ModelKind kind, const Mat2& C1, const Mat2& C2) {
  switch (kind) {
    case ModelKind::Scalar: return 0.0;  // centralizer is everything constant
    case ModelKind::Triangular: {
      auto coords = [](const Mat2& C) -> std::optional<std::pair<double, double>> {
        if (std::abs(C.d) < 1e-9 * C.frobenius()) return std::nullopt;
        return std::make_pair(C.a / C.d, C.c / C.d);
      };
      auto a = coords(C1), b = coords(C2);
      if (!a || !b) return 1e9;
      return std::abs(a->first - b->first) + std::abs(a->second - b->second);
    }
    case ModelKind::Conformal:
      return hyp_distance(spd_normalize(C1.transpose() * C1), spd_normalize(C2.transpose() * C2));
    case ModelKind::Diagonal: {
      auto r1 = line_angle_dist(line_angle({C1.a, C1.b}), line_angle({C2.a, C2.b}));
      auto r2 = line_angle_dist(line_angle({C1.c, C1.d}), line_angle({C2.c, C2.d}));
      return r1 + r2;
    }
  }
  return 0.0;
}

struct ConjugatorSample {
  RationalPoint point;
  int period = 1;
  Mat2 C;
  double norm = 0.0;
  bool in_ball = false;
};

struct ConjugatorAnalysis {
  std::vector<ConjugatorSample> table;
  double sup_norm = 0.0;
  std::size_t failures = 0;  // periodic points whose products are not conjugate
  int in_ball_count = 0;
  double dispersion = 0.0;  // max pairwise quotient distance within the probe ball
};

inline ConjugatorAnalysis periodic_conjugator_analysis(const Cocycle& A, const Cocycle& B, int n_max,
                                                       ModelKind kind, Vec2 p0, double radius,
                                                       double tol = 1e-7) {
  if (A.base.q1 != B.base.q1 || A.base.q2 != B.base.q2) throw cover_error("conjugator analysis: cover mismatch");
  ConjugatorAnalysis out;
  std::vector<const ConjugatorSample*> ball;
  for (const auto& o : enumerate_orbits(A.base, n_max)) {
    for (const auto& p : o.points) {
      Vec2 x = p.to_vec2();
      Mat2 PA = product(A, x, o.period), PB = product(B, x, o.period);
      auto c = conjugator(PA, PB, tol);
      if (!c) {
        ++out.failures;
        continue;
      }
      ConjugatorSample s;
      s.point = p;
      s.period = o.period;
      s.C = c->C;
      s.norm = c->C.frobenius();
      s.in_ball = torus_dist(x, p0, A.base.q1, A.base.q2) < radius;
      out.sup_norm = std::max(out.sup_norm, s.norm);
      out.table.push_back(s);
    }
  }
  for (const auto& s : out.table)
    if (s.in_ball) {
      ++out.in_ball_count;
      ball.push_back(&s);
    }
  for (std::size_t i = 0; i < ball.size(); ++i)
    for (std::size_t j = i + 1; j < ball.size(); ++j)
      out.dispersion = std::max(out.dispersion, centralizer_quotient_distance(kind, ball[i]->C, ball[j]->C));
  return out;
}

// ---- deck-sign trace witness -------------------------------------------------------

struct TraceFlipWitness {
  PeriodicOrbit orbit;
  double trA = 0.0, trB = 0.0;
};

// Searches for a periodic orbit whose products under A and B have traces
// of opposite sign (so the products cannot be conjugate) even though the
// cocycles are cohomologous on a cover.
inline std::optional<TraceFlipWitness> trace_flip_witness(const Cocycle& A, const Cocycle& B, int n_max,
                                                          double tol = 1e-6) {
  for (const auto& o : enumerate_orbits(A.base, n_max)) {
    Vec2 x = o.base.to_vec2();
    double ta = product(A, x, o.period).trace();
    double tb = product(B, x, o.period).trace();
    if (std::abs(ta) > 0.5 && std::abs(ta + tb) <= tol * std::max(1.0, std::abs(ta)))
      return TraceFlipWitness{o, ta, tb};
  }
  return std::nullopt;
}

}  // namespace cocyclelab
