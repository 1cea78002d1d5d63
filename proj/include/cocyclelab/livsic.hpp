// Coboundary solvers and periodic-obstruction scans for additive,
// multiplicative, and circle-valued scalar equations over the toral
// automorphism.
//
// The exact solver works in frequency space: the coboundary equation
// phi(fx) - phi(x) = alpha(x) decouples along orbits of the transposed
// matrix on the frequency lattice, where it telescopes. Hyperbolicity
// guarantees every nonzero frequency orbit escapes any finite box, so the
// solve terminates and is exact.
#pragma once

#include <atomic>
#include <functional>
#include <set>
#include <thread>
#include <variant>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/grid.hpp"

namespace cocyclelab {

struct coverage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct obstruction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ObstructionEntry {
  PeriodicOrbit orbit;
  double value = 0.0;  // alpha^+(p, n), or log of the multiplicative product
};

struct ObstructionReport {
  std::vector<ObstructionEntry> entries;  // ordered by (period, base)
  double max_abs = 0.0;
  int n_max = 0;
  bool negative_sign = false;  // multiplicative scans: generator is negative everywhere
};

// Cached periodic orbits with float coordinates, shared across scans.
struct OrbitTable {
  std::vector<PeriodicOrbit> orbits;
  std::vector<std::vector<Vec2>> points;
};

inline OrbitTable build_orbit_table(const LatticeAutomorphism& f, int n_max) {
  OrbitTable t;
  t.orbits = enumerate_orbits(f, n_max);
  t.points.reserve(t.orbits.size());
  for (const auto& o : t.orbits) {
    std::vector<Vec2> pts;
    pts.reserve(o.points.size());
    for (const auto& p : o.points) pts.push_back(p.to_vec2());
    t.points.push_back(std::move(pts));
  }
  return t;
}

namespace detail {

template <typename Eval>
inline ObstructionReport scan_orbit_sums(const OrbitTable& table, int n_max, Eval&& ev) {
  ObstructionReport r;
  r.n_max = n_max;
  r.entries.resize(table.orbits.size());
  std::size_t nthreads = std::min<std::size_t>(std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1,
                                               table.orbits.size() ? table.orbits.size() : 1);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= table.orbits.size()) return;
      double s = 0.0;
      for (const auto& x : table.points[k]) s += ev(x);
      r.entries[k] = {table.orbits[k], s};
    }
  };
  if (nthreads > 1) {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  } else {
    work();
  }
  for (const auto& e : r.entries) r.max_abs = std::max(r.max_abs, std::abs(e.value));
  return r;
}

// Evaluates a TrigPoly from two base exponentials and repeated complex
// multiplication; much faster than per-coefficient sincos in big scans.
struct FastPolyEval {
  struct Term {
    int m1, m2;
    std::complex<double> c;
  };
  std::vector<Term> terms;  // one per conjugate pair (m > 0 half) plus the mean
  double mean = 0.0;
  int max1 = 0, max2 = 0;
  int q1 = 1, q2 = 1;

  explicit FastPolyEval(const TrigPoly& p) : q1(p.q1()), q2(p.q2()) {
    mean = p.mean();
    for (const auto& [m, cm] : p.coeffs()) {
      if (m.m1 > 0 || (m.m1 == 0 && m.m2 > 0)) {
        terms.push_back({int(m.m1), int(m.m2), cm});
        max1 = std::max(max1, std::abs(int(m.m1)));
        max2 = std::max(max2, std::abs(int(m.m2)));
      }
    }
  }

  static constexpr int kMaxPow = 128;

  double operator()(const Vec2& x) const {
    if (max1 >= kMaxPow || max2 >= kMaxPow) return slow(x);
    std::complex<double> e1 = std::polar(1.0, 2 * M_PI * x.x / q1);
    std::complex<double> e2 = std::polar(1.0, 2 * M_PI * x.y / q2);
    std::complex<double> p1[kMaxPow], p2[2 * kMaxPow];
    p1[0] = 1.0;
    for (int k = 1; k <= max1; ++k) p1[k] = p1[k - 1] * e1;
    p2[max2] = 1.0;
    for (int k = 1; k <= max2; ++k) {
      p2[max2 + k] = p2[max2 + k - 1] * e2;
      p2[max2 - k] = std::conj(p2[max2 + k]);
    }
    double s = mean;
    // stored half has m1 > 0, or m1 = 0 with m2 > 0; partner adds the conjugate
    for (const auto& t : terms) s += 2.0 * (t.c * p1[t.m1] * p2[max2 + t.m2]).real();
    return s;
  }

  double slow(const Vec2& x) const {
    double s = mean;
    for (const auto& t : terms)
      s += 2.0 * (t.c * std::polar(1.0, 2 * M_PI * (double(t.m1) * x.x / q1 + double(t.m2) * x.y / q2))).real();
    return s;
  }
};

}  // namespace detail

inline ObstructionReport scan_additive(const std::function<double(const Vec2&)>& alpha, const LatticeAutomorphism& f,
                                       int n_max) {
  auto table = build_orbit_table(f, n_max);
  return detail::scan_orbit_sums(table, n_max, alpha);
}

inline ObstructionReport scan_additive(const ScalarPtr& alpha, const LatticeAutomorphism& f, int n_max) {
  return scan_additive([&](const Vec2& x) { return alpha->eval(x); }, f, n_max);
}

inline ObstructionReport scan_additive(const TrigPoly& alpha, const LatticeAutomorphism& f, int n_max) {
  detail::FastPolyEval ev(alpha);
  auto table = build_orbit_table(f, n_max);
  return detail::scan_orbit_sums(table, n_max, ev);
}

// Table-sharing variant for batch scans over the same automorphism.
inline ObstructionReport scan_additive(const TrigPoly& alpha, const OrbitTable& table, int n_max) {
  detail::FastPolyEval ev(alpha);
  return detail::scan_orbit_sums(table, n_max, ev);
}

// Multiplicative scan: values are log k^x(p,n) = sum of log|k| over the
// orbit. k must be nonvanishing with constant sign on a sample grid.
inline ObstructionReport scan_multiplicative(const std::function<double(const Vec2&)>& k,
                                             const LatticeAutomorphism& f, int n_max) {
  const int grid = 64;
  double first = k(Vec2{0.013 * f.q1 / grid, 0.007 * f.q2 / grid});
  bool negative = first < 0;
  double min_abs = std::abs(first), max_abs = std::abs(first);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      double val = k(Vec2{f.q1 * (i + 0.013) / grid, f.q2 * (j + 0.007) / grid});
      if ((val < 0) != negative && val != 0.0)
        throw obstruction_error("multiplicative generator changes sign; not handled (split off the sign first)");
      min_abs = std::min(min_abs, std::abs(val));
      max_abs = std::max(max_abs, std::abs(val));
    }
  if (min_abs <= 1e-5 * max_abs)
    throw singular_eval_error("multiplicative generator vanishes (or nearly so) on the sample grid");
  auto table = build_orbit_table(f, n_max);
  auto r = detail::scan_orbit_sums(table, n_max, [&](const Vec2& x) { return std::log(std::abs(k(x))); });
  r.negative_sign = negative;
  return r;
}

inline ObstructionReport scan_multiplicative(const ScalarPtr& k, const LatticeAutomorphism& f, int n_max) {
  return scan_multiplicative([&](const Vec2& x) { return k->eval(x); }, f, n_max);
}

// ---- exact Fourier solve ------------------------------------------------

struct FourierWitness {
  std::vector<Freq> orbit_support;  // support frequencies on the violated orbit
  std::complex<double> orbit_sum;
  std::string reason;
};

using FourierResult = std::variant<TrigPoly, FourierWitness>;

inline bool fourier_solved(const FourierResult& r) { return std::holds_alternative<TrigPoly>(r); }

// Solves phi o f - phi = alpha exactly in frequency space, or returns the
// violated frequency orbit. Solvable iff mean(alpha) = 0 and every orbit
// of the transposed matrix through supp(alpha) has coefficient sum 0.
inline FourierResult solve_fourier(const TrigPoly& alpha, const LatticeAutomorphism& f, double tol = 1e-12) {
  if (f.q1 != alpha.q1() || f.q2 != alpha.q2()) throw cover_error("solve_fourier: cover mismatch");
  double scale = std::max(1.0, alpha.max_coeff());
  if (std::abs(alpha.mean()) > tol * scale)
    return FourierWitness{{Freq{0, 0}}, alpha.mean(), "nonzero mean"};

  IMat2 G = f.std_matrix();
  IMat2 H{G.a, G.c, G.b, G.d};  // transpose, acts on frequencies
  i128 dt = H.det();            // +-1
  IMat2 Hinv{H.d * dt, -H.b * dt, -H.c * dt, H.a * dt};
  auto apply_m = [](const IMat2& M, Freq m) {
    return Freq{detail::to_i64(M.a * m.m1 + M.b * m.m2, "frequency"),
                detail::to_i64(M.c * m.m1 + M.d * m.m2, "frequency")};
  };

  i64 B = alpha.support_radius();
  i64 exit_bound = 16 * B + 16;
  const int max_steps = 192;

  TrigPoly phi(f.q1, f.q2);
  std::set<std::pair<i64, i64>> processed;

  for (const auto& [m0, c0] : alpha.coeffs()) {
    if (m0 == Freq{0, 0}) continue;
    if (processed.count({m0.m1, m0.m2})) continue;
    // walk the H-orbit through m0 far enough both ways to clear the box
    std::vector<Freq> seq{m0};
    for (int dir = 0; dir < 2; ++dir) {
      const IMat2& step = dir == 0 ? H : Hinv;
      Freq m = m0;
      int outside = 0;
      for (int j = 0; j < max_steps && outside < 8; ++j) {
        m = apply_m(step, m);
        if (dir == 0) seq.push_back(m);
        else seq.insert(seq.begin(), m);
        outside = m.max_abs() > exit_bound ? outside + 1 : 0;
      }
      if (outside < 8) throw std::logic_error("frequency orbit failed to escape; matrix barely hyperbolic?");
    }
    std::vector<Freq> in_support;
    std::complex<double> orbit_sum = 0;
    for (const auto& m : seq) {
      auto c = alpha.coeff(m);
      if (std::abs(c) > 0) {
        in_support.push_back(m);
        orbit_sum += c;
        processed.insert({m.m1, m.m2});
      }
    }
    if (std::abs(orbit_sum) > tol * scale)
      return FourierWitness{in_support, orbit_sum, "frequency-orbit coefficient sum is nonzero"};
    // telescoping: phi at H^{j-1} m0-position = suffix sum from j onward
    std::complex<double> suffix = 0;
    for (std::size_t j = seq.size(); j-- > 1;) {
      suffix += alpha.coeff(seq[j]);
      if (std::abs(suffix) > 0) phi.set_coeff(seq[j - 1], suffix);
    }
  }
  phi.set_coeff({0, 0}, 0.0);  // mean-zero normalization
  phi.prune(tol * scale * 1e-3);

  // hard self-check: the solve is supposed to be exact in frequency space
  TrigPoly resid = phi.compose(f) - phi - alpha;
  if (resid.max_coeff() > 1e-9 * scale) throw std::logic_error("solve_fourier internal residual check failed");
  return phi;
}

// ---- orbit-table solve (approximate, general alpha) ----------------------

struct GridCertificate {
  GridField<double> phi;
  double residual = 0.0;      // sup |alpha - (phi o f - phi)| on a fresh validation grid
  double covered = 1.0;       // fraction of cells hit before gap filling
  std::string normalization;  // "mean-zero"
};

inline double eval_grid_phi(const GridCertificate& c, const Vec2& x) { return bilinear(c.phi, x); }

// phi along a dense orbit: phi(f^k x0) = alpha^+(x0, k), first visit wins,
// gaps filled from the nearest assigned cell. Honest residual on a
// validation grid; this solver is approximate by nature.
inline GridCertificate solve_orbit(const std::function<double(const Vec2&)>& alpha, const LatticeAutomorphism& f,
                                   Vec2 x0 = {std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0},
                                   long iterations = 1'000'000, int N = 128, double min_coverage = 0.999) {
  GridField<double> phi(N, f.q1, f.q2, 0.0);
  std::vector<uint8_t> hit(std::size_t(N) * N, 0);
  Vec2 x = x0;
  double s = 0.0;
  std::size_t nhit = 0;
  for (long k = 0; k < iterations; ++k) {
    auto [i, j] = phi.cell(x);
    std::size_t idx = std::size_t(i) * N + j;
    if (!hit[idx]) {
      hit[idx] = 1;
      phi.v[idx] = s;
      if (++nhit == std::size_t(N) * N) break;
    }
    s += alpha(x);
    x = f.apply_float(x);
  }
  GridCertificate cert;
  cert.covered = double(nhit) / (double(N) * N);
  if (cert.covered < min_coverage)
    throw coverage_error("orbit covered only " + std::to_string(100.0 * cert.covered) +
                         "% of grid cells within the iteration budget");
  // multi-source BFS fill from assigned cells (torus neighborhood)
  std::vector<std::pair<int, int>> frontier;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      if (hit[std::size_t(i) * N + j]) frontier.push_back({i, j});
  while (!frontier.empty()) {
    std::vector<std::pair<int, int>> next_frontier;
    for (auto [i, j] : frontier) {
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int t = 0; t < 4; ++t) {
        int ni = GridField<double>::wrap(i + di[t], N), nj = GridField<double>::wrap(j + dj[t], N);
        std::size_t idx = std::size_t(ni) * N + nj;
        if (!hit[idx]) {
          hit[idx] = 2;
          phi.v[idx] = phi.at(i, j);
          next_frontier.push_back({ni, nj});
        }
      }
    }
    frontier = std::move(next_frontier);
  }
  // mean-zero normalization
  double mean = 0.0;
  for (double v : phi.v) mean += v;
  mean /= double(phi.v.size());
  for (double& v : phi.v) v -= mean;
  cert.normalization = "mean-zero";
  cert.phi = phi;

  // validation on a fresh 257x257 grid, bilinear phi
  double worst = 0.0;
  const int M = 257;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      Vec2 y{f.q1 * (i + 0.37) / M, f.q2 * (j + 0.41) / M};
      double r = std::abs(alpha(y) - (bilinear(cert.phi, f.apply_float(y)) - bilinear(cert.phi, y)));
      worst = std::max(worst, r);
    }
  cert.residual = worst;
  return cert;
}

inline GridCertificate solve_orbit(const ScalarPtr& alpha, const LatticeAutomorphism& f,
                                   Vec2 x0 = {std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0},
                                   long iterations = 1'000'000, int N = 128, int scan_n_max = 5,
                                   double obstruction_tol = 1e-6) {
  auto rep = scan_additive(alpha, f, scan_n_max);
  if (rep.max_abs > obstruction_tol)
    throw obstruction_error("periodic obstruction " + std::to_string(rep.max_abs) +
                            " exceeds tolerance; alpha is not a coboundary");
  return solve_orbit([&](const Vec2& x) { return alpha->eval(x); }, f, x0, iterations, N);
}

// ---- pair solve: alpha - c beta coboundary --------------------------------

struct PairScalarResult {
  enum class Status { Solved, VerdictOnly, Inconsistent, Undetermined };
  Status status = Status::Undetermined;
  std::optional<double> c;
  std::optional<TrigPoly> s;  // present when alpha - c beta is trig-representable and solvable
  double worst = 0.0;         // max |alpha^+ - c beta^+| over scanned orbits
  std::optional<std::pair<PeriodicOrbit, PeriodicOrbit>> witness_pair;
};

inline PairScalarResult solve_pair_scalar(const ScalarPtr& alpha, const ScalarPtr& beta,
                                          const LatticeAutomorphism& f, int n_max, double tol = 1e-8) {
  auto ra = scan_additive(alpha, f, n_max);
  auto rb = scan_additive(beta, f, n_max);
  PairScalarResult out;
  std::size_t anchor = ra.entries.size();
  for (std::size_t k = 0; k < rb.entries.size(); ++k)
    if (std::abs(rb.entries[k].value) > std::max(tol, 1e-10)) {
      anchor = k;
      break;
    }
  if (anchor == ra.entries.size()) {
    out.status = PairScalarResult::Status::Undetermined;
    return out;
  }
  double c = ra.entries[anchor].value / rb.entries[anchor].value;
  out.c = c;
  for (std::size_t k = 0; k < ra.entries.size(); ++k) {
    double r = std::abs(ra.entries[k].value - c * rb.entries[k].value);
    if (r > out.worst) {
      out.worst = r;
      if (r > tol) out.witness_pair = {ra.entries[anchor].orbit, ra.entries[k].orbit};
    }
  }
  if (out.worst > tol) {
    out.status = PairScalarResult::Status::Inconsistent;
    return out;
  }
  out.status = PairScalarResult::Status::VerdictOnly;
  try {
    TrigPoly diff = to_trigpoly(alpha, f.q1, f.q2) - to_trigpoly(beta, f.q1, f.q2) * c;
    auto res = solve_fourier(diff, f, 1e-10);
    if (fourier_solved(res)) {
      out.s = std::get<TrigPoly>(res);
      out.status = PairScalarResult::Status::Solved;
    }
  } catch (const not_representable_error&) {
    // verdict stands on the periodic scan alone
  }
  return out;
}

// ---- circle-valued solve ---------------------------------------------------

struct CircleCertificate {
  TrigPoly s_lift;
  double modulus = 2 * M_PI;
  double residual = 0.0;  // circle distance residual on a validation grid
};

struct CircleWitness {
  std::optional<PeriodicOrbit> orbit;  // periodic obstruction (mod modulus)
  double obstruction = 0.0;
  std::optional<FourierWitness> fourier;
};

using CircleResult = std::variant<CircleCertificate, CircleWitness>;

// delta is a real lift of circle-valued data; solves s o f - s = delta
// (mod modulus). The constant part only needs to vanish mod the modulus.
inline CircleResult solve_circle(const TrigPoly& delta, const LatticeAutomorphism& f, double modulus = 2 * M_PI,
                                 int n_max = 5, double tol = 1e-8) {
  auto rep = scan_additive(delta, f, n_max);
  double worst = 0.0;
  std::optional<PeriodicOrbit> worst_orbit;
  for (const auto& e : rep.entries) {
    double d = circle_dist(e.value, 0.0, modulus);
    if (d > worst) {
      worst = d;
      worst_orbit = e.orbit;
    }
  }
  if (worst > tol) return CircleWitness{worst_orbit, worst, std::nullopt};
  TrigPoly osc = delta - TrigPoly::constant(delta.mean(), delta.q1(), delta.q2());
  auto res = solve_fourier(osc, f, 1e-10);
  if (!fourier_solved(res)) return CircleWitness{std::nullopt, worst, std::get<FourierWitness>(res)};
  CircleCertificate cert;
  cert.s_lift = std::get<TrigPoly>(res);
  cert.modulus = modulus;
  const int M = 257;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      Vec2 y{f.q1 * (i + 0.37) / M, f.q2 * (j + 0.41) / M};
      double lhs = cert.s_lift.eval(f.apply_float(y)) - cert.s_lift.eval(y);
      cert.residual = std::max(cert.residual, circle_dist(lhs, delta.eval(y), modulus));
    }
  return cert;
}

// ---- Holder gap diagnostic ------------------------------------------------

struct OrbitGapReport {
  double gap = 0.0;      // |alpha^+(x,n) - alpha^+(y,n)|
  double epsilon = 0.0;  // max distance between the orbit segments
  double gamma_fit = 0.0;  // gap / epsilon^sigma
};

inline OrbitGapReport close_orbit_gap(const std::function<double(const Vec2&)>& alpha,
                                      const LatticeAutomorphism& f, Vec2 x, Vec2 y, int n, double sigma = 1.0) {
  OrbitGapReport r;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    r.epsilon = std::max(r.epsilon, torus_dist(x, y, f.q1, f.q2));
    sx += alpha(x);
    sy += alpha(y);
    x = f.apply_float(x);
    y = f.apply_float(y);
  }
  if (r.epsilon > 0.25) throw std::invalid_argument("orbit segments are not epsilon-close (epsilon > 0.25)");
  r.gap = std::abs(sx - sy);
  r.gamma_fit = r.epsilon > 0 ? r.gap / std::pow(r.epsilon, sigma) : 0.0;
  return r;
}

}  // namespace cocyclelab
