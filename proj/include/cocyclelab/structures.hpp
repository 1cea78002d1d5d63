// Invariant line fields and invariant conformal structures on the torus,
// together with the det-1 SPD geometry they live in.
//
// The automorphism permutes the nodes of a uniform N x N grid, and every
// node is periodic. Where the return product at a node is elliptic it
// fixes exactly one conformal structure; where it is parabolic or split
// it fixes one or two lines. These anchors are exact (no interpolation),
// and a damped pushforward iteration fills in whatever the anchors leave
// open. Residuals are always recomputed from scratch over the node
// dynamics at the end.
#pragma once

#include <array>
#include <cstdint>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/grid.hpp"

namespace cocyclelab {

struct field_too_rough_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct elliptic_product_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- det-1 SPD geometry --------------------------------------------------

inline bool is_spd2(const Mat2& S, double sym_tol = 1e-12, double det_tol = 1e-10) {
  return std::abs(S.b - S.c) <= sym_tol * std::max(1.0, S.max_abs()) && std::abs(S.det() - 1.0) <= det_tol &&
         S.trace() > 0;
}

inline Mat2 symmetrize(const Mat2& S) { return {S.a, (S.b + S.c) / 2.0, (S.b + S.c) / 2.0, S.d}; }

inline Mat2 spd_normalize(const Mat2& S) {
  Mat2 T = symmetrize(S);
  double dt = T.det();
  if (dt <= 0) throw std::domain_error("matrix is not positive definite");
  return T / std::sqrt(dt);
}

// A[S] = (A^{-1})^T S A^{-1}, renormalized to det 1 and re-symmetrized.
inline Mat2 pushforward(const Mat2& A, const Mat2& S) {
  if (std::abs(A.det()) < 1e-13 * A.frobenius() * A.frobenius())
    throw std::domain_error("pushforward: near-singular matrix");
  Mat2 Ai = A.inverse();
  return spd_normalize(Ai.transpose() * S * Ai);
}

// Log coordinates: det-1 SPD = exp of a traceless symmetric [[a,b],[b,-a]].
inline Vec2 spd_log(const Mat2& S) {
  double c = std::max(1.0, S.trace() / 2.0);
  double w = std::acosh(c);
  if (w < 1e-12) return {0.0, 0.0};
  double scale = w / std::sinh(w);
  return {(S.a - S.d) / 2.0 * scale, (S.b + S.c) / 2.0 * scale};
}

inline Mat2 spd_exp(const Vec2& ab) {
  double w = std::hypot(ab.x, ab.y);
  double ch = std::cosh(w), sh = w < 1e-12 ? 1.0 : std::sinh(w) / w;
  return {ch + sh * ab.x, sh * ab.y, sh * ab.y, ch - sh * ab.x};
}

// Frobenius norm of log(S1^{-1/2} S2 S1^{-1/2}); for det-1 pairs this is
// sqrt(2) * acosh(tr(S1^{-1} S2) / 2).
inline double hyp_distance(const Mat2& S1, const Mat2& S2) {
  double c = (S1.inverse() * S2).trace() / 2.0;
  return std::sqrt(2.0) * std::acosh(std::max(1.0, c));
}

// Geometric mean; closed form for det-1 SPD pairs.
inline Mat2 midpoint(const Mat2& S1, const Mat2& S2) { return spd_normalize(S1 + S2); }

// Principal square root of an SPD matrix (det need not be 1).
inline Mat2 sqrt_spd(const Mat2& S) {
  double s = std::sqrt(S.det());
  double t = std::sqrt(S.trace() + 2.0 * s);
  return (S + Mat2::identity() * s) / t;
}

// ---- node dynamics -------------------------------------------------------

namespace detail {

struct NodeDynamics {
  int N;
  const LatticeAutomorphism f;
  std::vector<int> image;    // flattened node permutation under f
  std::vector<Mat2> gen;     // generator at each node
  std::vector<int> cycle_of;  // cycle index per node
  std::vector<std::vector<int>> cycles;

  NodeDynamics(const Cocycle& A, int N_) : N(N_), f(A.base) {
    std::size_t total = std::size_t(N) * N;
    image.resize(total);
    gen.resize(total);
    cycle_of.assign(total, -1);
    GridField<double> probe(N, f.q1, f.q2);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        auto [ii, jj] = node_image(f, N, i, j);
        image[std::size_t(i) * N + j] = ii * N + jj;
        gen[std::size_t(i) * N + j] = A.eval(probe.node(i, j));
      }
    for (std::size_t s = 0; s < total; ++s) {
      if (cycle_of[s] >= 0) continue;
      std::vector<int> cyc;
      int k = int(s);
      while (cycle_of[k] < 0) {
        cycle_of[k] = int(cycles.size());
        cyc.push_back(k);
        k = image[k];
      }
      cycles.push_back(std::move(cyc));
    }
  }

  Vec2 node(int idx) const { return {double(f.q1) * (idx / N) / N, double(f.q2) * (idx % N) / N}; }

  // Return product around the node's cycle starting at idx, Frobenius-
  // normalized each step (all uses are scale-invariant).
  Mat2 cycle_product(int idx) const {
    Mat2 P = Mat2::identity();
    int k = idx;
    do {
      P = gen[k] * P;
      double n = P.frobenius();
      if (n > 1e100 || n < 1e-100) P = P / n;
      k = image[k];
    } while (k != idx);
    return P / P.frobenius();
  }
};

}  // namespace detail

// ---- conformal structures --------------------------------------------------

struct ConformalField {
  GridField<Mat2> S;
  double residual = 0.0;
  bool diverged = false;
  double anchored_fraction = 0.0;
  std::vector<double> residual_history;
};

// The conformal structure fixed by an elliptic matrix P = T r R(w) T^{-1}
// is (T T^T)^{-1}, normalized.
inline Mat2 fixed_structure_of_elliptic(const Mat2& P, const JordanTols& tols = {}) {
  CanonicalForm cf = canonical_form(P, tols);
  if (cf.type != JordanType::Elliptic) throw std::invalid_argument("matrix is not elliptic");
  return spd_normalize((cf.T * cf.T.transpose()).inverse());
}

inline ConformalField find_conformal(const Cocycle& A, int N = 128, int iterations = 2000,
                                     Mat2 seed = Mat2::identity(), const JordanTols& tols = {}) {
  detail::NodeDynamics dyn(A, N);
  std::size_t total = std::size_t(N) * N;
  std::vector<Mat2> S(total, spd_normalize(seed));
  std::vector<uint8_t> anchored(total, 0);

  std::size_t n_anchored = 0;
  for (std::size_t k = 0; k < total; ++k) {
    if (dyn.cycles[dyn.cycle_of[k]].size() > std::size_t(64) * N) continue;
    Mat2 P = dyn.cycle_product(int(k));
    if (jordan_classify(P, tols) == JordanType::Elliptic) {
      S[k] = fixed_structure_of_elliptic(P, tols);
      anchored[k] = 1;
      ++n_anchored;
    }
  }

  ConformalField out;
  out.anchored_fraction = double(n_anchored) / double(total);

  auto residual_of = [&](const std::vector<Mat2>& field) {
    double worst = 0.0;
    for (std::size_t k = 0; k < total; ++k)
      worst = std::max(worst, hyp_distance(field[dyn.image[k]], pushforward(dyn.gen[k], field[k])));
    return worst;
  };

  // damped transport sweeps fill the unanchored nodes
  std::vector<Mat2> next(total);
  double res = residual_of(S);
  out.residual_history.push_back(res);
  for (int it = 0; it < iterations && res > 1e-14; ++it) {
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t y = dyn.image[k];
      next[y] = anchored[y] ? S[y] : midpoint(S[y], pushforward(dyn.gen[k], S[k]));
    }
    S.swap(next);
    if ((it + 1) % 50 == 0 || it == iterations - 1) {
      res = residual_of(S);
      out.residual_history.push_back(res);
      if (res > 1e6) break;  // hopeless; stop burning budget
    }
  }
  out.residual = residual_of(S);
  out.diverged = out.residual > 10.0;

  out.S = GridField<Mat2>(N, A.base.q1, A.base.q2);
  for (std::size_t k = 0; k < total; ++k) out.S.v[k] = S[k];
  return out;
}

// Log-coordinate bilinear interpolation of a conformal grid field.
inline Mat2 spd_bilinear(const GridField<Mat2>& g, const Vec2& x) {
  double u = x.x * g.N / g.q1, w = x.y * g.N / g.q2;
  int i = int(std::floor(u)), j = int(std::floor(w));
  double du = u - i, dw = w - j;
  Vec2 l00 = spd_log(g.at(i, j)), l10 = spd_log(g.at(i + 1, j));
  Vec2 l01 = spd_log(g.at(i, j + 1)), l11 = spd_log(g.at(i + 1, j + 1));
  Vec2 l = l00 * ((1 - du) * (1 - dw)) + l10 * (du * (1 - dw)) + l01 * ((1 - du) * dw) + l11 * (du * dw);
  return spd_exp(l);
}

// ---- line fields -----------------------------------------------------------

enum class LineDirection { Forward, Backward };

struct LineField {
  GridField<double> theta;  // angles mod pi in [0, pi)
  double residual = 0.0;
  double anchored_fraction = 0.0;
  std::vector<double> residual_history;
};

namespace detail {

// Invariant line(s) of a non-elliptic matrix: top eigendirection first.
inline std::vector<double> invariant_lines(const Mat2& P, const JordanTols& tols) {
  CanonicalForm cf = canonical_form(P, tols);
  switch (cf.type) {
    case JordanType::Scalar: return {};
    case JordanType::Parabolic: return {line_angle({cf.T.a, cf.T.c})};
    case JordanType::RealSplit: {
      double l1 = line_angle({cf.T.a, cf.T.c}), l2 = line_angle({cf.T.b, cf.T.d});
      // canon is diag(l, m) with l >= m, but domination is by |.|
      if (std::abs(cf.canon.a) >= std::abs(cf.canon.d)) return {l1, l2};
      return {l2, l1};
    }
    case JordanType::Elliptic: return {};
  }
  return {};
}

}  // namespace detail

inline LineField find_line(const Cocycle& A, int N = 128, int iterations = 2000,
                           LineDirection dir = LineDirection::Forward, const JordanTols& tols = {}) {
  detail::NodeDynamics dyn(A, N);
  std::size_t total = std::size_t(N) * N;

  std::vector<double> anchor(total, -1.0);
  std::size_t n_anchored = 0;
  for (std::size_t k = 0; k < total; ++k) {
    if (dyn.cycles[dyn.cycle_of[k]].size() > std::size_t(64) * N) continue;
    auto lines = detail::invariant_lines(dyn.cycle_product(int(k)), tols);
    if (!lines.empty()) {
      anchor[k] = lines.size() == 1 ? lines[0] : (dir == LineDirection::Forward ? lines[0] : lines[1]);
      ++n_anchored;
    }
  }

  LineField out;
  out.anchored_fraction = double(n_anchored) / double(total);

  // transport direction: forward pushes lines by A along f, backward by
  // A^{-1} along f^{-1} (converges to the contracted line)
  std::vector<int> from(total);
  std::vector<Mat2> step(total);
  if (dir == LineDirection::Forward) {
    for (std::size_t k = 0; k < total; ++k) from[dyn.image[k]] = int(k);
    for (std::size_t k = 0; k < total; ++k) step[k] = dyn.gen[k];  // theta(image) <- A(k) v(theta(k))
  } else {
    for (std::size_t k = 0; k < total; ++k) from[k] = dyn.image[k];
    for (std::size_t k = 0; k < total; ++k) step[dyn.image[k]] = dyn.gen[k].inverse();
  }

  auto residual_of = [&](const std::vector<double>& th) {
    double worst = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      Vec2 img = dyn.gen[k] * line_vector(th[k]);
      worst = std::max(worst, line_angle_dist(line_angle(img), th[dyn.image[k]]));
    }
    return worst;
  };

  auto run_from_seed = [&](const std::function<double(const Vec2&)>& seed, std::vector<double>& history) {
    std::vector<double> th(total);
    for (std::size_t k = 0; k < total; ++k) th[k] = anchor[k] >= 0 ? anchor[k] : seed(dyn.node(int(k)));
    std::vector<double> next(total);
    std::vector<std::array<double, 3>> acc(total, {0, 0, 0});  // Cesaro: accumulate v v^T
    int iters = n_anchored == total ? 0 : iterations;
    int window_start = iters * 3 / 4;
    for (int it = 0; it < iters; ++it) {
      for (std::size_t y = 0; y < total; ++y) {
        if (anchor[y] >= 0) {
          next[y] = anchor[y];
          continue;
        }
        int x = from[y];
        next[y] = line_angle(step[x] * line_vector(th[x]));
      }
      th.swap(next);
      if ((it + 1) % 200 == 0) history.push_back(residual_of(th));
      if (it >= window_start)
        for (std::size_t y = 0; y < total; ++y) {
          Vec2 v = line_vector(th[y]);
          acc[y][0] += v.x * v.x;
          acc[y][1] += v.x * v.y;
          acc[y][2] += v.y * v.y;
        }
    }
    // Cesaro-average as the top eigendirection of the accumulated v v^T
    for (std::size_t y = 0; y < total; ++y) {
      if (anchor[y] >= 0) continue;
      Mat2 M{acc[y][0], acc[y][1], acc[y][1], acc[y][2]};
      double tr = M.trace(), disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * M.det()));
      double lam = (tr + disc) / 2.0;
      Vec2 v1{M.b, lam - M.a}, v2{lam - M.d, M.c};
      th[y] = line_angle(v1.norm() >= v2.norm() ? v1 : v2);
    }
    return th;
  };

  std::vector<std::function<double(const Vec2&)>> seeds;
  if (n_anchored == total) {
    seeds.push_back([](const Vec2&) { return 0.0; });  // unused beyond a single pass
  } else {
    seeds.push_back([](const Vec2&) { return 0.0; });
    seeds.push_back([](const Vec2& x) { return M_PI * x.x; });
    seeds.push_back([](const Vec2& x) { return M_PI * x.y; });
    seeds.push_back([](const Vec2& x) { return M_PI * (x.x + x.y); });
    seeds.push_back([](const Vec2& x) { return 1.1 + 0.7 * std::sin(2 * M_PI * x.x) * std::cos(2 * M_PI * x.y); });
  }

  std::vector<double> best;
  double best_res = std::numeric_limits<double>::infinity();
  for (const auto& seed : seeds) {
    std::vector<double> history;
    auto th = run_from_seed(seed, history);
    double r = residual_of(th);
    history.push_back(r);
    if (r < best_res) {
      best_res = r;
      best = std::move(th);
      out.residual_history = std::move(history);
    }
    if (best_res < 1e-12) break;
  }

  out.residual = best_res;
  out.theta = GridField<double>(N, A.base.q1, A.base.q2);
  for (std::size_t k = 0; k < total; ++k) out.theta.v[k] = best[k];
  return out;
}

// ---- holonomy ---------------------------------------------------------------

// Signs of orientability along the two coordinate loops: +1 iff the
// continuous angle lift returns to itself mod 2 pi (even number of
// half-twists mod pi).
inline std::array<int, 2> holonomy(const LineField& L, double max_jump = M_PI / 4.0) {
  int N = L.theta.N;
  auto twist_steps = [&](bool along_x1) {
    double worst_sign = 1.0;
    int sign = 1;
    // track every row/column; they must agree for a continuous field
    for (int other = 0; other < N; ++other) {
      double total = 0.0;
      for (int t = 0; t < N; ++t) {
        double a = along_x1 ? L.theta.at(t, other) : L.theta.at(other, t);
        double b = along_x1 ? L.theta.at(t + 1, other) : L.theta.at(other, t + 1);
        double d = b - a;
        while (d > M_PI / 2) d -= M_PI;
        while (d < -M_PI / 2) d += M_PI;
        if (std::abs(d) > max_jump)
          throw field_too_rough_error("angle jump exceeds pi/4 between adjacent grid cells");
        total += d;
      }
      int half_twists = int(std::lround(total / M_PI));
      int s = (half_twists % 2 == 0) ? 1 : -1;
      if (other == 0) sign = s;
      else if (s != sign) worst_sign = -1.0;  // inconsistent rows; surface as roughness
    }
    if (worst_sign < 0) throw field_too_rough_error("holonomy sign differs between grid rows");
    return sign;
  };
  return {twist_steps(true), twist_steps(false)};
}

// ---- line data at periodic points -------------------------------------------

struct PeriodicLineSample {
  PeriodicOrbit orbit;
  std::vector<double> angles;  // at the orbit base; top eigendirection first
};

inline std::vector<PeriodicLineSample> line_from_periodic(const Cocycle& A, int n_max,
                                                          const JordanTols& tols = {}) {
  std::vector<PeriodicLineSample> out;
  for (const auto& o : enumerate_orbits(A.base, n_max)) {
    PeriodicDatum d = periodic_datum(A, o, tols);
    if (d.jordan_type == JordanType::Elliptic)
      throw elliptic_product_error("elliptic periodic product at " + orbit_label(o) + "; no invariant line");
    out.push_back({o, detail::invariant_lines(d.P, tols)});
  }
  return out;
}

// Shortest-arc bilinear interpolation of an angle field mod pi.
inline double angle_bilinear(const GridField<double>& g, const Vec2& x) {
  double u = x.x * g.N / g.q1, w = x.y * g.N / g.q2;
  int i = int(std::floor(u)), j = int(std::floor(w));
  double du = u - i, dw = w - j;
  double base = g.at(i, j);
  auto align = [&](double a) {
    while (a - base > M_PI / 2) a -= M_PI;
    while (a - base < -M_PI / 2) a += M_PI;
    return a;
  };
  double v = (1 - du) * (1 - dw) * base + du * (1 - dw) * align(g.at(i + 1, j)) +
             (1 - du) * dw * align(g.at(i, j + 1)) + du * dw * align(g.at(i + 1, j + 1));
  while (v >= M_PI) v -= M_PI;
  while (v < 0) v += M_PI;
  return v;
}

}  // namespace cocyclelab
