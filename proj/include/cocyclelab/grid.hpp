// Uniform N x N grids over a cover torus: sampling, bilinear lookup, and
// FFT fitting of grid data back to trigonometric polynomials.
//
// The automorphism maps grid nodes to grid nodes (integer matrix acting on
// (i/N, j/N)), which several solvers exploit for exact node dynamics.
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "cocyclelab/trigpoly.hpp"

namespace cocyclelab {

template <typename T>
struct GridField {
  int N = 0;
  int q1 = 1, q2 = 1;
  std::vector<T> v;

  GridField() = default;
  GridField(int N_, int q1_, int q2_, T init = T{}) : N(N_), q1(q1_), q2(q2_), v(std::size_t(N_) * N_, init) {}

  static int wrap(int i, int N) {
    int r = i % N;
    return r < 0 ? r + N : r;
  }

  T& at(int i, int j) { return v[std::size_t(wrap(i, N)) * N + wrap(j, N)]; }
  const T& at(int i, int j) const { return v[std::size_t(wrap(i, N)) * N + wrap(j, N)]; }

  Vec2 node(int i, int j) const { return {double(q1) * i / N, double(q2) * j / N}; }

  // grid cell containing x (its lower-left node)
  std::pair<int, int> cell(const Vec2& x) const {
    int i = wrap(int(std::floor(x.x * N / q1)), N);
    int j = wrap(int(std::floor(x.y * N / q2)), N);
    return {i, j};
  }

  template <typename F>
  static GridField sample(int N, int q1, int q2, F&& fn) {
    GridField g(N, q1, q2);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) g.at(i, j) = fn(g.node(i, j));
    return g;
  }
};

// Node index image under the automorphism: node (i,j) maps to a node.
inline std::pair<int, int> node_image(const LatticeAutomorphism& f, int N, int i, int j) {
  // x = (q1 i / N, q2 j / N); F x = (q1 i' / N, q2 j' / N) with integer
  // i' = G11 i + G12 j etc. for the standard-torus matrix G
  IMat2 G = f.std_matrix();
  i64 ii = detail::to_i64(G.a * i + G.b * j, "grid index");
  i64 jj = detail::to_i64(G.c * i + G.d * j, "grid index");
  return {GridField<double>::wrap(int(ii % N), N), GridField<double>::wrap(int(jj % N), N)};
}

inline double bilinear(const GridField<double>& g, const Vec2& x) {
  double u = x.x * g.N / g.q1, w = x.y * g.N / g.q2;
  int i = int(std::floor(u)), j = int(std::floor(w));
  double du = u - i, dw = w - j;
  return (1 - du) * (1 - dw) * g.at(i, j) + du * (1 - dw) * g.at(i + 1, j) + (1 - du) * dw * g.at(i, j + 1) +
         du * dw * g.at(i + 1, j + 1);
}

inline Mat2 bilinear(const GridField<Mat2>& g, const Vec2& x) {
  double u = x.x * g.N / g.q1, w = x.y * g.N / g.q2;
  int i = int(std::floor(u)), j = int(std::floor(w));
  double du = u - i, dw = w - j;
  return g.at(i, j) * ((1 - du) * (1 - dw)) + g.at(i + 1, j) * (du * (1 - dw)) + g.at(i, j + 1) * ((1 - du) * dw) +
         g.at(i + 1, j + 1) * (du * dw);
}

namespace detail {

// In-place radix-2 FFT; n must be a power of two.
inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
  std::size_t n = a.size();
  if (n & (n - 1)) throw std::invalid_argument("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2 * M_PI / double(len) * (inverse ? 1 : -1);
    std::complex<double> wl = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w = 1.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        auto u = a[i + k], t = a[i + k + len / 2] * w;
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& z : a) z /= double(n);
}

}  // namespace detail

// Least-squares-exact Fourier fit of grid samples: returns the TrigPoly
// with frequencies |m1|,|m2| <= m_max (in cover units) whose node values
// reproduce the DFT bins. Exact when the sampled field is a TrigPoly with
// support inside the box and N > 2*m_max.
inline TrigPoly fit_trigpoly(const GridField<double>& g, int m_max, double coeff_tol = 1e-12) {
  int N = g.N;
  if (2 * m_max >= N) throw std::invalid_argument("fit_trigpoly: frequency box exceeds Nyquist");
  std::vector<std::complex<double>> rows(std::size_t(N) * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) rows[std::size_t(i) * N + j] = g.at(i, j);
  // FFT along j then along i
  for (int i = 0; i < N; ++i) {
    std::vector<std::complex<double>> tmp(rows.begin() + std::size_t(i) * N, rows.begin() + std::size_t(i + 1) * N);
    detail::fft(tmp, false);
    std::copy(tmp.begin(), tmp.end(), rows.begin() + std::size_t(i) * N);
  }
  std::vector<std::complex<double>> col(N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) col[i] = rows[std::size_t(i) * N + j];
    detail::fft(col, false);
    for (int i = 0; i < N; ++i) rows[std::size_t(i) * N + j] = col[i];
  }
  TrigPoly p(g.q1, g.q2);
  double scale = 1.0 / (double(N) * N);
  for (int m1 = -m_max; m1 <= m_max; ++m1)
    for (int m2 = -m_max; m2 <= m_max; ++m2) {
      int i = GridField<double>::wrap(m1, N), j = GridField<double>::wrap(m2, N);
      std::complex<double> c = rows[std::size_t(i) * N + j] * scale;
      // sample convention: value at node = sum c_m e^{+2 pi i (m1 i + m2 j)/N},
      // forward FFT uses e^{-...}, so bin (m1, m2) holds c_{(m1, m2)} directly
      if (std::abs(c) > coeff_tol) p.set_coeff({m1, m2}, c);
    }
  return p;
}

}  // namespace cocyclelab
