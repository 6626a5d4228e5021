#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kq/errors.hpp"

namespace kq::numerics {

// Uniformly sampled path on [0,1].  T needs vector-space semantics
// (double, Eigen vectors/matrices, ...).
template <class T>
struct sampled_path {
  std::vector<double> times;
  std::vector<T> values;

  std::size_t size() const { return times.size(); }

  void validate() const {
    if (times.size() != values.size())
      throw contract_error("sampled_path: times/values size mismatch");
    if (times.size() < 5) throw contract_error("sampled_path: need at least 5 samples");
    const double h = times[1] - times[0];
    if (!(h > 0)) throw contract_error("sampled_path: times must be strictly increasing");
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      double hi = times[i + 1] - times[i];
      if (!(hi > 0)) throw contract_error("sampled_path: times must be strictly increasing");
      if (std::abs(hi - h) > 1e-12)
        throw contract_error("sampled_path: spacing must be uniform within 1e-12");
    }
    if (times.front() < -1e-12 || times.back() > 1.0 + 1e-12)
      throw contract_error("sampled_path: times must lie in [0,1]");
  }
};

template <class T>
sampled_path<T> make_uniform_path(std::size_t n, const std::vector<T>& values) {
  sampled_path<T> p;
  p.times.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.times[i] = double(i) / double(n - 1);
  p.values = values;
  p.validate();
  return p;
}

// Fornberg weights: coefficients of the m-th derivative at z from samples
// at the given nodes.  Exact for any node layout, so shifted windows near
// the path endpoints keep full order.
inline std::vector<double> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  if (m < 0 || m > n) throw contract_error("fornberg_weights: order exceeds stencil");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1),
                                     std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[static_cast<std::size_t>(i)] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
             k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
      c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = c[i][static_cast<std::size_t>(m)];
  return w;
}

namespace detail {

// Window of (order+4) grid points around `at`, shifted to fit in the grid;
// m+4 points give 4th-order accuracy for the m-th derivative at any offset.
inline std::pair<std::size_t, std::size_t> stencil_window(std::size_t n, std::size_t at, int order) {
  std::size_t w = static_cast<std::size_t>(order) + 4;
  if (w > n) throw contract_error("fd_derivative: too few samples for requested order");
  std::size_t lo = (at >= w / 2) ? at - w / 2 : 0;
  if (lo + w > n) lo = n - w;
  return {lo, w};
}

}  // namespace detail

// m-th time derivative (m = 1,2,3) of a sampled path at the grid index `at`,
// 4th-order accurate for smooth inputs.
template <class T>
T fd_derivative_at(const sampled_path<T>& path, int order, std::size_t at) {
  path.validate();
  if (order < 1 || order > 3) throw contract_error("fd_derivative: order must be 1, 2 or 3");
  if (at >= path.size()) throw contract_error("fd_derivative: index out of range");
  auto [lo, w] = detail::stencil_window(path.size(), at, order);
  std::vector<double> nodes(path.times.begin() + static_cast<std::ptrdiff_t>(lo),
                            path.times.begin() + static_cast<std::ptrdiff_t>(lo + w));
  std::vector<double> wt = fornberg_weights(path.times[at], nodes, order);
  T acc = wt[0] * path.values[lo];
  for (std::size_t i = 1; i < w; ++i) acc = acc + wt[i] * path.values[lo + i];
  return acc;
}

// Same, addressed by grid time; t must coincide with a grid point.
template <class T>
T fd_derivative(const sampled_path<T>& path, int order, double t) {
  for (std::size_t i = 0; i < path.size(); ++i)
    if (std::abs(path.times[i] - t) <= 1e-12) return fd_derivative_at(path, order, i);
  throw contract_error("fd_derivative: t is not a grid point");
}

}  // namespace kq::numerics
