#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "kq/errors.hpp"

namespace kq::numerics {

enum class quad_rule { gauss_legendre_composite, tanh_sinh };

struct quadrature_spec {
  quad_rule rule = quad_rule::gauss_legendre_composite;
  double rel_tol = 1e-11;
  int max_panels = 4096;
};

struct quad_result {
  double value;
  double err_est;
};

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1],
// computed by Newton iteration on P_n.
struct gauss_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline const gauss_rule& gauss_legendre(int n) {
  static thread_local std::vector<gauss_rule> cache(65);
  if (n < 1 || n > 64) throw contract_error("gauss_legendre: order out of range");
  gauss_rule& r = cache[static_cast<std::size_t>(n)];
  if (!r.nodes.empty()) return r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = -x;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return r;
}

namespace detail {

template <class F>
double gl16_panel(const F& f, double a, double b) {
  const gauss_rule& g = gauss_legendre(16);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 16; ++i)
    s += g.weights[static_cast<std::size_t>(i)] * f(mid + half * g.nodes[static_cast<std::size_t>(i)]);
  return s * half;
}

struct panel {
  double a, b, val, err;
  bool operator<(const panel& o) const { return err < o.err; }
};

template <class F>
quad_result adaptive_gauss(const F& f, double a, double b, const quadrature_spec& spec) {
  std::priority_queue<panel> heap;
  auto make_panel = [&](double lo, double hi) {
    double whole = gl16_panel(f, lo, hi);
    double m = 0.5 * (lo + hi);
    double val = gl16_panel(f, lo, m) + gl16_panel(f, m, hi);
    if (!std::isfinite(val))
      throw domain_error("integrate: non-finite integrand value on panel", lo);
    return panel{lo, hi, val, std::abs(val - whole)};
  };
  heap.push(make_panel(a, b));
  double total = heap.top().val, toterr = heap.top().err;
  int used = 1;
  while (toterr > std::max(spec.rel_tol * std::abs(total), 1e-14)) {
    if (used >= spec.max_panels)
      throw tolerance_error("integrate: panel budget exhausted", total, toterr);
    panel worst = heap.top();
    heap.pop();
    total -= worst.val;
    toterr -= worst.err;
    double m = 0.5 * (worst.a + worst.b);
    panel l = make_panel(worst.a, m), r = make_panel(m, worst.b);
    total += l.val + r.val;
    toterr += l.err + r.err;
    heap.push(l);
    heap.push(r);
    ++used;
  }
  return {total, toterr};
}

template <class F>
quad_result tanh_sinh(const F& f, double a, double b, const quadrature_spec& spec) {
  // x = mid + half*tanh((pi/2) sinh t), trapezoid in t with level doubling.
  const double half = 0.5 * (b - a);
  const double tmax = 3.8;  // weights below ~1e-17 beyond this
  auto eval = [&](double t) {
    double u = 0.5 * M_PI * std::sinh(t);
    // (1+tanh u)/2 computed in a cancellation-free form; keeps the true
    // (tiny) distance to the endpoints so integrable singularities damp out
    double s = 1.0 / (1.0 + std::exp(-2.0 * u));
    double w = 0.5 * M_PI * std::cosh(t) / (std::cosh(u) * std::cosh(u));
    double xx = a + (b - a) * s;
    if (xx <= a || xx >= b) return 0.0;
    double fx = f(xx);
    return std::isfinite(fx) ? fx * w : 0.0;
  };
  double h = 1.0;
  double sum = eval(0.0);
  for (double t = h; t <= tmax; t += h) sum += eval(t) + eval(-t);
  double prev = sum * h * half;
  int evals = static_cast<int>(2 * tmax / h) + 1;
  for (int level = 1; level <= 12; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= tmax; t += 2 * h) {
      add += eval(t) + eval(-t);
      evals += 2;
    }
    double cur = (prev * 0.5) + add * h * half;
    double err = std::abs(cur - prev);
    prev = cur;
    if (err <= std::max(spec.rel_tol * std::abs(cur), 1e-14)) return {cur, err};
    if (evals > 16 * spec.max_panels)
      throw tolerance_error("integrate: tanh-sinh budget exhausted", cur, err);
  }
  throw tolerance_error("integrate: tanh-sinh did not converge", prev, std::abs(prev));
}

}  // namespace detail

// \int_a^b f dx with an error estimate.  Throws tolerance_error when the
// panel budget runs out before the requested tolerance is met.
template <class F>
quad_result integrate(const F& f, double a, double b, const quadrature_spec& spec = {}) {
  if (spec.max_panels < 1 || spec.rel_tol <= 0)
    throw contract_error("integrate: invalid quadrature spec");
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0};
    throw contract_error("integrate: empty interval (a > b)");
  }
  if (spec.rule == quad_rule::tanh_sinh) return detail::tanh_sinh(f, a, b, spec);
  return detail::adaptive_gauss(f, a, b, spec);
}

// \int_R f(x) dx pulled back to (0,1) through x = log(q/(1-q)).
// Every integrand in this project decays at least like e^{-|x|}, which makes
// the pulled-back integrand bounded on (0,1).
template <class F>
quad_result integrate_line(const F& f, const quadrature_spec& spec = {}) {
  auto g = [&](double q) {
    double x = std::log(q) - std::log1p(-q);
    return f(x) / (q * (1.0 - q));
  };
  return integrate(g, 0.0, 1.0, spec);
}

}  // namespace kq::numerics
