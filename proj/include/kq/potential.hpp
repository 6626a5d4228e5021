#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "kq/errors.hpp"

namespace kq::toric {

// value + first four derivatives
using jet4 = std::array<double, 5>;

inline jet4 operator+(const jet4& a, const jet4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4]};
}
inline jet4 operator*(double s, const jet4& a) {
  return {s * a[0], s * a[1], s * a[2], s * a[3], s * a[4]};
}

namespace detail {

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {};
  std::vector<double> d(c.size() - 1);
  for (std::size_t m = 1; m < c.size(); ++m) d[m - 1] = c[m] * double(m);
  return d;
}

inline double poly_eval(const std::vector<double>& c, double p) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * p + c[i];
  return v;
}

// jets of the logistic sigmoid s(x) = e^x/(1+e^x), written in terms of
// t = tanh(x/2) and s(1-s) so the tails do not underflow by cancellation:
//   s' = s(1-s), 1-2s = -t, 1-6s+6s^2 = 1-6s', 1-12s+12s^2 = 1-12s'
inline jet4 sigmoid_jet(double x) {
  double e = std::exp(-std::abs(x));
  double s1 = e / ((1.0 + e) * (1.0 + e));
  double t = std::tanh(0.5 * x);
  double s = 0.5 * (1.0 + t);
  double s2 = -s1 * t;
  double s3 = s1 * (1.0 - 6.0 * s1);
  double s4 = -s1 * t * (1.0 - 12.0 * s1);
  return {s, s1, s2, s3, s4};
}

}  // namespace detail

// Convex function on [0,1]: u(p) = p log p + (1-p) log(1-p) + f(p) with
// f a polynomial correction of degree <= 12 (coefficients c_0..c_12,
// degree-0 term = the flat direction).
class symplectic_potential {
public:
  static constexpr int max_degree = 12;

  symplectic_potential() : coeffs_{} { build(); }

  explicit symplectic_potential(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() > max_degree + 1)
      throw contract_error("symplectic_potential: correction degree exceeds 12");
    build();
    validate();
  }

  static symplectic_potential fubini_study() { return symplectic_potential(); }

  const std::vector<double>& coeffs() const { return coeffs_; }

  // f(p) and derivatives to 4th order
  void f_jet(double p, double out[5]) const {
    out[0] = detail::poly_eval(coeffs_, p);
    out[1] = detail::poly_eval(d1_, p);
    out[2] = detail::poly_eval(d2_, p);
    out[3] = detail::poly_eval(d3_, p);
    out[4] = detail::poly_eval(d4_, p);
  }

  // u(p) and derivatives to 4th order.  The (p, q=1-p) pair is taken
  // explicitly so that callers can keep the small coordinate accurate near
  // either end of the polytope.
  void u_jet_pq(double p, double q, double out[5]) const {
    double f[5];
    f_jet(p, f);
    double lp = p >= 0.5 ? std::log1p(-q) : std::log(p);
    double lq = q >= 0.5 ? std::log1p(-p) : std::log(q);
    out[0] = p * lp + q * lq + f[0];
    out[1] = lp - lq + f[1];
    out[2] = 1.0 / p + 1.0 / q + f[2];
    out[3] = -1.0 / (p * p) + 1.0 / (q * q) + f[3];
    out[4] = 2.0 / (p * p * p) + 2.0 / (q * q * q) + f[4];
  }

  void u_jet(double p, double out[5]) const { u_jet_pq(p, 1.0 - p, out); }

  double u(double p) const {
    double j[5];
    u_jet(p, j);
    return j[0];
  }
  double u1(double p) const { return std::log(p) - std::log1p(-p) + detail::poly_eval(d1_, p); }
  double u2(double p) const { return 1.0 / (p * (1.0 - p)) + detail::poly_eval(d2_, p); }

  // boundary values of f, needed by the closed K-energy formula
  double f_at(double p) const { return detail::poly_eval(coeffs_, p); }

  // scalar curvature S(p) = -(1/u'')'' assembled so that the corner poles
  // cancel exactly:
  //   S = [2 + 2 f'' (p^3+q^3) + 4 f''' pq(q-p) + f'''' (pq)^2
  //        + (f'' f'''' - 2 f'''^2)(pq)^3] / (1 + pq f'')^3
  double scalar_curvature(double p) const {
    double q = 1.0 - p, pq = p * q;
    double f[5];
    f_jet(p, f);
    double num = 2.0 + 2.0 * f[2] * (p * p * p + q * q * q) + 4.0 * f[3] * pq * (q - p) +
                 f[4] * pq * pq + (f[2] * f[4] - 2.0 * f[3] * f[3]) * pq * pq * pq;
    double den = 1.0 + pq * f[2];
    return num / (den * den * den);
  }

  void validate() const {
    const int n = 2049;
    for (int i = 1; i <= n; ++i) {
      double p = double(i) / double(n + 1);
      if (!(u2(p) > 0.0)) {
        std::ostringstream os;
        os << "symplectic_potential: u'' <= 0 at p=" << p << " for coeffs [";
        for (std::size_t m = 0; m < coeffs_.size(); ++m)
          os << (m ? "," : "") << coeffs_[m];
        os << "]";
        throw domain_error(os.str(), u2(p));
      }
      double f[5];
      f_jet(p, f);
      for (int d = 0; d <= 4; ++d)
        if (std::abs(f[d]) > 1e3)
          throw domain_error("symplectic_potential: C^4 norm of correction exceeds 1e3",
                             f[d]);
    }
  }

  bool operator==(const symplectic_potential& o) const { return coeffs_ == o.coeffs_; }

private:
  void build() {
    d1_ = detail::poly_derivative(coeffs_);
    d2_ = detail::poly_derivative(d1_);
    d3_ = detail::poly_derivative(d2_);
    d4_ = detail::poly_derivative(d3_);
  }

  std::vector<double> coeffs_;
  std::vector<double> d1_, d2_, d3_, d4_;
};

// S^1-invariant Kahler potential in log coordinates: carries the full
// convex function psi(x) with four derivatives; phi = psi - log(1+e^x).
class invariant_potential {
public:
  struct impl {
    virtual ~impl() = default;
    virtual jet4 psi_jet(double x) const = 0;
    // inverse of the moment map psi': generic Newton, overridden where exact
    virtual double x_of_p(double p) const;
    virtual const symplectic_potential* generator() const { return nullptr; }
  };

  explicit invariant_potential(std::shared_ptr<const impl> i) : impl_(std::move(i)) {}

  jet4 psi_jet(double x) const { return impl_->psi_jet(x); }
  double psi(double x) const { return impl_->psi_jet(x)[0]; }
  double psi2(double x) const { return impl_->psi_jet(x)[2]; }
  double moment(double x) const { return impl_->psi_jet(x)[1]; }
  double x_of_p(double p) const { return impl_->x_of_p(p); }

  static double psi_fs(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

  double phi(double x) const { return psi(x) - psi_fs(x); }

  // scalar curvature in x-coordinates: (psi'''^2 - psi'''' psi'') / psi''^3
  double scalar_curvature_x(double x) const {
    jet4 j = psi_jet(x);
    return (j[3] * j[3] - j[4] * j[2]) / (j[2] * j[2] * j[2]);
  }

  const symplectic_potential* generator() const { return impl_->generator(); }
  std::shared_ptr<const impl> shared_impl() const { return impl_; }

private:
  std::shared_ptr<const impl> impl_;
};

inline double invariant_potential::impl::x_of_p(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw contract_error("x_of_p: p must lie in (0,1)");
  double x = std::log(p) - std::log1p(-p);
  double lo = x, hi = x;
  double step = 1.0;
  while (psi_jet(lo)[1] > p) { lo -= step; step *= 2; }
  step = 1.0;
  while (psi_jet(hi)[1] < p) { hi += step; step *= 2; }
  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    jet4 j = psi_jet(x);
    double r = j[1] - p;
    if (r > 0) hi = x; else lo = x;
    double dx = r / j[2];
    double xn = x - dx;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(x))) { x = xn; break; }
    x = xn;
  }
  return x;
}

namespace detail {

struct fs_impl final : invariant_potential::impl {
  jet4 psi_jet(double x) const override {
    jet4 s = sigmoid_jet(x);
    return {invariant_potential::psi_fs(x), s[0], s[1], s[2], s[3]};
  }
  double x_of_p(double p) const override { return std::log(p) - std::log1p(-p); }
};

struct legendre_impl final : invariant_potential::impl {
  explicit legendre_impl(symplectic_potential u) : u_(std::move(u)) {}

  // Solve u'(p) = x.  Newton runs in whichever of p, q = 1-p is below 1/2,
  // with a geometric-bisection fallback, so moment values exponentially
  // close to the polytope corners stay representable.
  std::pair<double, double> pq_of_x(double x) const {
    double fmid[5];
    u_.f_jet(0.5, fmid);
    bool upper = x >= fmid[1];  // u'(1/2) = f'(1/2)
    // small coordinate: v = p on the lower branch, v = q on the upper one
    auto residual = [&](double v) {
      double p = upper ? 1.0 - v : v;
      double q = upper ? v : 1.0 - v;
      double uj[5];
      u_.u_jet_pq(p, q, uj);
      return std::pair<double, double>(uj[1] - x, uj[2]);
    };
    double ax = std::abs(x);
    double v = std::exp(-ax) / (1.0 + std::exp(-ax));  // FS seed for the small side
    v = std::min(std::max(v, 1e-290), 0.5);
    double lo = 1e-300, hi = 0.5;
    for (int it = 0; it < 120; ++it) {
      auto [r, u2] = residual(v);
      double signed_r = upper ? -r : r;  // residual increases with v on both branches
      if (signed_r > 0) hi = v; else lo = v;
      double vn = v - (upper ? -r : r) / u2;
      if (!(vn > lo && vn < hi)) vn = std::sqrt(lo * hi);
      if (std::abs(vn - v) <= 1e-16 * v) { v = vn; break; }
      v = vn;
    }
    double p = upper ? 1.0 - v : v;
    double q = upper ? v : 1.0 - v;
    return {p, q};
  }

  jet4 psi_jet(double x) const override {
    auto [p, q] = pq_of_x(x);
    double uj[5];
    u_.u_jet_pq(p, q, uj);
    double w = 1.0 / uj[2];  // psi''
    double psi = x * p - uj[0];
    double psi3 = -uj[3] * w * w * w;
    double psi4 = -uj[4] * w * w * w * w + 3.0 * uj[3] * uj[3] * w * w * w * w * w;
    return {psi, p, w, psi3, psi4};
  }

  double x_of_p(double p) const override { return u_.u1(p); }
  const symplectic_potential* generator() const override { return &u_; }

  symplectic_potential u_;
};

struct blend_impl final : invariant_potential::impl {
  std::vector<std::pair<double, std::shared_ptr<const invariant_potential::impl>>> terms;
  double constant = 0.0;

  jet4 psi_jet(double x) const override {
    jet4 j{constant, 0, 0, 0, 0};
    for (const auto& [w, p] : terms) j = j + w * p->psi_jet(x);
    return j;
  }
};

}  // namespace detail

inline invariant_potential fs_potential() {
  static const auto shared = std::make_shared<const detail::fs_impl>();
  return invariant_potential(shared);
}

// Legendre transform: psi(x) = sup_p (xp - u(p)).
inline invariant_potential legendre(const symplectic_potential& u) {
  return invariant_potential(std::make_shared<const detail::legendre_impl>(u));
}

// Inverse transform u(p) = sup_x (px - psi(x)), for round-trip checks.
inline double inverse_legendre(const invariant_potential& phi, double p) {
  double x = phi.x_of_p(p);
  return p * x - phi.psi(x);
}

// psi = c + sum w_i psi_i
inline invariant_potential blend(std::vector<std::pair<double, invariant_potential>> terms,
                                 double constant = 0.0) {
  auto b = std::make_shared<detail::blend_impl>();
  b->constant = constant;
  for (auto& [w, p] : terms) b->terms.emplace_back(w, p.shared_impl());
  return invariant_potential(std::move(b));
}

// Scalar test/variation function of x carrying derivatives up to `order`.
struct scalar_field {
  int order = 0;  // how many of d1..d4 are valid
  std::function<jet4(double)> jet;

  double operator()(double x) const { return jet(x)[0]; }
  double d1(double x) const { return jet(x)[1]; }
  double d2(double x) const { return jet(x)[2]; }

  static scalar_field constant(double c) {
    return {4, [c](double) { return jet4{c, 0, 0, 0, 0}; }};
  }

  // polynomial in the logistic sigmoid: q(s(x)); jets by Faa di Bruno
  static scalar_field sigmoid_poly(std::vector<double> q) {
    auto q1 = detail::poly_derivative(q);
    auto q2 = detail::poly_derivative(q1);
    auto q3 = detail::poly_derivative(q2);
    auto q4 = detail::poly_derivative(q3);
    return {4, [q, q1, q2, q3, q4](double x) {
              jet4 s = detail::sigmoid_jet(x);
              double a1 = detail::poly_eval(q1, s[0]);
              double a2 = detail::poly_eval(q2, s[0]);
              double a3 = detail::poly_eval(q3, s[0]);
              double a4 = detail::poly_eval(q4, s[0]);
              double h0 = detail::poly_eval(q, s[0]);
              double h1 = a1 * s[1];
              double h2 = a2 * s[1] * s[1] + a1 * s[2];
              double h3 = a3 * s[1] * s[1] * s[1] + 3.0 * a2 * s[1] * s[2] + a1 * s[3];
              double h4 = a4 * s[1] * s[1] * s[1] * s[1] + 6.0 * a3 * s[1] * s[1] * s[2] +
                          a2 * (3.0 * s[2] * s[2] + 4.0 * s[1] * s[3]) + a1 * s[4];
              return jet4{h0, h1, h2, h3, h4};
            }};
  }

  // psi_a - psi_b as a function of x (e.g. the velocity of a linear path)
  static scalar_field difference(const invariant_potential& a, const invariant_potential& b) {
    auto ia = a.shared_impl(), ib = b.shared_impl();
    return {4, [ia, ib](double x) { return ia->psi_jet(x) + (-1.0) * ib->psi_jet(x); }};
  }

  // g(p(x)) for polynomial g and the moment map of `pot`; order 3
  static scalar_field compose_moment(std::vector<double> g, const invariant_potential& pot) {
    auto g1 = detail::poly_derivative(g);
    auto g2 = detail::poly_derivative(g1);
    auto g3 = detail::poly_derivative(g2);
    auto ip = pot.shared_impl();
    return {3, [g, g1, g2, g3, ip](double x) {
              jet4 j = ip->psi_jet(x);
              double p = j[1];
              double a0 = detail::poly_eval(g, p);
              double a1 = detail::poly_eval(g1, p);
              double a2 = detail::poly_eval(g2, p);
              double a3 = detail::poly_eval(g3, p);
              double h1 = a1 * j[2];
              double h2 = a2 * j[2] * j[2] + a1 * j[3];
              double h3 = a3 * j[2] * j[2] * j[2] + 3.0 * a2 * j[2] * j[3] + a1 * j[4];
              return jet4{a0, h1, h2, h3, 0.0};
            }};
  }

  // g'(p(x))^2 psi''(x) -- the acceleration of an exact toric geodesic; order 2
  static scalar_field geodesic_accel(std::vector<double> g, const invariant_potential& pot) {
    auto g1 = detail::poly_derivative(g);
    auto g2 = detail::poly_derivative(g1);
    auto g3 = detail::poly_derivative(g2);
    auto ip = pot.shared_impl();
    return {2, [g1, g2, g3, ip](double x) {
              jet4 j = ip->psi_jet(x);
              double p = j[1];
              double a1 = detail::poly_eval(g1, p);
              double a2 = detail::poly_eval(g2, p);
              double a3 = detail::poly_eval(g3, p);
              double v = a1 * a1 * j[2];
              double d1 = 2.0 * a1 * a2 * j[2] * j[2] + a1 * a1 * j[3];
              double d2 = 2.0 * (a2 * a2 + a1 * a3) * j[2] * j[2] * j[2] +
                          6.0 * a1 * a2 * j[2] * j[3] + a1 * a1 * j[4];
              return jet4{v, d1, d2, 0.0, 0.0};
            }};
  }

  static scalar_field scaled(const scalar_field& f, double s) {
    auto j = f.jet;
    return {f.order, [j, s](double x) { return s * j(x); }};
  }

  static scalar_field sum(const scalar_field& a, const scalar_field& b) {
    auto ja = a.jet, jb = b.jet;
    return {std::min(a.order, b.order), [ja, jb](double x) { return ja(x) + jb(x); }};
  }
};

// base potential + h * field (field must carry full 4-jets)
inline invariant_potential perturb(const invariant_potential& base, const scalar_field& f,
                                   double h) {
  if (f.order < 4) throw contract_error("perturb: field must provide 4 derivatives");
  struct perturbed_impl final : invariant_potential::impl {
    std::shared_ptr<const invariant_potential::impl> base;
    scalar_field field;
    double h;
    jet4 psi_jet(double x) const override { return base->psi_jet(x) + h * field.jet(x); }
  };
  auto p = std::make_shared<perturbed_impl>();
  p->base = base.shared_impl();
  p->field = f;
  p->h = h;
  return invariant_potential(std::move(p));
}

}  // namespace kq::toric
