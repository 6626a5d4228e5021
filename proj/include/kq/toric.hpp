#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "kq/finite_diff.hpp"
#include "kq/potential.hpp"
#include "kq/quadrature.hpp"

namespace kq::toric {

using numerics::integrate;
using numerics::integrate_line;
using numerics::quad_result;
using numerics::quadrature_spec;

inline quadrature_spec line_spec() { return {numerics::quad_rule::gauss_legendre_composite, 1e-11, 4096}; }
inline quadrature_spec p_spec() { return {numerics::quad_rule::gauss_legendre_composite, 1e-12, 4096}; }

// volume density w(x) = psi''(x); integrates to 1 over the line
inline std::function<double(double)> volume_density(const invariant_potential& phi) {
  return [phi](double x) { return phi.psi2(x); };
}

inline double volume_mass(const invariant_potential& phi) {
  return integrate_line([&](double x) { return phi.psi2(x); }, line_spec()).value;
}

// \int g dmu_phi over the line
template <class G>
double integral_dmu(const invariant_potential& phi, const G& g) {
  return integrate_line([&](double x) { return g(x) * phi.psi2(x); }, line_spec()).value;
}

// S(p) on (0,1); the mean over the polytope is the topological constant 2
inline std::function<double(double)> scalar_curvature(const symplectic_potential& u) {
  return [u](double p) { return u.scalar_curvature(p); };
}

inline double scalar_curvature_mean(const symplectic_potential& u) {
  return integrate([&](double p) { return u.scalar_curvature(p); }, 0.0, 1.0, p_spec()).value;
}

// Laplacian of g w.r.t. omega_phi: g''(x)/psi''(x)
inline std::function<double(double)> laplacian(const invariant_potential& phi,
                                               const scalar_field& g) {
  if (g.order < 2) throw contract_error("laplacian: field must provide 2 derivatives");
  auto ip = phi.shared_impl();
  auto gj = g.jet;
  return [ip, gj](double x) { return gj(x)[2] / ip->psi_jet(x)[2]; };
}

// |grad g|^2_phi = g'(x)^2 / psi''(x)
inline std::function<double(double)> grad_norm_sq(const invariant_potential& phi,
                                                  const scalar_field& g) {
  if (g.order < 1) throw contract_error("grad_norm_sq: field must provide 1 derivative");
  auto ip = phi.shared_impl();
  auto gj = g.jet;
  return [ip, gj](double x) {
    double d = gj(x)[1];
    return d * d / ip->psi_jet(x)[2];
  };
}

// --- geodesics -------------------------------------------------------------

// The segment between u0 and u1 is linear on the symplectic side:
// u_t = (1-t) u0 + t u1, and phi_dot(t,x) = (u0 - u1)(p_t(x)).
struct h_geodesic_point {
  invariant_potential potential;
  scalar_field phi_dot;
  scalar_field phi_ddot;
};

inline std::vector<double> coeff_difference(const symplectic_potential& a,
                                            const symplectic_potential& b) {
  std::vector<double> d(std::max(a.coeffs().size(), b.coeffs().size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) d[i] += a.coeffs()[i];
  for (std::size_t i = 0; i < b.coeffs().size(); ++i) d[i] -= b.coeffs()[i];
  return d;
}

inline symplectic_potential interpolate(const symplectic_potential& u0,
                                        const symplectic_potential& u1, double t) {
  std::vector<double> c(std::max(u0.coeffs().size(), u1.coeffs().size()), 0.0);
  for (std::size_t i = 0; i < u0.coeffs().size(); ++i) c[i] += (1.0 - t) * u0.coeffs()[i];
  for (std::size_t i = 0; i < u1.coeffs().size(); ++i) c[i] += t * u1.coeffs()[i];
  return symplectic_potential(c);
}

inline h_geodesic_point h_geodesic(const symplectic_potential& u0,
                                   const symplectic_potential& u1, double t) {
  if (t < 0.0 || t > 1.0) throw contract_error("h_geodesic: t must lie in [0,1]");
  invariant_potential pot = legendre(interpolate(u0, u1, t));
  std::vector<double> g = coeff_difference(u0, u1);
  return {pot, scalar_field::compose_moment(g, pot), scalar_field::geodesic_accel(g, pot)};
}

// d_H(u0,u1) = sqrt(\int_0^1 (u1-u0)^2 dp); the geodesic has constant speed.
inline double h_distance(const symplectic_potential& u0, const symplectic_potential& u1) {
  std::vector<double> g = coeff_difference(u0, u1);
  double v = integrate([&](double p) {
    double d = detail::poly_eval(g, p);
    return d * d;
  }, 0.0, 1.0, p_spec()).value;
  return std::sqrt(v);
}

// Sampled one-parameter family of potentials with velocities; acceleration
// fields are optional (finite differences of phi_dot otherwise).
struct path_in_h {
  std::vector<double> times;
  std::vector<invariant_potential> potentials;
  std::vector<scalar_field> phi_dot;
  std::vector<scalar_field> phi_ddot;  // may be empty

  std::size_t size() const { return times.size(); }
};

inline path_in_h sample_h_geodesic(const symplectic_potential& u0,
                                   const symplectic_potential& u1, std::size_t n = 33) {
  path_in_h p;
  for (std::size_t i = 0; i < n; ++i) {
    double t = double(i) / double(n - 1);
    h_geodesic_point pt = h_geodesic(u0, u1, t);
    p.times.push_back(t);
    p.potentials.push_back(pt.potential);
    p.phi_dot.push_back(pt.phi_dot);
    p.phi_ddot.push_back(pt.phi_ddot);
  }
  return p;
}

// Linear path in phi: psi_t = (1-t) psi_0 + t psi_1; phi_dot is constant in
// t and phi_ddot vanishes.
inline path_in_h sample_linear_path(const invariant_potential& p0,
                                    const invariant_potential& p1, std::size_t n = 33) {
  path_in_h p;
  scalar_field vel = scalar_field::difference(p1, p0);
  for (std::size_t i = 0; i < n; ++i) {
    double t = double(i) / double(n - 1);
    p.times.push_back(t);
    p.potentials.push_back(blend({{1.0 - t, p0}, {t, p1}}));
    p.phi_dot.push_back(vel);
    p.phi_ddot.push_back(scalar_field::constant(0.0));
  }
  return p;
}

// sup over the time grid and a 2049-point x-grid of the geodesic-equation
// residual density |(phi_dd - |grad phi_d|^2) psi'' / psi_FS''|.
inline double geodesic_residual(const path_in_h& path, std::size_t x_grid = 2049) {
  if (path.size() < 5) throw contract_error("geodesic_residual: need at least 5 samples");
  const bool have_ddot = path.phi_ddot.size() == path.size();
  double sup = 0.0;
  for (std::size_t ix = 0; ix < x_grid; ++ix) {
    double q = double(ix + 1) / double(x_grid + 1);
    double x = std::log(q) - std::log1p(-q);
    double wfs = detail::sigmoid_jet(x)[1];
    std::vector<double> dots(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) dots[i] = path.phi_dot[i](x);
    for (std::size_t i = 0; i < path.size(); ++i) {
      jet4 j = path.potentials[i].psi_jet(x);
      double dd;
      if (have_ddot) {
        dd = path.phi_ddot[i].jet(x)[0];
      } else {
        numerics::sampled_path<double> sp{path.times, dots};
        dd = numerics::fd_derivative_at(sp, 1, i);
      }
      double d1 = path.phi_dot[i].d1(x);
      double resid = dd - d1 * d1 / j[2];
      sup = std::max(sup, std::abs(resid * j[2] / wfs));
    }
  }
  return sup;
}

// --- functionals -----------------------------------------------------------

// I with I(FS) = 0, via the path integral of delta I = \int delta phi dmu
// along s |-> s*phi with a 17-node Gauss rule (the integrand is linear in s,
// so the rule is exact).
inline double i_functional(const invariant_potential& phi) {
  const numerics::gauss_rule& g = numerics::gauss_legendre(17);
  invariant_potential fs = fs_potential();
  double acc = 0.0;
  for (int i = 0; i < 17; ++i) {
    double s = 0.5 + 0.5 * g.nodes[static_cast<std::size_t>(i)];
    invariant_potential ps = blend({{1.0 - s, fs}, {s, phi}});
    double inner = integrate_line(
        [&](double x) { return phi.phi(x) * ps.psi2(x); }, line_spec()).value;
    acc += 0.5 * g.weights[static_cast<std::size_t>(i)] * inner;
  }
  return acc;
}

// K-energy with E(FS) = 0, via the path integral of
// delta E = -\int (S - 2) delta phi dmu along s |-> s*phi (17-node Gauss).
inline double k_energy(const invariant_potential& phi) {
  const numerics::gauss_rule& g = numerics::gauss_legendre(17);
  invariant_potential fs = fs_potential();
  double acc = 0.0;
  for (int i = 0; i < 17; ++i) {
    double s = 0.5 + 0.5 * g.nodes[static_cast<std::size_t>(i)];
    invariant_potential ps = blend({{1.0 - s, fs}, {s, phi}});
    double inner = integrate_line(
        [&](double x) {
          return -(ps.scalar_curvature_x(x) - 2.0) * phi.phi(x) * ps.psi2(x);
        },
        line_spec()).value;
    acc += 0.5 * g.weights[static_cast<std::size_t>(i)] * inner;
  }
  return acc;
}

// Closed toric form of the K-energy (independent route):
//   E(u) = -\int_0^1 log(1 + pq f'') dp + f(0) + f(1) - 2 \int_0^1 f dp.
inline double k_energy_closed(const symplectic_potential& u) {
  double logpart = integrate([&](double p) {
    double f[5];
    u.f_jet(p, f);
    return std::log1p(p * (1.0 - p) * f[2]);
  }, 0.0, 1.0, p_spec()).value;
  double intf = integrate([&](double p) { return u.f_at(p); }, 0.0, 1.0, p_spec()).value;
  return -logpart + u.f_at(0.0) + u.f_at(1.0) - 2.0 * intf;
}

// Ca = \int (S - 2)^2 dmu.  Exact p-route when the potential has a
// symplectic generator, x-route otherwise.
inline double calabi_energy(const invariant_potential& phi) {
  if (const symplectic_potential* u = phi.generator()) {
    return integrate([&](double p) {
      double d = u->scalar_curvature(p) - 2.0;
      return d * d;
    }, 0.0, 1.0, p_spec()).value;
  }
  return integrate_line([&](double x) {
    double d = phi.scalar_curvature_x(x) - 2.0;
    return d * d * phi.psi2(x);
  }, line_spec()).value;
}

inline double calabi_energy(const symplectic_potential& u) {
  return calabi_energy(legendre(u));
}

// dE_phi(delta phi) = -\int (S - 2) delta phi dmu_phi
inline double k_energy_diff(const invariant_potential& phi, const scalar_field& dphi) {
  if (const symplectic_potential* u = phi.generator()) {
    return integrate([&](double p) {
      double x = u->u1(p);
      return -(u->scalar_curvature(p) - 2.0) * dphi(x);
    }, 0.0, 1.0, p_spec()).value;
  }
  return integrate_line([&](double x) {
    return -(phi.scalar_curvature_x(x) - 2.0) * dphi(x) * phi.psi2(x);
  }, line_spec()).value;
}

}  // namespace kq::toric
