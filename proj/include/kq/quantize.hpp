#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "kq/symspace.hpp"
#include "kq/toric.hpp"

namespace kq::quantize {

using numerics::real_vector;
using symspace::hermitian_form;
using symspace::tangent_form;
using toric::invariant_potential;
using toric::scalar_field;
using toric::symplectic_potential;

// Level-k data on CP^1 polarized by O(1): sections are the monomials
// z^j, j = 0..k, with fiber weight e^{jx - k psi(x)}; N_k = d_k = k+1.
struct quant_level {
  int k;
  explicit quant_level(int kk) : k(kk) {
    if (k < 1) throw contract_error("quant_level: k must be >= 1");
  }
  int sections() const { return k + 1; }
  double dk() const { return double(k) + 1.0; }
};

inline numerics::quadrature_spec hilb_spec() {
  return {numerics::quad_rule::gauss_legendre_composite, 1e-12, 8192};
}

namespace detail {

// log of the (diagonal) Hilb entries.  The exponent is shifted by its
// supremum so the integrand stays in [0, O(1)] for any k and any flat
// offset; the integrals are done on the polytope side (exact moment-map
// substitution) when the potential has a symplectic generator, and through
// the logistic pullback otherwise.
inline real_vector hilb_log_impl(const invariant_potential& phi, int k) {
  real_vector out(k + 1);
  if (const symplectic_potential* u = phi.generator()) {
    for (int j = 0; j <= k; ++j) {
      auto g = [&](double p) {
        double uj[5];
        u->u_jet(p, uj);
        return (double(j) - k * p) * uj[1] + k * uj[0];
      };
      double m;
      if (j == 0) m = k * u->f_at(0.0);
      else if (j == k) m = k * u->f_at(1.0);
      else m = g(double(j) / double(k));
      double v = numerics::integrate(
          [&](double p) { return std::exp(g(p) - m); }, 0.0, 1.0, hilb_spec()).value;
      out[j] = m + std::log(v);
    }
    return out;
  }
  for (int j = 0; j <= k; ++j) {
    auto expo = [&](double x) { return double(j) * x - double(k) * phi.psi(x); };
    double m = std::max(expo(-40.0), expo(40.0));
    if (j > 0 && j < k) m = std::max(m, expo(phi.x_of_p(double(j) / double(k))));
    double v = numerics::integrate_line(
        [&](double x) { return std::exp(expo(x) - m) * phi.psi2(x); }, hilb_spec()).value;
    out[j] = m + std::log(v);
  }
  return out;
}

}  // namespace detail

inline real_vector hilb_log(const invariant_potential& phi, const quant_level& lv) {
  return detail::hilb_log_impl(phi, lv.k);
}

// Hilb_k(phi): diagonal in the monomial basis for invariant potentials
// (the angular integral kills every off-diagonal entry).
inline hermitian_form hilb(const invariant_potential& phi, const quant_level& lv) {
  real_vector lg = hilb_log(phi, lv);
  real_vector d(lg.size());
  for (Eigen::Index i = 0; i < lg.size(); ++i) d[i] = std::exp(lg[i]);
  return hermitian_form::from_diagonal(d);
}

// exact log Hilb entries of the Fubini-Study potential: Beta(j+1, k-j+1)
inline double fs_hilb_log_entry(int k, int j) {
  return std::lgamma(j + 1.0) + std::lgamma(k - j + 1.0) - std::lgamma(k + 2.0);
}

namespace detail {

struct bergman_impl final : invariant_potential::impl {
  int k;
  real_vector log_diag;  // log H_jj

  toric::jet4 psi_jet(double x) const override {
    const int n = static_cast<int>(log_diag.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) mx = std::max(mx, j * x - log_diag[j]);
    double sw = 0.0, sj = 0.0;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      w[static_cast<std::size_t>(j)] = std::exp(j * x - log_diag[j] - mx);
      sw += w[static_cast<std::size_t>(j)];
      sj += j * w[static_cast<std::size_t>(j)];
    }
    double mu = sj / sw;
    double m2 = 0, m3 = 0, m4 = 0;
    for (int j = 0; j < n; ++j) {
      double d = j - mu, ww = w[static_cast<std::size_t>(j)] / sw;
      m2 += ww * d * d;
      m3 += ww * d * d * d;
      m4 += ww * d * d * d * d;
    }
    double kk = k;
    return {(mx + std::log(sw)) / kk, mu / kk, m2 / kk, m3 / kk, (m4 - 3.0 * m2 * m2) / kk};
  }
};

// For non-diagonal input: eigen-decompose and insist the frame aligns with
// the monomial grading (a permutation-free unitary close to identity).
inline real_vector graded_log_diagonal(const hermitian_form& h) {
  if (h.is_diagonal()) {
    real_vector d = h.diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::log(d[i]);
    return d;
  }
  numerics::eig_result e = numerics::pd_eig(h.matrix());
  const Eigen::Index n = h.dim();
  real_vector lg(n);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index row;
    e.frame.col(c).cwiseAbs().maxCoeff(&row);
    if (used[static_cast<std::size_t>(row)])
      throw contract_error("fs: non-diagonal form does not align with the monomial grading");
    used[static_cast<std::size_t>(row)] = true;
    lg[row] = std::log(e.eigenvalues[c]);
  }
  return lg;
}

}  // namespace detail

// FS_k(H): psi(x) = (1/k) log sum_j e^{jx}/H_jj.  The induced potential
// satisfies sum_j |s_j|^2 e^{-k psi} = 1 identically by construction.
inline invariant_potential fs(const hermitian_form& h, const quant_level& lv) {
  if (h.dim() != lv.sections()) throw contract_error("fs: dimension does not match level");
  auto b = std::make_shared<detail::bergman_impl>();
  b->k = lv.k;
  b->log_diag = detail::graded_log_diagonal(h);
  return invariant_potential(std::move(b));
}

inline invariant_potential fs_from_log(const real_vector& log_diag, const quant_level& lv) {
  if (log_diag.size() != lv.sections()) throw contract_error("fs: dimension does not match level");
  auto b = std::make_shared<detail::bergman_impl>();
  b->k = lv.k;
  b->log_diag = log_diag;
  return invariant_potential(std::move(b));
}

// Density of states rho_k(phi) = sum_j |s_j|^2_{h^k} / H_jj, with
// H = Hilb_k(phi); integrates to d_k against dmu_phi.
class bergman_density {
public:
  bergman_density(const invariant_potential& phi, const quant_level& lv)
      : phi_(phi), lv_(lv), log_diag_(hilb_log(phi, lv)) {}

  const quant_level& level() const { return lv_; }

  double log_value(double x) const {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < log_diag_.size(); ++j)
      mx = std::max(mx, j * x - log_diag_[j]);
    double sw = 0.0;
    for (Eigen::Index j = 0; j < log_diag_.size(); ++j)
      sw += std::exp(j * x - log_diag_[j] - mx);
    return mx + std::log(sw) - lv_.k * phi_.psi(x);
  }

  double operator()(double x) const { return std::exp(log_value(x)); }

  // rho, rho', rho'' (for the Delta rho - k rho variation formula)
  std::array<double, 3> jet(double x) const {
    double mx = -std::numeric_limits<double>::infinity();
    const Eigen::Index n = log_diag_.size();
    for (Eigen::Index j = 0; j < n; ++j) mx = std::max(mx, j * x - log_diag_[j]);
    double sw = 0, sj = 0;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      w[static_cast<std::size_t>(j)] = std::exp(j * x - log_diag_[j] - mx);
      sw += w[static_cast<std::size_t>(j)];
      sj += double(j) * w[static_cast<std::size_t>(j)];
    }
    double mu = sj / sw, var = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = double(j) - mu;
      var += (w[static_cast<std::size_t>(j)] / sw) * d * d;
    }
    toric::jet4 pj = phi_.psi_jet(x);
    double rho = std::exp(mx + std::log(sw) - lv_.k * pj[0]);
    double l1 = mu - lv_.k * pj[1];
    double l2 = var - lv_.k * pj[2];
    return {rho, rho * l1, rho * (l1 * l1 + l2)};
  }

  double mass() const {
    return toric::integral_dmu(phi_, [&](double x) { return (*this)(x); });
  }

private:
  invariant_potential phi_;
  quant_level lv_;
  real_vector log_diag_;
};

namespace detail {

// Ratios r_j = dH_jj / H_jj for the variation dHilb(dphi)(s_j, s_j) =
// \int |s_j|^2 (-k dphi + Lap dphi) dmu; shared shift cancels in the ratio.
inline real_vector d_hilb_ratio_impl(const invariant_potential& phi, int k,
                                     const scalar_field& dphi) {
  if (dphi.order < 2) throw contract_error("d_hilb: variation must provide 2 derivatives");
  real_vector r(k + 1);
  if (const symplectic_potential* u = phi.generator()) {
    for (int j = 0; j <= k; ++j) {
      auto g = [&](double p) {
        double uj[5];
        u->u_jet(p, uj);
        return (double(j) - k * p) * uj[1] + k * uj[0];
      };
      double m;
      if (j == 0) m = k * u->f_at(0.0);
      else if (j == k) m = k * u->f_at(1.0);
      else m = g(double(j) / double(k));
      double den = numerics::integrate(
          [&](double p) { return std::exp(g(p) - m); }, 0.0, 1.0, hilb_spec()).value;
      double num = numerics::integrate(
          [&](double p) {
            double x = u->u1(p);
            toric::jet4 dj = dphi.jet(x);
            return std::exp(g(p) - m) * (-double(k) * dj[0] + dj[2] * u->u2(p));
          }, 0.0, 1.0, hilb_spec()).value;
      r[j] = num / den;
    }
    return r;
  }
  for (int j = 0; j <= k; ++j) {
    auto expo = [&](double x) { return double(j) * x - double(k) * phi.psi(x); };
    double m = std::max(expo(-40.0), expo(40.0));
    if (j > 0 && j < k) m = std::max(m, expo(phi.x_of_p(double(j) / double(k))));
    double den = numerics::integrate_line(
        [&](double x) { return std::exp(expo(x) - m) * phi.psi2(x); }, hilb_spec()).value;
    double num = numerics::integrate_line(
        [&](double x) {
          toric::jet4 dj = dphi.jet(x);
          toric::jet4 pj = phi.psi_jet(x);
          return std::exp(expo(x) - m) * (-double(k) * dj[0] * pj[2] + dj[2]);
        }, hilb_spec()).value;
    r[j] = num / den;
  }
  return r;
}

}  // namespace detail

inline real_vector d_hilb_ratio(const invariant_potential& phi, const quant_level& lv,
                                const scalar_field& dphi) {
  return detail::d_hilb_ratio_impl(phi, lv.k, dphi);
}

// Tangent map of Hilb_k in the monomial frame (diagonal for invariant data).
inline tangent_form d_hilb(const invariant_potential& phi, const quant_level& lv,
                           const scalar_field& dphi) {
  real_vector r = d_hilb_ratio(phi, lv, dphi);
  real_vector lg = hilb_log(phi, lv);
  real_vector d(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) d[i] = r[i] * std::exp(lg[i]);
  return tangent_form::from_diagonal(d);
}

// Tangent map of FS_k: dFS(dH)(x) = -(1/k) sum_j (dH_jj/H_jj) w_j(x) where
// w_j are the section weights of H (they sum to 1 pointwise).
inline std::function<double(double)> d_fs(const hermitian_form& h, const quant_level& lv,
                                          const tangent_form& dh) {
  if (h.dim() != lv.sections() || dh.m.rows() != h.dim())
    throw contract_error("d_fs: dimension mismatch");
  if (!h.is_diagonal() || !dh.m.isDiagonal(0.0))
    throw contract_error("d_fs: supported on the invariant (diagonal) locus only");
  real_vector lg = detail::graded_log_diagonal(h);
  real_vector g(lg.size());
  real_vector hd = h.diagonal();
  for (Eigen::Index i = 0; i < lg.size(); ++i) g[i] = dh.m.diagonal()[i].real() / hd[i];
  int k = lv.k;
  return [lg, g, k](double x) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < lg.size(); ++j) mx = std::max(mx, j * x - lg[j]);
    double sw = 0.0, sg = 0.0;
    for (Eigen::Index j = 0; j < lg.size(); ++j) {
      double w = std::exp(j * x - lg[j] - mx);
      sw += w;
      sg += g[j] * w;
    }
    return -sg / (sw * double(k));
  };
}

// I_k = log det
inline double log_det(const hermitian_form& h) {
  if (h.is_diagonal()) {
    real_vector d = h.diagonal();
    double s = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) s += std::log(d[i]);
    return s;
  }
  numerics::eig_result e = numerics::pd_eig(h.matrix());
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) s += std::log(e.eigenvalues[i]);
  return s;
}

// Shared normalization constant: raw value of both functionals at the
// Fubini-Study base point.  L_raw(FS) = sum_j log Beta(j+1, k-j+1) and
// Z_raw(Hilb_k(FS)) equals the same number because d_k = k+1 on CP^1.
inline double quant_base(const quant_level& lv) {
  double s = 0.0;
  for (int j = 0; j <= lv.k; ++j) s += fs_hilb_log_entry(lv.k, j);
  return s;
}

// L_k raw: log det Hilb_k(phi) + k d_k I(phi)   (V = 1)
inline double l_functional_raw(const invariant_potential& phi, const quant_level& lv) {
  real_vector lg = hilb_log(phi, lv);
  return lg.sum() + double(lv.k) * lv.dk() * toric::i_functional(phi);
}

// normalized: (2/k)(raw - raw at FS); converges to the K-energy
inline double l_functional(const invariant_potential& phi, const quant_level& lv) {
  return (2.0 / lv.k) * (l_functional_raw(phi, lv) - quant_base(lv));
}

// Z_k raw: k d_k I(FS_k(H)) + log det H + d_k (log V - log d_k)   (V = 1)
inline double z_functional_raw(const hermitian_form& h, const quant_level& lv) {
  return double(lv.k) * lv.dk() * toric::i_functional(fs(h, lv)) + log_det(h) -
         lv.dk() * std::log(lv.dk());
}

inline double z_functional(const hermitian_form& h, const quant_level& lv) {
  return (2.0 / lv.k) * (z_functional_raw(h, lv) - quant_base(lv));
}

inline double z_functional_from_log(const real_vector& log_diag, const quant_level& lv) {
  return (2.0 / lv.k) *
         (double(lv.k) * lv.dk() * toric::i_functional(fs_from_log(log_diag, lv)) +
          log_diag.sum() - lv.dk() * std::log(lv.dk()) - quant_base(lv));
}

// Gradient of the normalized Z_k at H, from the trace-free section-average
// matrix M_jj = \int |s_j|^2 dmu taken at FS_k(H) in an H-orthonormal frame:
//   (grad Z_k)_jj = -(2 d_k / k^n) (M_jj - 1/d_k)    (V = 1, n = 1).
// The factor 2/k^n is the one carried by the normalization that makes Z_k
// quantize the K-energy; with it, k^{n+2} |grad Z_k|^2 converges to the
// Calabi energy (the bare section-average integral converges to Ca/4).
struct z_gradient {
  real_vector frame_diag;  // entries in the H-orthonormal frame
  tangent_form ambient;    // mapped back to the monomial frame
  double norm;             // |grad Z_k|_H
};

inline z_gradient grad_z(const hermitian_form& h, const quant_level& lv) {
  real_vector lg = detail::graded_log_diagonal(h);
  invariant_potential phik = fs_from_log(lg, lv);
  real_vector lgk = hilb_log(phik, lv);
  const double dk = lv.dk();
  real_vector g(lg.size());
  real_vector amb(lg.size());
  double nrm = 0.0;
  for (Eigen::Index j = 0; j < lg.size(); ++j) {
    double m = std::exp(lgk[j] - lg[j]);
    g[j] = -(2.0 * dk / lv.k) * (m - 1.0 / dk);
    amb[j] = g[j] * std::exp(lg[j]);
    nrm += g[j] * g[j];
  }
  return {g, tangent_form::from_diagonal(amb), std::sqrt(nrm)};
}

// d/dt of the normalized Z_k along a path with velocity ratios
// r_j = Hd_jj/H_jj: (2/k) * (-d_k) * sum_j r_j (M_jj - 1/d_k).
inline double z_derivative_along(const hermitian_form& h, const quant_level& lv,
                                 const real_vector& ratios) {
  real_vector lg = detail::graded_log_diagonal(h);
  invariant_potential phik = fs_from_log(lg, lv);
  real_vector lgk = hilb_log(phik, lv);
  const double dk = lv.dk();
  double s = 0.0;
  for (Eigen::Index j = 0; j < lg.size(); ++j)
    s += ratios[j] * (std::exp(lgk[j] - lg[j]) - 1.0 / dk);
  return (2.0 / lv.k) * (-dk) * s;
}

// first variation of L_k raw: \int [Delta rho_k - k rho_k]_phi dphi dmu
inline double l_variation(const invariant_potential& phi, const quant_level& lv,
                          const scalar_field& dphi, const bergman_density& rho) {
  auto f = [&](double x) {
    std::array<double, 3> rj = rho.jet(x);
    double lap = rj[2] / phi.psi2(x);
    return lap - lv.k * rj[0];
  };
  double mean_f = toric::integral_dmu(phi, f);
  double mean_d = toric::integral_dmu(phi, [&](double x) { return dphi(x); });
  double cross = toric::integral_dmu(phi, [&](double x) { return f(x) * dphi(x); });
  return cross - mean_f * mean_d;
}

// section averages a_j = \int |s_j|^2 g dmu (H-orthonormal sections)
inline real_vector section_averages(const invariant_potential& phi, const quant_level& lv,
                                    const std::function<double(double)>& g) {
  const int k = lv.k;
  real_vector r(k + 1);
  if (const symplectic_potential* u = phi.generator()) {
    for (int j = 0; j <= k; ++j) {
      auto e = [&](double p) {
        double uj[5];
        u->u_jet(p, uj);
        return (double(j) - k * p) * uj[1] + k * uj[0];
      };
      double m;
      if (j == 0) m = k * u->f_at(0.0);
      else if (j == k) m = k * u->f_at(1.0);
      else m = e(double(j) / double(k));
      double den = numerics::integrate(
          [&](double p) { return std::exp(e(p) - m); }, 0.0, 1.0, hilb_spec()).value;
      double num = numerics::integrate(
          [&](double p) { return std::exp(e(p) - m) * g(u->u1(p)); }, 0.0, 1.0,
          hilb_spec()).value;
      r[j] = num / den;
    }
    return r;
  }
  for (int j = 0; j <= k; ++j) {
    auto expo = [&](double x) { return double(j) * x - double(k) * phi.psi(x); };
    double m = std::max(expo(-40.0), expo(40.0));
    if (j > 0 && j < k) m = std::max(m, expo(phi.x_of_p(double(j) / double(k))));
    double den = numerics::integrate_line(
        [&](double x) { return std::exp(expo(x) - m) * phi.psi2(x); }, hilb_spec()).value;
    double num = numerics::integrate_line(
        [&](double x) { return std::exp(expo(x) - m) * g(x) * phi.psi2(x); },
        hilb_spec()).value;
    r[j] = num / den;
  }
  return r;
}

}  // namespace kq::quantize
