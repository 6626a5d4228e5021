#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kq/quantize.hpp"

namespace kq::experiments {

using toric::invariant_potential;
using toric::scalar_field;
using toric::symplectic_potential;

enum class study_kind {
  distance,  // scaled Bergman distance vs the toric distance
  speed,     // scaled |Hd|^2 vs the L2 speed of the path
  accel,     // scaled covariant acceleration vs the geodesic defect
  gradient,  // k^3 |grad Z_k|^2 vs the Calabi energy
  dzdt,      // d/dt Z_k along a quantized path vs d/dt of the K-energy
  angle,     // comparison angle of a quantized triple vs the toric one
  ineq1,     // E(phi1) - E(phi0) <= d(phi0,phi1) sqrt(Ca(phi1))
  ineq2,     // dE at geodesic endpoints is monotone
  tyz,       // density-of-states remainder after k + S/2
  sandwich,  // L(FS_k Hilb_k phi) <= Z(Hilb_k phi) <= L(phi)
  iquant,    // -k^{-2} log det Hilb_k quantizes I
  zconvex,   // Z is convex along Bergman geodesics
  lemmas,    // length and endpoint-tangent bounds on near-geodesics
};

inline const char* kind_name(study_kind k) {
  switch (k) {
    case study_kind::distance: return "distance";
    case study_kind::speed: return "speed";
    case study_kind::accel: return "accel";
    case study_kind::gradient: return "gradient";
    case study_kind::dzdt: return "dzdt";
    case study_kind::angle: return "angle";
    case study_kind::ineq1: return "ineq1";
    case study_kind::ineq2: return "ineq2";
    case study_kind::tyz: return "tyz";
    case study_kind::sandwich: return "sandwich";
    case study_kind::iquant: return "iquant";
    case study_kind::zconvex: return "zconvex";
    case study_kind::lemmas: return "lemmas";
  }
  return "?";
}

inline study_kind parse_kind(const std::string& s) {
  for (study_kind k :
       {study_kind::distance, study_kind::speed, study_kind::accel, study_kind::gradient,
        study_kind::dzdt, study_kind::angle, study_kind::ineq1, study_kind::ineq2,
        study_kind::tyz, study_kind::sandwich, study_kind::iquant, study_kind::zconvex,
        study_kind::lemmas})
    if (s == kind_name(k)) return k;
  throw contract_error("unknown study kind '" + s + "'");
}

struct study_inputs {
  std::optional<symplectic_potential> u0, u1, u2;
  std::vector<int> kgrid;            // empty: per-kind default
  double t = 0.5;                    // evaluation time for path studies
  double eps = 0.05;                 // perturbation size for the lemmas study
  std::optional<double> tol;         // empty: per-kind default
  std::uint64_t seed = 0;            // for the sampled studies
  int samples = 0;                   // 0: per-kind default
};

struct report_row {
  double k;  // level, or sample index for the sampled inequality studies
  double value;
  double limit;
  double abs_err;
  double rel_err;
};

struct convergence_report {
  study_kind kind;
  std::vector<report_row> rows;
  std::optional<double> fitted_order;  // slope of log abs_err vs log k
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

namespace detail {

inline std::vector<int> default_kgrid(study_kind kind) {
  switch (kind) {
    case study_kind::tyz: return {16, 32, 64, 128, 256};
    case study_kind::sandwich:
    case study_kind::zconvex: return {8, 16, 32};
    case study_kind::ineq1:
    case study_kind::ineq2: return {};
    default: return {8, 16, 32, 64, 128};
  }
}

inline double default_tol(study_kind kind) {
  switch (kind) {
    case study_kind::distance: return 0.05;
    case study_kind::speed: return 0.1;
    case study_kind::accel: return 0.1;
    case study_kind::gradient: return 0.15;
    case study_kind::dzdt: return 0.1;
    case study_kind::angle: return 0.05;
    case study_kind::iquant: return 0.05;
    case study_kind::tyz: return 0.0;  // judged by the fitted order window
    default: return 1e-7;              // slack studies
  }
}

inline int default_samples(study_kind kind) {
  switch (kind) {
    case study_kind::sandwich: return 20;
    case study_kind::zconvex: return 50;
    case study_kind::ineq1:
    case study_kind::ineq2: return 50;
    default: return 0;
  }
}

inline symplectic_potential random_admissible(std::mt19937_64& rng, double scale = 0.4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(7, 0.0);
  for (std::size_t m = 0; m < c.size(); ++m)
    c[m] = scale * u(rng) / double((m + 1) * (m + 1));
  return symplectic_potential(c);
}

inline std::optional<double> fit_order(const std::vector<report_row>& rows) {
  std::vector<double> lx, ly;
  for (const auto& r : rows)
    if (r.abs_err > 0.0 && r.k > 0.0) {
      lx.push_back(std::log(r.k));
      ly.push_back(std::log(r.abs_err));
    }
  if (lx.size() < 4) return std::nullopt;
  double n = double(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline report_row make_row(double k, double value, double limit) {
  double abs_err = std::abs(value - limit);
  double rel_err = std::abs(limit) > 0 ? abs_err / std::abs(limit) : abs_err;
  return {k, value, limit, abs_err, rel_err};
}

inline report_row make_slack_row(double k, double slack) {
  double viol = std::max(0.0, -slack);
  return {k, slack, 0.0, viol, viol};
}

// convergence pass rule: final relative error within tolerance, errors
// non-increasing over the top half of the grid (10% noise allowed), and a
// fitted decay order of at least k^{-1/2} when a fit is possible
inline bool convergence_pass(const convergence_report& rep) {
  if (rep.rows.empty()) return false;
  if (rep.rows.back().rel_err > rep.tolerance) return false;
  std::size_t half = rep.rows.size() / 2;
  for (std::size_t i = half; i + 1 < rep.rows.size(); ++i)
    if (rep.rows[i + 1].abs_err > 1.1 * rep.rows[i].abs_err) return false;
  if (rep.fitted_order && *rep.fitted_order > -0.5) return false;
  return true;
}

inline bool slack_pass(const convergence_report& rep) {
  for (const auto& r : rep.rows)
    if (r.value < -rep.tolerance) return false;
  return !rep.rows.empty();
}

inline const symplectic_potential& need(const std::optional<symplectic_potential>& u,
                                        const char* who, const char* which) {
  if (!u) throw contract_error(std::string(who) + ": missing potential " + which);
  return *u;
}

inline void check_kgrid(const std::vector<int>& ks) {
  if (ks.empty()) throw contract_error("study: empty k-grid");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 4 || ks[i] > 256)
      throw contract_error("study: k-grid entries must lie in [4,256]");
    if (i > 0 && ks[i] <= ks[i - 1])
      throw contract_error("study: k-grid must be strictly increasing");
  }
}

inline std::size_t grid_index(double t, std::size_t n) {
  double h = 1.0 / double(n - 1);
  auto i = static_cast<std::size_t>(std::llround(t / h));
  if (i >= n || std::abs(t - double(i) * h) > 1e-12)
    throw contract_error("study: t must be a 33-point grid time");
  return i;
}

// per-row evaluation with the failing level named in the diagnostic
template <class F>
void for_each_k(const std::vector<int>& ks, F&& body) {
  for (int k : ks) {
    try {
      body(k);
    } catch (const contract_error&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("k=" + std::to_string(k) + ": " + e.what());
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline convergence_report run_study(study_kind kind, const study_inputs& in) {
  using namespace detail;
  convergence_report rep;
  rep.kind = kind;
  rep.tolerance = in.tol ? *in.tol : default_tol(kind);
  std::vector<int> ks = in.kgrid.empty() ? default_kgrid(kind) : in.kgrid;
  int samples = in.samples > 0 ? in.samples : default_samples(kind);
  std::mt19937_64 rng(in.seed);

  switch (kind) {
    case study_kind::distance: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "distance", "u0");
      const auto& u1 = need(in.u1, "distance", "u1");
      invariant_potential p0 = toric::legendre(u0), p1 = toric::legendre(u1);
      double limit = toric::h_distance(u0, u1);
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        double d = symspace::distance(quantize::hilb(p0, lv), quantize::hilb(p1, lv));
        rep.rows.push_back(make_row(k, d * std::pow(double(k), -1.5), limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = convergence_pass(rep);
      rep.note = "k^{-3/2} d_B(Hilb phi0, Hilb phi1) vs the toric distance";
      break;
    }

    case study_kind::speed: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "speed", "u0");
      const auto& u1 = need(in.u1, "speed", "u1");
      invariant_potential p0 = toric::legendre(u0), p1 = toric::legendre(u1);
      invariant_potential pt = toric::blend({{1.0 - in.t, p0}, {in.t, p1}});
      scalar_field vel = scalar_field::difference(p1, p0);
      double limit = toric::integral_dmu(pt, [&](double x) { return vel(x) * vel(x); });
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        numerics::real_vector r = quantize::d_hilb_ratio(pt, lv, vel);
        rep.rows.push_back(make_row(k, r.squaredNorm() / std::pow(double(k), 3), limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = convergence_pass(rep);
      rep.note = "linear path in phi, evaluated at t=" + std::to_string(in.t);
      break;
    }

    case study_kind::accel: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "accel", "u0");
      const auto& u1 = need(in.u1, "accel", "u1");
      invariant_potential p0 = toric::legendre(u0), p1 = toric::legendre(u1);
      const std::size_t n = 33;
      std::size_t at = grid_index(in.t, n);
      invariant_potential pt = toric::blend({{1.0 - in.t, p0}, {in.t, p1}});
      scalar_field vel = scalar_field::difference(p1, p0);
      // the linear path has phi_dd = 0, so the defect is -|grad phi_d|^2
      double limit = toric::integral_dmu(pt, [&](double x) {
        double d = vel.d1(x);
        double g = d * d / pt.psi2(x);
        return g * g;
      });
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        std::vector<numerics::complex_matrix> vals;
        for (std::size_t i = 0; i < n; ++i) {
          double s = double(i) / double(n - 1);
          vals.push_back(
              quantize::hilb(toric::blend({{1.0 - s, p0}, {s, p1}}), lv).matrix());
        }
        symspace::matrix_path path = numerics::make_uniform_path(n, vals);
        symspace::tangent_form acc = symspace::covariant_accel(path, at);
        symspace::hermitian_form h = symspace::hermitian_form::from_matrix(vals[at]);
        double a2 = symspace::inner(h, acc, acc);
        rep.rows.push_back(make_row(k, a2 / std::pow(double(k), 3), limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = convergence_pass(rep);
      rep.note = "covariant acceleration of the quantized linear path at t=" +
                 std::to_string(in.t);
      break;
    }

    case study_kind::gradient: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "gradient", "u0");
      invariant_potential phi = toric::legendre(u0);
      double limit = toric::calabi_energy(u0);
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        quantize::z_gradient g = quantize::grad_z(quantize::hilb(phi, lv), lv);
        rep.rows.push_back(make_row(k, std::pow(double(k), 3) * g.norm * g.norm, limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = limit == 0.0 ? rep.rows.back().abs_err <= 1e-8 : convergence_pass(rep);
      rep.note = "k^3 |grad Z_k|^2 at Hilb_k(phi) vs the Calabi energy";
      break;
    }

    case study_kind::dzdt: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "dzdt", "u0");
      const auto& u1 = need(in.u1, "dzdt", "u1");
      invariant_potential p0 = toric::legendre(u0), p1 = toric::legendre(u1);
      invariant_potential pt = toric::blend({{1.0 - in.t, p0}, {in.t, p1}});
      scalar_field vel = scalar_field::difference(p1, p0);
      double limit = toric::k_energy_diff(pt, vel);
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        symspace::hermitian_form h = quantize::hilb(pt, lv);
        numerics::real_vector r = quantize::d_hilb_ratio(pt, lv, vel);
        rep.rows.push_back(make_row(k, quantize::z_derivative_along(h, lv, r), limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = convergence_pass(rep);
      rep.note = "d/dt Z_k along the quantized linear path vs dE/dt at t=" +
                 std::to_string(in.t);
      break;
    }

    case study_kind::angle: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "angle", "u0");
      const auto& u1 = need(in.u1, "angle", "u1");
      const auto& u2 = need(in.u2, "angle", "u2");
      double limit = symspace::comparison_angle_from_sides(
          toric::h_distance(u0, u1), toric::h_distance(u1, u2), toric::h_distance(u0, u2));
      invariant_potential p0 = toric::legendre(u0);
      invariant_potential p1 = toric::legendre(u1);
      invariant_potential p2 = toric::legendre(u2);
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        double a = symspace::comparison_angle(quantize::hilb(p0, lv), quantize::hilb(p1, lv),
                                              quantize::hilb(p2, lv));
        rep.rows.push_back(make_row(k, a, limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = convergence_pass(rep);
      rep.note = "comparison angle at the middle potential";
      break;
    }

    case study_kind::ineq1: {
      for (int i = 0; i < samples; ++i) {
        symplectic_potential a = random_admissible(rng);
        symplectic_potential b = random_admissible(rng);
        double gap = toric::k_energy(toric::legendre(b)) - toric::k_energy(toric::legendre(a));
        double bound = toric::h_distance(a, b) * std::sqrt(toric::calabi_energy(b));
        rep.rows.push_back(make_slack_row(i, bound - gap));
      }
      rep.pass = slack_pass(rep);
      rep.note = "slack of E(phi1)-E(phi0) <= d(phi0,phi1) sqrt(Ca(phi1)); "
                 "row key = sample index";
      break;
    }

    case study_kind::ineq2: {
      for (int i = 0; i < samples; ++i) {
        symplectic_potential a = random_admissible(rng);
        symplectic_potential b = random_admissible(rng);
        toric::h_geodesic_point g0 = toric::h_geodesic(a, b, 0.0);
        toric::h_geodesic_point g1 = toric::h_geodesic(a, b, 1.0);
        double d0 = toric::k_energy_diff(g0.potential, g0.phi_dot);
        double d1 = toric::k_energy_diff(g1.potential, g1.phi_dot);
        rep.rows.push_back(make_slack_row(i, d1 - d0));
      }
      rep.pass = slack_pass(rep);
      rep.note = "slack of dE_{phi0}(phi_d(0)) <= dE_{phi1}(phi_d(1)); "
                 "row key = sample index";
      break;
    }

    case study_kind::tyz: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "tyz", "u0");
      invariant_potential phi = toric::legendre(u0);
      for_each_k(ks, [&](int k) {
        quantize::bergman_density rho(phi, quantize::quant_level(k));
        double worst = 0.0;
        for (int i = 1; i <= 65; ++i) {
          double q = double(i) / 66.0;
          double x = std::log(q) - std::log1p(-q);
          double s = u0.scalar_curvature(phi.moment(x));
          worst = std::max(worst, std::abs(rho(x) - (k + 0.5 * s)));
        }
        rep.rows.push_back(make_row(k, worst, 0.0));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = rep.fitted_order && *rep.fitted_order >= -1.3 && *rep.fitted_order <= -0.7;
      rep.note = "sup over a 65-point grid of |rho_k - (k + S/2)|; "
                 "pass iff the fitted order lies in [-1.3,-0.7]";
      break;
    }

    case study_kind::sandwich: {
      check_kgrid(ks);
      std::vector<symplectic_potential> us;
      for (int i = 0; i < samples; ++i) us.push_back(random_admissible(rng));
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& u : us) {
          invariant_potential phi = toric::legendre(u);
          symspace::hermitian_form h = quantize::hilb(phi, lv);
          double z = quantize::z_functional(h, lv);
          double lo = quantize::l_functional(quantize::fs(h, lv), lv);
          double hi = quantize::l_functional(phi, lv);
          worst = std::min(worst, std::min(z - lo, hi - z));
        }
        rep.rows.push_back(make_slack_row(k, worst));
      });
      rep.pass = slack_pass(rep);
      rep.note = "min over samples of min(Z - L(phi_k), L(phi) - Z)";
      break;
    }

    case study_kind::iquant: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "iquant", "u0");
      invariant_potential phi = toric::legendre(u0);
      double limit = toric::i_functional(phi);
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        double ik = quantize::hilb_log(phi, lv).sum();
        double v = -(ik - quantize::quant_base(lv)) / (double(k) * k);
        rep.rows.push_back(make_row(k, v, limit));
      });
      rep.fitted_order = fit_order(rep.rows);
      rep.pass = convergence_pass(rep);
      rep.note = "sigma = -1: the value is -k^{-2}(log det Hilb_k(phi) - base)";
      break;
    }

    case study_kind::zconvex: {
      check_kgrid(ks);
      std::vector<std::pair<symplectic_potential, symplectic_potential>> pairs;
      for (int i = 0; i < samples; ++i)
        pairs.emplace_back(random_admissible(rng), random_admissible(rng));
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& [ua, ub] : pairs) {
          symspace::hermitian_form ha = quantize::hilb(toric::legendre(ua), lv);
          symspace::hermitian_form hb = quantize::hilb(toric::legendre(ub), lv);
          std::vector<double> z;
          for (int i = 0; i < 9; ++i)
            z.push_back(quantize::z_functional(symspace::geodesic(ha, hb, i / 8.0), lv));
          for (std::size_t i = 1; i + 1 < z.size(); ++i)
            worst = std::min(worst, z[i + 1] - 2.0 * z[i] + z[i - 1]);
        }
        rep.rows.push_back(make_slack_row(k, worst));
      });
      rep.pass = slack_pass(rep);
      rep.note = "min discrete second difference of Z along Bergman geodesics";
      break;
    }

    case study_kind::lemmas: {
      check_kgrid(ks);
      const auto& u0 = need(in.u0, "lemmas", "u0");
      const auto& u1 = need(in.u1, "lemmas", "u1");
      const std::size_t n = 33;
      for_each_k(ks, [&](int k) {
        quantize::quant_level lv(k);
        std::vector<numerics::complex_matrix> vals;
        for (std::size_t i = 0; i < n; ++i) {
          double t = double(i) / double(n - 1);
          // flat perturbation eps sin(pi t) of the exact toric geodesic,
          // realized on the symplectic side so the entries stay exact
          symplectic_potential ut = toric::interpolate(u0, u1, t);
          std::vector<double> c = ut.coeffs();
          if (c.empty()) c.resize(1, 0.0);
          c[0] -= in.eps * std::sin(M_PI * t);
          vals.push_back(
              quantize::hilb(toric::legendre(symplectic_potential(c)), lv).matrix());
        }
        symspace::matrix_path path = numerics::make_uniform_path(n, vals);
        symspace::near_geodesic_report r = symspace::near_geodesic_check(path);
        double worst = std::min(r.length_slack, std::min(r.tangent_slack0, r.tangent_slack1));
        rep.rows.push_back(make_slack_row(k, worst));
      });
      rep.pass = slack_pass(rep);
      rep.note = "min slack of the length and endpoint-tangent bounds on the "
                 "quantized near-geodesic (perturbation " + std::to_string(in.eps) + ")";
      break;
    }
  }
  return rep;
}

}  // namespace kq::experiments
