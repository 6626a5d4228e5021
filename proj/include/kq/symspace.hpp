#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "kq/finite_diff.hpp"
#include "kq/linalg.hpp"
#include "kq/quadrature.hpp"

namespace kq::symspace {

using numerics::complex_matrix;
using numerics::real_vector;

// Positive-definite Hermitian form.  PD is enforced at construction:
// eigenvalues below 1e-12 * ||H|| are rejected (inversion error dominates
// below that).
class hermitian_form {
public:
  static hermitian_form from_matrix(const complex_matrix& m) {
    numerics::require_hermitian(m, "hermitian_form");
    if (m.isDiagonal(0.0)) return from_diagonal(m.diagonal().real());
    // dense forms: eigenvalues below 1e-12 |H| are rejected, inversion
    // error dominates there; diagonal forms invert exactly at any scale
    numerics::eig_result e = numerics::pd_eig(m);
    double top = std::max(std::abs(e.eigenvalues[e.eigenvalues.size() - 1]),
                          std::abs(e.eigenvalues[0]));
    if (e.eigenvalues[0] <= 1e-12 * top || e.eigenvalues[0] <= 0)
      throw domain_error("hermitian_form: matrix not positive definite", e.eigenvalues[0]);
    hermitian_form h;
    h.m_ = 0.5 * (m + m.adjoint());
    h.diagonal_ = false;
    return h;
  }

  static hermitian_form from_diagonal(const real_vector& d) {
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d[i] > 0)) throw domain_error("hermitian_form: non-positive diagonal entry", d[i]);
    hermitian_form h;
    h.m_ = d.cast<std::complex<double>>().asDiagonal();
    h.diagonal_ = true;
    return h;
  }

  Eigen::Index dim() const { return m_.rows(); }
  const complex_matrix& matrix() const { return m_; }
  bool is_diagonal() const { return diagonal_; }
  real_vector diagonal() const { return m_.diagonal().real(); }

private:
  complex_matrix m_;
  bool diagonal_ = false;
};

// Tangent vector at some base point; just the Hermitian matrix of the
// variation, the base is passed explicitly where a metric is needed.
struct tangent_form {
  complex_matrix m;

  static tangent_form from_matrix(const complex_matrix& t) {
    numerics::require_hermitian(t, "tangent_form");
    return {0.5 * (t + t.adjoint())};
  }
  static tangent_form from_diagonal(const real_vector& d) {
    return {d.cast<std::complex<double>>().asDiagonal()};
  }
};

// (A, B)_H = Tr(A H^-1 B H^-1)
inline double inner(const hermitian_form& h, const tangent_form& a, const tangent_form& b) {
  if (a.m.rows() != h.dim() || b.m.rows() != h.dim())
    throw contract_error("inner: dimension mismatch");
  Eigen::LLT<complex_matrix> llt(h.matrix());
  complex_matrix ha = llt.solve(a.m);
  complex_matrix hb = llt.solve(b.m);
  return (ha * hb).trace().real();
}

inline double norm(const hermitian_form& h, const tangent_form& a) {
  return std::sqrt(std::max(0.0, inner(h, a, a)));
}

// H(t) = H0^{1/2} exp(t log(H0^{-1/2} H1 H0^{-1/2})) H0^{1/2}.
// t is unconstrained; the space is geodesically complete.
inline hermitian_form geodesic(const hermitian_form& h0, const hermitian_form& h1, double t) {
  if (h0.dim() != h1.dim()) throw contract_error("geodesic: dimension mismatch");
  if (h0.is_diagonal() && h1.is_diagonal()) {
    real_vector d0 = h0.diagonal(), d1 = h1.diagonal();
    real_vector out(d0.size());
    for (Eigen::Index i = 0; i < d0.size(); ++i)
      out[i] = d0[i] * std::exp(t * (std::log(d1[i]) - std::log(d0[i])));
    return hermitian_form::from_diagonal(out);
  }
  complex_matrix s = numerics::mat_fn(h0.matrix(), numerics::matrix_fn::sqrt);
  complex_matrix si = numerics::mat_fn(h0.matrix(), numerics::matrix_fn::inv_sqrt);
  complex_matrix a = numerics::mat_fn(si * h1.matrix() * si, numerics::matrix_fn::log);
  complex_matrix g = s * numerics::mat_fn(t * a, numerics::matrix_fn::exp) * s;
  return hermitian_form::from_matrix(g);
}

// Initial / terminal velocity of the geodesic from h0 to h1.
inline tangent_form geodesic_velocity(const hermitian_form& h0, const hermitian_form& h1, double t) {
  complex_matrix s = numerics::mat_fn(h0.matrix(), numerics::matrix_fn::sqrt);
  complex_matrix si = numerics::mat_fn(h0.matrix(), numerics::matrix_fn::inv_sqrt);
  complex_matrix a = numerics::mat_fn(si * h1.matrix() * si, numerics::matrix_fn::log);
  complex_matrix e = numerics::mat_fn(t * a, numerics::matrix_fn::exp);
  complex_matrix v = s * (a * e) * s;
  return tangent_form::from_matrix(v);
}

// d(H0,H1) = sqrt(sum log^2 eigenvalues(H0^{-1/2} H1 H0^{-1/2})).
inline double distance(const hermitian_form& h0, const hermitian_form& h1) {
  if (h0.dim() != h1.dim()) throw contract_error("distance: dimension mismatch");
  if (h0.is_diagonal() && h1.is_diagonal()) {
    real_vector d0 = h0.diagonal(), d1 = h1.diagonal();
    double s = 0.0;
    for (Eigen::Index i = 0; i < d0.size(); ++i) {
      double l = std::log(d1[i]) - std::log(d0[i]);
      s += l * l;
    }
    return std::sqrt(s);
  }
  complex_matrix si = numerics::mat_fn(h0.matrix(), numerics::matrix_fn::inv_sqrt);
  numerics::eig_result e = numerics::pd_eig(si * h1.matrix() * si);
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.eigenvalues.size(); ++i) {
    if (e.eigenvalues[i] <= 0)
      throw domain_error("distance: non-PD relative spectrum", e.eigenvalues[i]);
    double l = std::log(e.eigenvalues[i]);
    s += l * l;
  }
  return std::sqrt(s);
}

using matrix_path = numerics::sampled_path<complex_matrix>;

inline matrix_path sample_geodesic(const hermitian_form& h0, const hermitian_form& h1,
                                   std::size_t n = 33) {
  std::vector<complex_matrix> vals;
  vals.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    vals.push_back(geodesic(h0, h1, double(i) / double(n - 1)).matrix());
  return numerics::make_uniform_path(n, vals);
}

namespace detail {

inline bool all_diagonal(const matrix_path& path) {
  for (const auto& m : path.values)
    if (!m.isDiagonal(0.0)) return false;
  return true;
}

// log of the diagonal entries along the path
inline numerics::sampled_path<Eigen::VectorXd> log_path(const matrix_path& path) {
  std::vector<Eigen::VectorXd> logs;
  logs.reserve(path.size());
  for (const auto& m : path.values) {
    Eigen::VectorXd l = m.diagonal().real();
    for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = std::log(l[i]);
    logs.push_back(std::move(l));
  }
  return {path.times, std::move(logs)};
}

}  // namespace detail

// Covariant acceleration Hdd - Hd H^-1 Hd at a grid point, with Hd, Hdd
// from 4th-order finite differences.  Diagonal paths go through the log
// entries, where the combination is exactly (log H)'' H and the large
// Hd H^-1 Hd cancellation never forms.
inline tangent_form covariant_accel(const matrix_path& path, std::size_t at) {
  if (detail::all_diagonal(path)) {
    numerics::sampled_path<Eigen::VectorXd> lp = detail::log_path(path);
    Eigen::VectorXd a = numerics::fd_derivative_at(lp, 2, at);
    real_vector d = path.values.at(at).diagonal().real();
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] *= a[i];
    return tangent_form::from_diagonal(d);
  }
  complex_matrix h = path.values.at(at);
  complex_matrix hd = numerics::fd_derivative_at(path, 1, at);
  complex_matrix hdd = numerics::fd_derivative_at(path, 2, at);
  complex_matrix acc = hdd - hd * h.llt().solve(hd);
  return tangent_form::from_matrix(acc);
}

inline tangent_form covariant_accel(const matrix_path& path, double t) {
  for (std::size_t i = 0; i < path.size(); ++i)
    if (std::abs(path.times[i] - t) <= 1e-12) return covariant_accel(path, i);
  throw contract_error("covariant_accel: t is not a grid point");
}

// Euclidean comparison angle at hb from the three pairwise distances.
inline double comparison_angle(const hermitian_form& ha, const hermitian_form& hb,
                               const hermitian_form& hc) {
  double dab = distance(ha, hb);
  double dbc = distance(hb, hc);
  double dac = distance(ha, hc);
  if (dab <= 1e-12 || dbc <= 1e-12)
    throw degenerate_triangle("comparison_angle: vertex coincides with the corner point");
  double c = (dab * dab + dbc * dbc - dac * dac) / (2.0 * dab * dbc);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

inline double comparison_angle_from_sides(double dab, double dbc, double dac) {
  if (dab == 0.0 || dbc == 0.0)
    throw degenerate_triangle("comparison_angle: degenerate side");
  double c = (dab * dab + dbc * dbc - dac * dac) / (2.0 * dab * dbc);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

struct near_geodesic_report {
  double eps = 0.0;         // max over grid of |covariant acceleration|
  double length = 0.0;      // path length
  double dist = 0.0;        // distance between endpoints
  double gap0 = 0.0;        // |gamma'(0) - tilde gamma'(0)| at gamma(0)
  double gap1 = 0.0;        // |gamma'(1) - tilde gamma'(1)| at gamma(1)
  double speed0 = 0.0;      // |gamma'(0)|
  double speed1 = 0.0;      // |gamma'(1)|
  double length_slack = 0.0;   // eps - (length - dist); >= 0 when the bound holds
  double tangent_slack0 = 0.0; // 9/4 eps^2 + 4 eps |g'(1)| - gap0^2
  double tangent_slack1 = 0.0; // 9/4 eps^2 + 4 eps |g'(0)| - gap1^2
  bool length_ok = false;
  bool tangent0_ok = false;
  bool tangent1_ok = false;
};

// Measures eps = max |nabla_{g'} g'| over the grid and checks the two
// nonpositive-curvature bounds: d(g(0),g(1)) >= L(g) - eps, and
// |g'(i) - tg'(i)|^2 <= 9/4 eps^2 + 4 eps |g'(1-i)| with tg the geodesic
// between the endpoints.  Failures beyond 1e-7 are flagged, not thrown.
inline near_geodesic_report near_geodesic_check(const matrix_path& path) {
  path.validate();
  const std::size_t n = path.size();
  near_geodesic_report rep;
  const bool diag = detail::all_diagonal(path);

  std::vector<double> speeds(n);
  if (diag) {
    numerics::sampled_path<Eigen::VectorXd> lp = detail::log_path(path);
    for (std::size_t i = 0; i < n; ++i) {
      speeds[i] = numerics::fd_derivative_at(lp, 1, i).norm();
      rep.eps = std::max(rep.eps, numerics::fd_derivative_at(lp, 2, i).norm());
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      hermitian_form h = hermitian_form::from_matrix(path.values[i]);
      tangent_form hd = tangent_form::from_matrix(numerics::fd_derivative_at(path, 1, i));
      speeds[i] = norm(h, hd);
      double acc = norm(h, covariant_accel(path, i));
      rep.eps = std::max(rep.eps, acc);
    }
  }
  // composite Simpson over the (odd-sized) uniform grid
  const double h = path.times[1] - path.times[0];
  if (n % 2 == 1) {
    double s = speeds.front() + speeds.back();
    for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * speeds[i];
    rep.length = s * h / 3.0;
  } else {  // trapezoid fallback
    double s = 0.5 * (speeds.front() + speeds.back());
    for (std::size_t i = 1; i + 1 < n; ++i) s += speeds[i];
    rep.length = s * h;
  }

  hermitian_form h0 = hermitian_form::from_matrix(path.values.front());
  hermitian_form h1 = hermitian_form::from_matrix(path.values.back());
  rep.dist = distance(h0, h1);
  rep.speed0 = speeds.front();
  rep.speed1 = speeds.back();

  if (diag) {
    // geodesic velocity in the log chart is the constant log-difference
    numerics::sampled_path<Eigen::VectorXd> lp = detail::log_path(path);
    Eigen::VectorXd dl = lp.values.back() - lp.values.front();
    rep.gap0 = (numerics::fd_derivative_at(lp, 1, 0) - dl).norm();
    rep.gap1 = (numerics::fd_derivative_at(lp, 1, n - 1) - dl).norm();
  } else {
    tangent_form g0 = tangent_form::from_matrix(numerics::fd_derivative_at(path, 1, 0));
    tangent_form g1 = tangent_form::from_matrix(numerics::fd_derivative_at(path, 1, n - 1));
    tangent_form t0 = geodesic_velocity(h0, h1, 0.0);
    tangent_form t1 = geodesic_velocity(h0, h1, 1.0);
    rep.gap0 = norm(h0, tangent_form::from_matrix(g0.m - t0.m));
    rep.gap1 = norm(h1, tangent_form::from_matrix(g1.m - t1.m));
  }

  rep.length_slack = rep.eps - (rep.length - rep.dist);
  rep.tangent_slack0 = 2.25 * rep.eps * rep.eps + 4.0 * rep.eps * rep.speed1 - rep.gap0 * rep.gap0;
  rep.tangent_slack1 = 2.25 * rep.eps * rep.eps + 4.0 * rep.eps * rep.speed0 - rep.gap1 * rep.gap1;
  rep.length_ok = rep.length_slack >= -1e-7;
  rep.tangent0_ok = rep.tangent_slack0 >= -1e-7;
  rep.tangent1_ok = rep.tangent_slack1 >= -1e-7;
  return rep;
}

// Path length by quadrature of |g'| against the metric, for cross-checks.
inline double geodesic_length_by_inner(const hermitian_form& h0, const hermitian_form& h1) {
  double len = 0.0;
  // Gauss on [0,1] in t with the analytic velocity
  const numerics::gauss_rule& g = numerics::gauss_legendre(32);
  for (int i = 0; i < 32; ++i) {
    double t = 0.5 + 0.5 * g.nodes[static_cast<std::size_t>(i)];
    hermitian_form ht = geodesic(h0, h1, t);
    tangent_form vt = geodesic_velocity(h0, h1, t);
    len += 0.5 * g.weights[static_cast<std::size_t>(i)] * norm(ht, vt);
  }
  return len;
}

}  // namespace kq::symspace
