#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "kq/errors.hpp"

namespace kq::numerics {

using complex_matrix = Eigen::MatrixXcd;
using real_vector = Eigen::VectorXd;

inline double max_abs(const complex_matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermitian_defect(const complex_matrix& m) {
  return max_abs(m - m.adjoint());
}

inline void require_hermitian(const complex_matrix& m, const char* who) {
  if (m.rows() != m.cols()) throw contract_error(std::string(who) + ": matrix not square");
  double tol = 1e-12 * std::max(1.0, max_abs(m));
  if (hermitian_defect(m) > tol)
    throw contract_error(std::string(who) + ": matrix not Hermitian within 1e-12");
}

struct eig_result {
  real_vector eigenvalues;  // ascending
  complex_matrix frame;     // unitary, columns are eigenvectors
};

// Eigendecomposition of a Hermitian matrix.  Input is validated for
// Hermiticity; eigenvalues come out ascending.
inline eig_result pd_eig(const complex_matrix& m) {
  require_hermitian(m, "pd_eig");
  Eigen::SelfAdjointEigenSolver<complex_matrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) throw tolerance_error("pd_eig: eigensolver failed", 0.0, 0.0);
  return {es.eigenvalues(), es.eigenvectors()};
}

enum class matrix_fn { exp, log, sqrt, inv_sqrt };

// f(M) for Hermitian M through the eigenframe.  log/sqrt/inv_sqrt require
// strictly positive spectrum and report the offending eigenvalue otherwise.
inline complex_matrix mat_fn(const complex_matrix& m, matrix_fn fn) {
  eig_result e = pd_eig(m);
  real_vector d = e.eigenvalues;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    double& v = d[i];
    switch (fn) {
      case matrix_fn::exp:
        v = std::exp(v);
        break;
      case matrix_fn::log:
        if (v <= 0) throw domain_error("mat_fn(log): non-positive eigenvalue", v);
        v = std::log(v);
        break;
      case matrix_fn::sqrt:
        if (v <= 0) throw domain_error("mat_fn(sqrt): non-positive eigenvalue", v);
        v = std::sqrt(v);
        break;
      case matrix_fn::inv_sqrt:
        if (v <= 0) throw domain_error("mat_fn(inv_sqrt): non-positive eigenvalue", v);
        v = 1.0 / std::sqrt(v);
        break;
    }
  }
  complex_matrix out = e.frame * d.asDiagonal() * e.frame.adjoint();
  return 0.5 * (out + out.adjoint());
}

}  // namespace kq::numerics
