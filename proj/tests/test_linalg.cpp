#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kq/linalg.hpp"

using namespace kq::numerics;
using Catch::Approx;

namespace {

complex_matrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  complex_matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = std::complex<double>(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("identity spectrum") {
  eig_result e = pd_eig(complex_matrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(e.eigenvalues[i] == Approx(1.0).margin(1e-14));
}

TEST_CASE("diag(4,1) comes back ascending with a permutation frame") {
  complex_matrix m = complex_matrix::Zero(2, 2);
  m(0, 0) = 4.0;
  m(1, 1) = 1.0;
  eig_result e = pd_eig(m);
  CHECK(e.eigenvalues[0] == Approx(1.0).margin(1e-14));
  CHECK(e.eigenvalues[1] == Approx(4.0).margin(1e-14));
  CHECK(std::abs(e.frame(1, 0)) == Approx(1.0).margin(1e-12));
  CHECK(std::abs(e.frame(0, 1)) == Approx(1.0).margin(1e-12));
}

TEST_CASE("[[2,1],[1,2]] has spectrum {1,3}") {
  // characteristic polynomial (2-l)^2 - 1 = 0
  complex_matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  eig_result e = pd_eig(m);
  CHECK(e.eigenvalues[0] == Approx(1.0).margin(1e-13));
  CHECK(e.eigenvalues[1] == Approx(3.0).margin(1e-13));
}

TEST_CASE("reconstruction is idempotent to 1e-10") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    complex_matrix m = random_hermitian(6, rng);
    eig_result e = pd_eig(m);
    complex_matrix r =
        e.frame * e.eigenvalues.cast<std::complex<double>>().asDiagonal() * e.frame.adjoint();
    CHECK(max_abs(r - m) <= 1e-10 * std::max(1.0, max_abs(m)));
  }
}

TEST_CASE("non-Hermitian input violates the contract") {
  complex_matrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(pd_eig(m), kq::contract_error);
}

TEST_CASE("sqrt of diag(4,9)") {
  complex_matrix m = complex_matrix::Zero(2, 2);
  m(0, 0) = 4.0;
  m(1, 1) = 9.0;
  complex_matrix s = mat_fn(m, matrix_fn::sqrt);
  CHECK(std::abs(s(0, 0) - 2.0) < 1e-13);
  CHECK(std::abs(s(1, 1) - 3.0) < 1e-13);
}

TEST_CASE("log of identity vanishes") {
  complex_matrix l = mat_fn(complex_matrix::Identity(3, 3), matrix_fn::log);
  CHECK(max_abs(l) < 1e-14);
}

TEST_CASE("exp(log(.)) round trip") {
  complex_matrix m = complex_matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 5.0;
  complex_matrix r = mat_fn(mat_fn(m, matrix_fn::log), matrix_fn::exp);
  CHECK(max_abs(r - m) < 1e-12 * max_abs(m));

  std::mt19937_64 rng(3);
  complex_matrix a = random_hermitian(5, rng);
  complex_matrix pd = mat_fn(a, matrix_fn::exp);  // PD by construction
  complex_matrix rt = mat_fn(mat_fn(pd, matrix_fn::log), matrix_fn::exp);
  CHECK(max_abs(rt - pd) <= 1e-9 * max_abs(pd));
}

TEST_CASE("inv_sqrt squares to the inverse") {
  std::mt19937_64 rng(5);
  complex_matrix a = random_hermitian(4, rng);
  complex_matrix pd = mat_fn(a, matrix_fn::exp);
  complex_matrix is = mat_fn(pd, matrix_fn::inv_sqrt);
  CHECK(max_abs(is * pd * is - complex_matrix::Identity(4, 4)) < 1e-11);
}

TEST_CASE("negative spectrum reports the offending eigenvalue") {
  complex_matrix m = complex_matrix::Zero(2, 2);
  m(0, 0) = -2.0;
  m(1, 1) = 5.0;
  try {
    mat_fn(m, matrix_fn::log);
    FAIL("expected domain_error");
  } catch (const kq::domain_error& e) {
    CHECK(e.offending_value == Approx(-2.0).margin(1e-12));
  }
}
