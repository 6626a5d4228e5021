#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "kq/finite_diff.hpp"

using namespace kq::numerics;

namespace {

sampled_path<double> sample(std::size_t n, double (*f)(double)) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(double(i) / double(n - 1));
  return make_uniform_path(n, v);
}

double sq(double t) { return t * t; }
double cube(double t) { return t * t * t; }

}  // namespace

TEST_CASE("first derivative of t^2 at 0.5") {
  auto p = sample(33, sq);
  CHECK(std::abs(fd_derivative(p, 1, 0.5) - 1.0) < 1e-10);
}

TEST_CASE("second derivative of t^2 everywhere") {
  auto p = sample(33, sq);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(std::abs(fd_derivative_at(p, 2, i) - 2.0) < 1e-8);
}

TEST_CASE("third derivative of t^3 is exact") {
  auto p = sample(33, cube);
  for (std::size_t i : {std::size_t(0), std::size_t(16), std::size_t(32)})
    CHECK(std::abs(fd_derivative_at(p, 3, i) - 6.0) < 1e-6);
}

TEST_CASE("exp path first derivative at 0.5") {
  auto p = sample(65, [](double t) { return std::exp(t); });
  CHECK(std::abs(fd_derivative(p, 1, 0.5) - std::exp(0.5)) < 1e-8);
}

TEST_CASE("endpoint stencils stay 4th order on exp") {
  auto p = sample(33, [](double t) { return std::exp(t); });
  CHECK(std::abs(fd_derivative_at(p, 1, 0) - 1.0) < 1e-6);
  CHECK(std::abs(fd_derivative_at(p, 1, 32) - std::exp(1.0)) < 1e-6);
}

TEST_CASE("error scales like h^4 on exp") {
  // dyadic refinement sweep; least-squares slope of log err vs log h
  std::vector<double> logh, logerr;
  for (std::size_t n : {9, 17, 33, 65, 129}) {
    auto p = sample(n, [](double t) { return std::exp(t); });
    std::size_t mid = (n - 1) / 2;
    double err = std::abs(fd_derivative_at(p, 1, mid) - std::exp(p.times[mid]));
    logh.push_back(std::log(1.0 / double(n - 1)));
    logerr.push_back(std::log(err));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  auto m = double(logh.size());
  for (std::size_t i = 0; i < logh.size(); ++i) {
    sx += logh[i];
    sy += logerr[i];
    sxx += logh[i] * logh[i];
    sxy += logh[i] * logerr[i];
  }
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope > 3.7);
  CHECK(slope < 4.3);
}

TEST_CASE("too few samples rejected") {
  std::vector<double> v{0.0, 1.0, 2.0, 3.0};
  std::vector<double> t{0.0, 1.0 / 3, 2.0 / 3, 1.0};
  sampled_path<double> p{t, v};
  CHECK_THROWS_AS(fd_derivative_at(p, 1, 0), kq::contract_error);
}

TEST_CASE("non-uniform grid rejected") {
  std::vector<double> t{0.0, 0.3, 0.5, 0.75, 1.0};
  std::vector<double> v{0, 0, 0, 0, 0};
  sampled_path<double> p{t, v};
  CHECK_THROWS_AS(fd_derivative_at(p, 1, 2), kq::contract_error);
}

TEST_CASE("matrix valued paths") {
  std::size_t n = 65;
  std::vector<Eigen::MatrixXcd> vals;
  for (std::size_t i = 0; i < n; ++i) {
    double t = double(i) / double(n - 1);
    Eigen::MatrixXcd m(2, 2);
    m << std::sin(t), 0.0, 0.0, std::cos(t);
    vals.push_back(m);
  }
  auto p = make_uniform_path(n, vals);
  Eigen::MatrixXcd d = fd_derivative(p, 1, 0.5);
  CHECK(std::abs(d(0, 0).real() - std::cos(0.5)) < 1e-8);
  CHECK(std::abs(d(1, 1).real() + std::sin(0.5)) < 1e-8);
}
