#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "kq/toric.hpp"

using namespace kq::toric;
using Catch::Approx;

namespace {

std::mt19937_64 rng(424243);

// admissible by construction: sum m(m-1)|c_m| < 4 keeps u'' > 0
symplectic_potential random_correction(double scale = 0.4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(7, 0.0);
  for (std::size_t m = 0; m < c.size(); ++m) c[m] = scale * u(rng) / double((m + 1) * (m + 1));
  return symplectic_potential(c);
}

const std::vector<double> kX{-6.0, -2.5, -1.0, -0.3, 0.0, 0.4, 1.2, 3.0, 7.0};

}  // namespace

TEST_CASE("legendre of the round potential is log(1+e^x)") {
  invariant_potential fs = legendre(symplectic_potential::fubini_study());
  for (double x : kX) {
    CHECK(fs.psi(x) == Approx(std::log1p(std::exp(-std::abs(x))) + std::max(0.0, x))
                           .margin(1e-12));
    // moment map is the sigmoid
    CHECK(fs.moment(x) == Approx(1.0 / (1.0 + std::exp(-x))).margin(1e-12));
  }
}

TEST_CASE("constant shifts of u move phi by a constant") {
  double c = 0.81;
  invariant_potential shifted = legendre(symplectic_potential({-c}));
  for (double x : kX) CHECK(shifted.phi(x) == Approx(c).margin(1e-11));
}

TEST_CASE("linear corrections translate the potential") {
  double b = 0.6;
  invariant_potential t = legendre(symplectic_potential({0.0, b}));
  for (double x : kX)
    CHECK(t.psi(x) == Approx(invariant_potential::psi_fs(x - b)).margin(1e-11));
}

TEST_CASE("legendre round trip on random admissible corrections") {
  for (int trial = 0; trial < 100; ++trial) {
    symplectic_potential u = random_correction();
    invariant_potential phi = legendre(u);
    double worst = 0.0;
    for (int i = 0; i <= 98; ++i) {
      double p = 0.01 + 0.98 * double(i) / 98.0;
      worst = std::max(worst, std::abs(inverse_legendre(phi, p) - u.u(p)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("non-convex corrections are rejected with a location") {
  CHECK_THROWS_AS(symplectic_potential({0.0, 0.0, -3.0}), kq::domain_error);
}

TEST_CASE("volume mass is one and the moment map pushes dmu to dp") {
  invariant_potential fs = fs_potential();
  CHECK(volume_mass(fs) == Approx(1.0).margin(1e-10));
  for (int trial = 0; trial < 5; ++trial) {
    invariant_potential phi = legendre(random_correction());
    CHECK(volume_mass(phi) == Approx(1.0).margin(1e-10));
    // int g(p(x)) dmu = int_0^1 g dp with g(p) = p^2
    double v = integral_dmu(phi, [&](double x) {
      double p = phi.moment(x);
      return p * p;
    });
    CHECK(v == Approx(1.0 / 3.0).margin(1e-10));
  }
}

TEST_CASE("psi - max(0,x) stays bounded") {
  invariant_potential phi = legendre(random_correction());
  for (double x : {-30.0, -10.0, 10.0, 30.0})
    CHECK(std::abs(phi.psi(x) - std::max(0.0, x)) < 10.0);
}

TEST_CASE("scalar curvature of the round metric is 2") {
  symplectic_potential fs = symplectic_potential::fubini_study();
  for (double p : {0.01, 0.2, 0.5, 0.9, 0.999})
    CHECK(fs.scalar_curvature(p) == Approx(2.0).margin(1e-12));
}

TEST_CASE("mean scalar curvature is the topological constant") {
  for (int trial = 0; trial < 8; ++trial)
    CHECK(scalar_curvature_mean(random_correction()) == Approx(2.0).margin(1e-8));
}

TEST_CASE("curved example matches the symbolic value at p = 1/2") {
  // S(1/2) for f = 0.1 p^2(1-p)^2, from exact symbolic differentiation
  symplectic_potential u({0.0, 0.0, 0.1, -0.2, 0.1});
  CHECK(u.scalar_curvature(0.5) == Approx(2.261669953977646285).epsilon(1e-14));
  // x-route through the Legendre dual agrees away from the corners
  invariant_potential phi = legendre(u);
  for (double p : {0.2, 0.5, 0.7}) {
    double x = u.u1(p);
    CHECK(phi.scalar_curvature_x(x) == Approx(u.scalar_curvature(p)).margin(1e-8));
  }
}

TEST_CASE("laplacian basics") {
  invariant_potential fs = fs_potential();
  auto zero = laplacian(fs, scalar_field::constant(3.0));
  for (double x : kX) CHECK(zero(x) == Approx(0.0).margin(1e-14));

  // zero mean against dmu for a decaying variation
  scalar_field g = scalar_field::sigmoid_poly({0.0, 1.0, -1.0});  // s - s^2
  invariant_potential phi = legendre(random_correction());
  auto lap = laplacian(phi, g);
  CHECK(integral_dmu(phi, lap) == Approx(0.0).margin(1e-9));
}

TEST_CASE("gradient norm basics") {
  invariant_potential fs = fs_potential();
  auto zero = grad_norm_sq(fs, scalar_field::constant(1.0));
  CHECK(zero(0.3) == 0.0);

  // g(x) = x has |grad g|^2 = 1/psi'' = (1+e^x)^2/e^x on the round metric
  scalar_field lin{4, [](double x) { return jet4{x, 1.0, 0.0, 0.0, 0.0}; }};
  auto gsq = grad_norm_sq(fs, lin);
  for (double p : {0.2, 0.5, 0.8}) {
    double x = std::log(p) - std::log1p(-p);
    double expect = (1.0 + std::exp(x)) * (1.0 + std::exp(x)) / std::exp(x);
    CHECK(gsq(x) == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("geodesics: constant and flat families") {
  symplectic_potential u0 = random_correction();
  h_geodesic_point same = h_geodesic(u0, u0, 0.7);
  for (double x : kX) CHECK(same.phi_dot(x) == Approx(0.0).margin(1e-13));

  // u1 = u0 - c: phi_t = phi_0 + t c with velocity identically c
  double c = 0.45;
  std::vector<double> shifted = u0.coeffs();
  shifted[0] -= c;
  symplectic_potential u1(shifted);
  invariant_potential phi0 = legendre(u0);
  for (double t : {0.0, 0.25, 0.8}) {
    h_geodesic_point pt = h_geodesic(u0, u1, t);
    for (double x : kX) {
      CHECK(pt.phi_dot(x) == Approx(c).margin(1e-12));
      CHECK(pt.potential.phi(x) == Approx(phi0.phi(x) + t * c).margin(1e-11));
    }
  }
}

TEST_CASE("exact geodesics have residual below 1e-7 and constant speed") {
  symplectic_potential u0 = symplectic_potential::fubini_study();
  symplectic_potential u1({0.0, 0.5, -0.5});  // f = 0.5 p(1-p)
  path_in_h path = sample_h_geodesic(u0, u1, 33);
  CHECK(geodesic_residual(path) <= 1e-7);

  double v0 = -1.0;
  for (std::size_t i : {std::size_t(0), std::size_t(10), std::size_t(22), std::size_t(32)}) {
    const auto& phi = path.potentials[i];
    const auto& dot = path.phi_dot[i];
    double v = integral_dmu(phi, [&](double x) { return dot(x) * dot(x); });
    if (v0 < 0) v0 = v;
    CHECK(v == Approx(v0).margin(1e-8));
  }
}

TEST_CASE("residual of a linear path is strictly positive") {
  invariant_potential p0 = fs_potential();
  invariant_potential p1 = legendre(symplectic_potential({0.0, 0.5, -0.5}));
  path_in_h lin = sample_linear_path(p0, p1, 33);
  double r = geodesic_residual(lin, 257);
  CHECK(r > 1e-4);
}

TEST_CASE("flat perturbation shifts the residual by 2 eps") {
  // psi_t = psi_FS + eps t(1-t): phi_dd = -2 eps, |grad phi_d|^2 = 0
  double eps = 0.003;
  path_in_h path;
  invariant_potential fs = fs_potential();
  for (int i = 0; i < 33; ++i) {
    double t = double(i) / 32.0;
    path.times.push_back(t);
    path.potentials.push_back(blend({{1.0, fs}}, eps * t * (1.0 - t)));
    path.phi_dot.push_back(scalar_field::constant(eps * (1.0 - 2.0 * t)));
    path.phi_ddot.push_back(scalar_field::constant(-2.0 * eps));
  }
  CHECK(geodesic_residual(path, 129) == Approx(2.0 * eps).epsilon(1e-10));
}

TEST_CASE("h-distance examples") {
  symplectic_potential u0 = random_correction();
  std::vector<double> s = u0.coeffs();
  s[0] -= 0.7;
  CHECK(h_distance(u0, symplectic_potential(s)) == Approx(0.7).epsilon(1e-12));
  CHECK(h_distance(u0, u0) == Approx(0.0).margin(1e-14));

  symplectic_potential fs = symplectic_potential::fubini_study();
  double c = 0.5;
  symplectic_potential u1({0.0, c, -c});
  CHECK(h_distance(fs, u1) == Approx(0.09128709291752768558).epsilon(1e-13));
}

TEST_CASE("distance equals the L2 speed of the geodesic") {
  symplectic_potential u0 = random_correction();
  symplectic_potential u1 = random_correction();
  double d = h_distance(u0, u1);
  h_geodesic_point pt = h_geodesic(u0, u1, 0.4);
  double v = integral_dmu(pt.potential,
                          [&](double x) { return pt.phi_dot(x) * pt.phi_dot(x); });
  CHECK(std::sqrt(v) == Approx(d).margin(1e-8));
}

TEST_CASE("I functional: normalization, flat shifts, oracle") {
  invariant_potential fs = fs_potential();
  CHECK(i_functional(fs) == Approx(0.0).margin(1e-12));

  for (int trial = 0; trial < 5; ++trial) {
    symplectic_potential u = random_correction();
    invariant_potential phi = legendre(u);
    // independent p-side oracle: I = -int f dp
    double intf = kq::numerics::integrate([&](double p) { return u.f_at(p); }, 0.0, 1.0,
                                          p_spec()).value;
    CHECK(i_functional(phi) == Approx(-intf).margin(1e-9));

    // I(phi + c) = I(phi) + c, realized by u - c
    std::vector<double> s = u.coeffs();
    s[0] -= 0.3;
    CHECK(i_functional(legendre(symplectic_potential(s))) ==
          Approx(i_functional(phi) + 0.3).margin(1e-8));
  }
}

TEST_CASE("I is affine along geodesics and concave along linear paths") {
  symplectic_potential u0 = symplectic_potential::fubini_study();
  symplectic_potential u1({0.0, 0.5, -0.5});
  std::vector<double> vals;
  for (int i = 0; i < 33; ++i)
    vals.push_back(i_functional(h_geodesic(u0, u1, double(i) / 32.0).potential));
  for (int i = 1; i + 1 < 33; ++i) {
    double dev = vals[i] - 0.5 * (vals[i - 1] + vals[i + 1]);
    CHECK(std::abs(dev) < 1e-7);
  }

  // Along an affine segment phi_t = phi_0 + t phi_d the second derivative is
  // -int (phi_d')^2 dx <= 0: the first-order expansion overestimates I.
  path_in_h lin = sample_linear_path(legendre(u0), legendre(u1), 17);
  std::vector<double> lv;
  for (const auto& p : lin.potentials) lv.push_back(i_functional(p));
  for (std::size_t i = 1; i + 1 < lv.size(); ++i)
    CHECK(lv[i + 1] - 2.0 * lv[i] + lv[i - 1] <= 1e-9);
}

TEST_CASE("K-energy: normalization and shift invariance") {
  CHECK(k_energy(fs_potential()) == Approx(0.0).margin(1e-10));
  symplectic_potential u = random_correction(0.3);
  std::vector<double> s = u.coeffs();
  s[0] += 0.4;
  CHECK(k_energy(legendre(symplectic_potential(s))) ==
        Approx(k_energy(legendre(u))).margin(1e-8));
}

TEST_CASE("K-energy path integral matches the closed toric formula") {
  // frozen independent values for f = 0.2 p^2 q^2 and f = 0.1 p^2 q^2
  symplectic_potential u2({0.0, 0.0, 0.2, -0.4, 0.2});
  CHECK(k_energy_closed(u2) == Approx(3.908851792774070808e-4).epsilon(1e-10));
  CHECK(k_energy(legendre(u2)) == Approx(3.908851792774070808e-4).margin(1e-6));

  symplectic_potential u1({0.0, 0.0, 0.1, -0.2, 0.1});
  CHECK(k_energy_closed(u1) == Approx(9.64579050301724303e-5).epsilon(1e-10));
  CHECK(k_energy(legendre(u1)) == Approx(9.64579050301724303e-5).margin(1e-6));

  for (int trial = 0; trial < 5; ++trial) {
    symplectic_potential u = random_correction(0.5);
    CHECK(k_energy(legendre(u)) == Approx(k_energy_closed(u)).margin(1e-6));
  }
}

TEST_CASE("Calabi energy: zero at the round metric, shift invariant, oracle") {
  CHECK(calabi_energy(fs_potential()) == Approx(0.0).margin(1e-12));

  symplectic_potential u({0.0, 0.0, 0.1, -0.2, 0.1});
  // frozen symbolic integral of (S-2)^2 over the polytope
  CHECK(calabi_energy(u) == Approx(0.03298369340644116749).epsilon(1e-8));

  std::vector<double> s = u.coeffs();
  s[0] += 1.0;
  CHECK(calabi_energy(symplectic_potential(s)) ==
        Approx(calabi_energy(u)).epsilon(1e-10));
}

TEST_CASE("dE: zero at the round metric and against constants") {
  invariant_potential fs = fs_potential();
  scalar_field g = scalar_field::sigmoid_poly({0.1, 0.5, -0.3});
  CHECK(k_energy_diff(fs, g) == Approx(0.0).margin(1e-10));

  invariant_potential phi = legendre(random_correction());
  CHECK(k_energy_diff(phi, scalar_field::constant(2.2)) == Approx(0.0).margin(1e-9));
}

TEST_CASE("dE matches central differences of the K-energy") {
  symplectic_potential u({0.0, 0.0, 0.15, -0.3, 0.15});
  invariant_potential phi = legendre(u);
  scalar_field g = scalar_field::sigmoid_poly({0.0, 1.0, -1.0});
  double h = 1e-4;
  double fd = (k_energy(perturb(phi, g, h)) - k_energy(perturb(phi, g, -h))) / (2.0 * h);
  CHECK(k_energy_diff(phi, g) == Approx(fd).margin(1e-6));
}

TEST_CASE("K-energy is convex along geodesics") {
  symplectic_potential u0 = symplectic_potential::fubini_study();
  symplectic_potential u1({0.0, 0.0, 0.2, -0.4, 0.2});
  std::vector<double> e;
  for (int i = 0; i < 33; ++i)
    e.push_back(k_energy(h_geodesic(u0, u1, double(i) / 32.0).potential));
  for (int i = 1; i + 1 < 33; ++i)
    CHECK(e[i + 1] - 2.0 * e[i] + e[i - 1] >= -1e-7);
}

TEST_CASE("dE at geodesic endpoints is monotone") {
  for (int trial = 0; trial < 50; ++trial) {
    symplectic_potential u0 = random_correction();
    symplectic_potential u1 = random_correction();
    std::vector<double> g = coeff_difference(u0, u1);
    auto de_at = [&](const symplectic_potential& u) {
      return kq::numerics::integrate(
                 [&](double p) {
                   return -(u.scalar_curvature(p) - 2.0) * detail::poly_eval(g, p);
                 },
                 0.0, 1.0, p_spec()).value;
    };
    CHECK(de_at(u0) <= de_at(u1) + 1e-7);
  }
}

TEST_CASE("energy gap bounded by distance times Calabi norm") {
  for (int trial = 0; trial < 50; ++trial) {
    symplectic_potential u0 = random_correction();
    symplectic_potential u1 = random_correction();
    double gap = k_energy_closed(u1) - k_energy_closed(u0);
    double bound = h_distance(u0, u1) * std::sqrt(calabi_energy(u1));
    CHECK(gap <= bound + 1e-7);
  }
}
