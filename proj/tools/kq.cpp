// kq - command line driver for the CP^1 quantization studies
#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "kq/config.hpp"

namespace {

std::vector<double> parse_coeff_list(const std::string& s) {
  std::vector<double> c;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    c.push_back(std::stod(tok));
  }
  return c;
}

kq::toric::symplectic_potential parse_potential(const std::string& s, const char* which) {
  try {
    return kq::toric::symplectic_potential(parse_coeff_list(s));
  } catch (const std::exception& e) {
    throw kq::contract_error(std::string(which) + ": " + e.what());
  }
}

std::vector<int> parse_kgrid(const std::string& s) {
  std::vector<int> ks;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    ks.push_back(std::stoi(tok));
  }
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman-space approximations of S^1-invariant Kahler geometry on CP^1"};
  app.require_subcommand(1);

  // kq run <config>
  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run every study in a JSON config");
  run->add_option("config", config_path, "config file")->required();

  // kq study <kind> ...
  std::string kind_str, u0_str, u1_str, u2_str, kgrid_str, out_dir = "out";
  double t = 0.5, eps = 0.05;
  double tol = -1.0;
  std::uint64_t seed = 0;
  int samples = 0;
  CLI::App* study = app.add_subcommand("study", "run a single study");
  study->add_option("kind", kind_str,
                    "distance|speed|accel|gradient|dzdt|angle|ineq1|ineq2|tyz|sandwich|"
                    "iquant|zconvex|lemmas")
      ->required();
  study->add_option("--u0", u0_str, "potential coefficients c0,c1,... of u0");
  study->add_option("--u1", u1_str, "potential coefficients of u1");
  study->add_option("--u2", u2_str, "potential coefficients of u2 (angle study)");
  study->add_option("--k", kgrid_str, "comma-separated k grid, each in [4,256]");
  study->add_option("--t", t, "path time for speed/accel/dzdt");
  study->add_option("--eps", eps, "perturbation size for the lemmas study");
  study->add_option("--tol", tol, "pass tolerance override");
  study->add_option("--seed", seed, "seed for the sampled studies");
  study->add_option("--samples", samples, "sample count for the sampled studies");
  study->add_option("--out", out_dir, "output directory");

  // kq density --k K --u ...
  std::string u_str;
  int density_k = 8, density_grid = 65;
  CLI::App* density = app.add_subcommand("density", "print the density of states on a grid");
  density->add_option("--k", density_k, "level")->required();
  density->add_option("--u", u_str, "potential coefficients")->required();
  density->add_option("--grid", density_grid, "number of grid points");

  // kq dist --u0 ... --u1 ...
  std::string d0_str, d1_str;
  CLI::App* dist = app.add_subcommand("dist", "toric geodesic distance between two potentials");
  dist->add_option("--u0", d0_str, "potential coefficients")->required();
  dist->add_option("--u1", d1_str, "potential coefficients")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return kq::experiments::run_config(config_path, std::cout);

    if (*study) {
      kq::experiments::study_kind kind = kq::experiments::parse_kind(kind_str);
      kq::experiments::study_inputs in;
      if (!u0_str.empty()) in.u0 = parse_potential(u0_str, "--u0");
      if (!u1_str.empty()) in.u1 = parse_potential(u1_str, "--u1");
      if (!u2_str.empty()) in.u2 = parse_potential(u2_str, "--u2");
      if (!kgrid_str.empty()) in.kgrid = parse_kgrid(kgrid_str);
      in.t = t;
      in.eps = eps;
      if (tol >= 0.0) in.tol = tol;
      in.seed = seed;
      in.samples = samples;
      kq::experiments::convergence_report rep = kq::experiments::run_study(kind, in);
      std::filesystem::create_directories(out_dir);
      kq::experiments::write_csv(rep, std::filesystem::path(out_dir) /
                                          (std::string(kind_name(kind)) + ".csv"));
      kq::experiments::write_json(rep, in, std::filesystem::path(out_dir) /
                                               (std::string(kind_name(kind)) + ".json"));
      for (const auto& r : rep.rows)
        std::printf("%-8g value=%- .12e limit=%- .12e rel_err=%.3e\n", r.k, r.value,
                    r.limit, r.rel_err);
      if (rep.fitted_order) std::printf("fitted order: %.3f\n", *rep.fitted_order);
      std::printf("%s: %s\n", kind_name(kind), rep.pass ? "pass" : "FAIL");
      return rep.pass ? 0 : 1;
    }

    if (*density) {
      kq::toric::symplectic_potential u = parse_potential(u_str, "--u");
      kq::toric::invariant_potential phi = kq::toric::legendre(u);
      kq::quantize::quant_level lv(density_k);
      kq::quantize::bergman_density rho(phi, lv);
      std::printf("x,p,rho\n");
      for (int i = 1; i <= density_grid; ++i) {
        double q = double(i) / double(density_grid + 1);
        double x = std::log(q) - std::log1p(-q);
        std::printf("%.17g,%.17g,%.17g\n", x, phi.moment(x), rho(x));
      }
      std::fprintf(stderr, "mass %.12f (sections %d)\n", rho.mass(), lv.sections());
      return 0;
    }

    if (*dist) {
      kq::toric::symplectic_potential a = parse_potential(d0_str, "--u0");
      kq::toric::symplectic_potential b = parse_potential(d1_str, "--u1");
      std::printf("%.17g\n", kq::toric::h_distance(a, b));
      return 0;
    }
  } catch (const kq::contract_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const kq::degenerate_triangle& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const kq::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
