#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kq/config.hpp"

using namespace kq::experiments;
using kq::toric::symplectic_potential;
using Catch::Approx;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / ("kq_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("kind round trip") {
  for (const char* n : {"distance", "speed", "accel", "gradient", "dzdt", "angle", "ineq1",
                        "ineq2", "tyz", "sandwich", "iquant", "zconvex", "lemmas"})
    CHECK(std::string(kind_name(parse_kind(n))) == n);
  CHECK_THROWS_AS(parse_kind("bogus"), kq::contract_error);
}

TEST_CASE("distance study on the flat direction matches the closed form") {
  // u1 = u0 - c: value_k = c sqrt(1 + 1/k), limit c
  study_inputs in;
  double c = 0.7;
  in.u0 = symplectic_potential();
  in.u1 = symplectic_potential({-c});
  in.kgrid = {8, 16, 32};
  convergence_report rep = run_study(study_kind::distance, in);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    double expect = c * std::sqrt(1.0 + 1.0 / r.k);
    CHECK(r.value == Approx(expect).margin(1e-9));
    CHECK(r.limit == Approx(c).margin(1e-12));
    CHECK(r.rel_err == Approx(std::sqrt(1.0 + 1.0 / r.k) - 1.0).margin(1e-9));
  }
  CHECK(rep.pass);
}

TEST_CASE("speed study on the constant path is identically zero") {
  study_inputs in;
  in.u0 = symplectic_potential({0.0, 0.2, -0.2});
  in.u1 = in.u0;
  in.kgrid = {8, 16};
  convergence_report rep = run_study(study_kind::speed, in);
  for (const auto& r : rep.rows) {
    CHECK(std::abs(r.value) < 1e-12);
    CHECK(std::abs(r.limit) < 1e-12);
  }
}

TEST_CASE("gradient study at the round potential is flat zero") {
  study_inputs in;
  in.u0 = symplectic_potential();
  in.kgrid = {8, 16};
  convergence_report rep = run_study(study_kind::gradient, in);
  for (const auto& r : rep.rows) CHECK(r.value <= 1e-8);
  CHECK(rep.rows.back().limit == Approx(0.0).margin(1e-12));
  CHECK(rep.pass);
}

TEST_CASE("angle study agrees with the toric triangle as k grows") {
  study_inputs in;
  in.u0 = symplectic_potential({-0.4});
  in.u1 = symplectic_potential();
  in.u2 = symplectic_potential({0.0, 0.4, -0.4});
  in.kgrid = {8, 16, 32};
  convergence_report rep = run_study(study_kind::angle, in);
  CHECK(rep.rows.back().abs_err < rep.rows.front().abs_err);
  CHECK(rep.rows.back().abs_err < 0.05);
}

TEST_CASE("inequality studies hold on seeded samples") {
  study_inputs in;
  in.samples = 8;
  in.seed = 5;
  convergence_report r1 = run_study(study_kind::ineq1, in);
  CHECK(r1.rows.size() == 8);
  CHECK(r1.pass);
  convergence_report r2 = run_study(study_kind::ineq2, in);
  CHECK(r2.pass);
  CHECK_FALSE(r2.fitted_order.has_value());
}

TEST_CASE("sandwich and zconvex studies pass on small grids") {
  study_inputs in;
  in.samples = 4;
  in.seed = 11;
  in.kgrid = {8, 16};
  CHECK(run_study(study_kind::sandwich, in).pass);
  in.samples = 3;
  CHECK(run_study(study_kind::zconvex, in).pass);
}

TEST_CASE("lemmas study measures slack on a quantized near-geodesic") {
  study_inputs in;
  in.u0 = symplectic_potential();
  in.u1 = symplectic_potential({0.0, 0.4, -0.4});
  in.eps = 0.03;
  in.kgrid = {8, 16};
  convergence_report rep = run_study(study_kind::lemmas, in);
  CHECK(rep.pass);
  for (const auto& r : rep.rows) CHECK(r.value > 0.0);  // strict slack here
}

TEST_CASE("missing required potentials are contract errors") {
  study_inputs in;
  in.kgrid = {8};
  CHECK_THROWS_AS(run_study(study_kind::distance, in), kq::contract_error);
  in.u0 = symplectic_potential();
  CHECK_THROWS_AS(run_study(study_kind::distance, in), kq::contract_error);
}

TEST_CASE("k grid is validated") {
  study_inputs in;
  in.u0 = symplectic_potential();
  in.u1 = symplectic_potential({-0.5});
  in.kgrid = {2, 8};
  CHECK_THROWS_AS(run_study(study_kind::distance, in), kq::contract_error);
  in.kgrid = {8, 512};
  CHECK_THROWS_AS(run_study(study_kind::distance, in), kq::contract_error);
  in.kgrid = {16, 8};
  CHECK_THROWS_AS(run_study(study_kind::distance, in), kq::contract_error);
}

TEST_CASE("run_config writes reports and round trips bit for bit") {
  std::filesystem::path dir = temp_dir("cfg");
  std::filesystem::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({
      "out_dir": ")" << (dir / "out").string() << R"(",
      "seed": 3,
      "studies": [
        {"kind": "tyz", "u0": {"coeffs": [0, 0, 0.2, -0.4, 0.2]}, "kgrid": [16, 32, 64, 128]}
      ]
    })";
  }
  std::ostringstream log;
  int rc = run_config(cfg, log);
  CHECK(rc == 0);
  std::filesystem::path csv = dir / "out" / "tyz.csv";
  std::filesystem::path json = dir / "out" / "tyz.json";
  REQUIRE(std::filesystem::exists(csv));
  REQUIRE(std::filesystem::exists(json));
  std::string first_csv = slurp(csv), first_json = slurp(json);
  CHECK(first_csv.rfind("k,value,limit,abs_err,rel_err\n", 0) == 0);

  // deterministic reruns reproduce the artifacts exactly
  std::ostringstream log2;
  CHECK(run_config(cfg, log2) == 0);
  CHECK(slurp(csv) == first_csv);
  CHECK(slurp(json) == first_json);
}

TEST_CASE("malformed potentials exit with status 2 and name the coefficients") {
  std::filesystem::path dir = temp_dir("bad");
  std::filesystem::path cfg = dir / "bad.json";
  {
    std::ofstream out(cfg);
    out << R"({"studies": [{"kind": "tyz", "u0": {"coeffs": [0, 0, -3.0]}}]})";
  }
  std::ostringstream log;
  CHECK(run_config(cfg, log) == 2);
  CHECK(log.str().find("-3") != std::string::npos);
}

TEST_CASE("tolerance failure exits with status 1") {
  std::filesystem::path dir = temp_dir("tolfail");
  std::filesystem::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    // an unreachable tolerance on an otherwise fine study
    out << R"({"out_dir": ")" << (dir / "out").string() << R"(",
      "studies": [{"kind": "distance",
                   "u0": {"coeffs": [0]},
                   "u1": {"coeffs": [0, 0.5, -0.5]},
                   "kgrid": [8, 16], "tol": 1e-30}]})";
  }
  std::ostringstream log;
  CHECK(run_config(cfg, log) == 1);
  CHECK(log.str().find("distance") != std::string::npos);
}

TEST_CASE("parse failures exit with status 2") {
  std::filesystem::path dir = temp_dir("parse");
  std::filesystem::path cfg = dir / "broken.json";
  {
    std::ofstream out(cfg);
    out << "{ not json";
  }
  std::ostringstream log;
  CHECK(run_config(cfg, log) == 2);
  CHECK(run_config(dir / "missing.json", log) == 2);
}

TEST_CASE("iquant study is exact on the flat direction") {
  study_inputs in;
  in.u0 = symplectic_potential({-0.31});
  in.kgrid = {8, 16, 32, 64};
  convergence_report rep = run_study(study_kind::iquant, in);
  for (const auto& r : rep.rows)
    CHECK(r.value == Approx((1.0 + 1.0 / r.k) * 0.31).margin(1e-9));
  CHECK(rep.rows.back().limit == Approx(0.31).margin(1e-9));
  CHECK(rep.pass);
}
