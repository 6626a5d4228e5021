#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kq/studies.hpp"

namespace kq::experiments {

struct study_entry {
  study_kind kind;
  study_inputs inputs;
};

struct run_config_data {
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<study_entry> studies;
};

namespace detail {

inline symplectic_potential parse_potential(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array())
    throw contract_error(where + ": potential must be an object {\"coeffs\": [c0, c1, ...]}");
  std::vector<double> c;
  for (const auto& v : j["coeffs"]) {
    if (!v.is_number()) throw contract_error(where + ": coefficients must be numbers");
    c.push_back(v.get<double>());
  }
  try {
    return symplectic_potential(c);
  } catch (const std::exception& e) {
    throw contract_error(where + ": " + e.what());
  }
}

}  // namespace detail

inline run_config_data parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw contract_error("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw contract_error("config: JSON parse failure in " + path.string() + ": " + e.what());
  }
  run_config_data cfg;
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (!j.contains("studies") || !j["studies"].is_array() || j["studies"].empty())
    throw contract_error("config: needs a non-empty \"studies\" array");
  int idx = 0;
  for (const auto& s : j["studies"]) {
    std::string where = "config: studies[" + std::to_string(idx) + "]";
    if (!s.is_object() || !s.contains("kind"))
      throw contract_error(where + ": missing \"kind\"");
    study_entry e;
    e.kind = parse_kind(s["kind"].get<std::string>());
    e.inputs.seed = cfg.seed;
    if (s.contains("u0")) e.inputs.u0 = detail::parse_potential(s["u0"], where + ".u0");
    if (s.contains("u1")) e.inputs.u1 = detail::parse_potential(s["u1"], where + ".u1");
    if (s.contains("u2")) e.inputs.u2 = detail::parse_potential(s["u2"], where + ".u2");
    if (s.contains("kgrid")) {
      for (const auto& v : s["kgrid"]) e.inputs.kgrid.push_back(v.get<int>());
    }
    if (s.contains("t")) e.inputs.t = s["t"].get<double>();
    if (s.contains("eps")) e.inputs.eps = s["eps"].get<double>();
    if (s.contains("tol")) e.inputs.tol = s["tol"].get<double>();
    if (s.contains("seed")) e.inputs.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("samples")) e.inputs.samples = s["samples"].get<int>();
    cfg.studies.push_back(std::move(e));
    ++idx;
  }
  return cfg;
}

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const convergence_report& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw contract_error("report: cannot write " + path.string());
  out << "k,value,limit,abs_err,rel_err\n";
  for (const auto& r : rep.rows)
    out << format_g17(r.k) << ',' << format_g17(r.value) << ',' << format_g17(r.limit)
        << ',' << format_g17(r.abs_err) << ',' << format_g17(r.rel_err) << '\n';
}

inline nlohmann::json inputs_json(const study_inputs& in) {
  nlohmann::json j;
  auto coeffs = [](const symplectic_potential& u) { return nlohmann::json(u.coeffs()); };
  if (in.u0) j["u0"] = {{"coeffs", coeffs(*in.u0)}};
  if (in.u1) j["u1"] = {{"coeffs", coeffs(*in.u1)}};
  if (in.u2) j["u2"] = {{"coeffs", coeffs(*in.u2)}};
  j["kgrid"] = in.kgrid;
  j["t"] = in.t;
  j["eps"] = in.eps;
  if (in.tol) j["tol"] = *in.tol;
  j["seed"] = in.seed;
  j["samples"] = in.samples;
  return j;
}

inline void write_json(const convergence_report& rep, const study_inputs& in,
                       const std::filesystem::path& path) {
  nlohmann::json j;
  j["study"] = kind_name(rep.kind);
  j["inputs"] = inputs_json(in);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rep.rows)
    j["rows"].push_back({{"k", r.k},
                         {"value", r.value},
                         {"limit", r.limit},
                         {"abs_err", r.abs_err},
                         {"rel_err", r.rel_err}});
  if (rep.fitted_order) j["fitted_order"] = *rep.fitted_order;
  else j["fitted_order"] = nullptr;
  j["tolerance"] = rep.tolerance;
  j["pass"] = rep.pass;
  j["note"] = rep.note;
  std::ofstream out(path);
  if (!out) throw contract_error("report: cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Runs every study in the config, writes one CSV and one JSON per study.
// Exit status: 0 all pass, 1 numeric/tolerance failure, 2 invalid input.
inline int run_config(const std::filesystem::path& config_path, std::ostream& log) {
  run_config_data cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const contract_error& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  bool all_pass = true;
  int idx = 0;
  for (const auto& e : cfg.studies) {
    std::string stem = (cfg.studies.size() > 1 ? std::to_string(idx) + "_" : "") +
                       kind_name(e.kind);
    convergence_report rep;
    try {
      rep = run_study(e.kind, e.inputs);
    } catch (const contract_error& err) {
      log << "error: study " << kind_name(e.kind) << ": " << err.what() << "\n";
      return 2;
    } catch (const degenerate_triangle& err) {
      log << "error: study " << kind_name(e.kind) << ": " << err.what() << "\n";
      return 2;
    } catch (const kq::domain_error& err) {
      log << "error: study " << kind_name(e.kind) << ": " << err.what() << "\n";
      return 2;
    } catch (const std::exception& err) {
      log << "error: study " << kind_name(e.kind) << " failed numerically: " << err.what()
          << "\n";
      return 1;
    }
    write_csv(rep, cfg.out_dir / (stem + ".csv"));
    write_json(rep, e.inputs, cfg.out_dir / (stem + ".json"));
    log << kind_name(e.kind) << ": " << (rep.pass ? "pass" : "FAIL");
    if (rep.fitted_order) log << "  (fitted order " << *rep.fitted_order << ")";
    log << "\n";
    all_pass = all_pass && rep.pass;
    ++idx;
  }
  return all_pass ? 0 : 1;
}

}  // namespace kq::experiments
