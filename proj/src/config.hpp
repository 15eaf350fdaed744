#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "pzbeam/assembly.hpp"
#include "pzbeam/dynamics.hpp"
#include "pzbeam/params.hpp"
#include "pzbeam/spectral.hpp"

namespace pzb::cli {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct run_config {
  material_params material;
  scheme kind = scheme::fem;
  int N = 40;
  int j_star = 0;
  std::optional<double> epsilon_probe;
  std::optional<double> tol_eps;  // absolute tolerance; unset means auto
  double t_final = 0.1;
  int samples = 400;
  initial_condition ic;
  std::string csv, snapshots;
};

scheme parse_scheme(const std::string& s);
initial_condition parse_ic(const std::string& s);

// strict schema: unknown keys and missing required material keys are rejected
run_config load_config(const std::string& path);
run_config config_from_json(const nlohmann::json& j);

}  // namespace pzb::cli
