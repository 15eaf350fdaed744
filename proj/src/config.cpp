#include "config.hpp"

#include <fstream>
#include <set>

namespace pzb::cli {

using nlohmann::json;

scheme parse_scheme(const std::string& s) {
  if (s == "fem") return scheme::fem;
  if (s == "orfd") return scheme::orfd;
  throw config_error("scheme must be fem or orfd, got '" + s + "'");
}

initial_condition parse_ic(const std::string& s) {
  initial_condition ic;
  if (s == "paper") return ic;
  if (s.rfind("eigenmode:", 0) == 0) {
    ic.kind = ic_kind::eigenmode;
    try {
      size_t used = 0;
      ic.index = std::stoi(s.substr(10), &used);
      if (used != s.size() - 10) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw config_error("bad eigenmode index in '" + s + "'");
    }
    return ic;
  }
  if (s.rfind("file:", 0) == 0 && s.size() > 5) {
    ic.kind = ic_kind::file;
    ic.path = s.substr(5);
    return ic;
  }
  throw config_error("ic must be paper, eigenmode:i or file:PATH, got '" + s + "'");
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw config_error(where + " must be an object");
  for (auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw config_error("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

double number(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw config_error(where + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw config_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw config_error(where + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

run_config config_from_json(const json& j) {
  run_config c;
  check_keys(j, "", {"material", "grid", "control", "filter", "simulation", "output"});
  if (!j.contains("material")) throw config_error("missing required key 'material'");
  const auto& m = j.at("material");
  check_keys(m, "material", {"rho", "mu", "alpha", "beta", "gamma", "L", "k1", "k2"});
  for (const char* k : {"rho", "mu", "alpha", "beta", "gamma", "L"})
    if (!m.contains(k)) throw config_error(std::string("missing required key 'material.") + k + "'");
  auto& mp = c.material;
  mp.rho = number(m, "material", "rho");
  mp.mu = number(m, "material", "mu");
  mp.alpha = number(m, "material", "alpha");
  mp.beta = number(m, "material", "beta");
  mp.gamma = number(m, "material", "gamma");
  mp.L = number(m, "material", "L");
  if (m.contains("k1")) mp.k1 = number(m, "material", "k1");
  if (m.contains("k2")) mp.k2 = number(m, "material", "k2");

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, "grid", {"scheme", "N"});
    if (g.contains("scheme")) c.kind = parse_scheme(text(g, "grid", "scheme"));
    if (g.contains("N")) c.N = integer(g, "grid", "N");
  }
  if (j.contains("control")) {
    const auto& k = j.at("control");
    check_keys(k, "control", {"k1", "k2"});
    if (k.contains("k1")) mp.k1 = number(k, "control", "k1");
    if (k.contains("k2")) mp.k2 = number(k, "control", "k2");
  }
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    check_keys(f, "filter", {"j_star", "epsilon_probe", "tol_eps"});
    if (f.contains("j_star")) c.j_star = integer(f, "filter", "j_star");
    if (f.contains("epsilon_probe")) c.epsilon_probe = number(f, "filter", "epsilon_probe");
    if (f.contains("tol_eps")) {
      const auto& t = f.at("tol_eps");
      if (t.is_string()) {
        if (t.get<std::string>() != "auto") throw config_error("filter.tol_eps must be a number or \"auto\"");
      } else {
        c.tol_eps = number(f, "filter", "tol_eps");
      }
    }
  }
  if (j.contains("simulation")) {
    const auto& s = j.at("simulation");
    check_keys(s, "simulation", {"T_final", "samples", "ic"});
    if (s.contains("T_final")) c.t_final = number(s, "simulation", "T_final");
    if (s.contains("samples")) c.samples = integer(s, "simulation", "samples");
    if (s.contains("ic")) c.ic = parse_ic(text(s, "simulation", "ic"));
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, "output", {"csv", "snapshots"});
    if (o.contains("csv")) c.csv = text(o, "output", "csv");
    if (o.contains("snapshots")) c.snapshots = text(o, "output", "snapshots");
  }
  return c;
}

run_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw config_error("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pzb::cli
