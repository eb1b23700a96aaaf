#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "polariton/vqe.hpp"

namespace polariton {

/// Everything an experiment run needs; read from an INI-style file.
struct ExperimentConfig {
  PointSpec point;
  double r_min = 0.5, r_max = 2.0;
  int r_points = 10;
  std::vector<double> lambda_x_list = {0.0, 0.05, 0.1, 0.15, 0.2};
  EncodingPlan plan;
  NoiseModel noise;
  VqeConfig vqe;
  std::string csv_path, json_path, integrals_path;
  boost::property_tree::ptree raw;  // echo for run manifests

  std::vector<double> r_grid() const {
    if (r_points < 1) throw std::invalid_argument("config: r_points must be >= 1");
    std::vector<double> r;
    for (int i = 0; i < r_points; ++i)
      r.push_back(r_points == 1 ? r_min : r_min + (r_max - r_min) * i / (r_points - 1));
    return r;
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: " + key + " expects a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& v, const std::string& key) {
  const double d = parse_double(v, key);
  if (d != static_cast<double>(static_cast<long long>(d)))
    throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  ExperimentConfig cfg;
  try {
    pt::ini_parser::read_ini(is, cfg.raw);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  using detail::parse_bool, detail::parse_double, detail::parse_int;

  const std::map<std::string, std::set<std::string>> known = {
      {"molecule", {"R_angstrom", "R_min", "R_max", "R_points", "basis"}},
      {"cavity", {"omega_ev", "lambda_x", "lambda_y", "lambda_z", "n_photon_max", "lambda_x_list"}},
      {"encoding", {"mapping", "taper", "sign_flip", "boson"}},
      {"noise", {"p1", "p2", "gamma_ad", "readout_flip"}},
      {"vqe",
       {"shots", "repeats", "ref_repeats", "zne_factors", "mitigation", "energy_tol", "param_tol", "max_iterations",
        "initial_step", "restarts", "calibration_shots", "merge_reference_equivalent"}},
      {"output", {"csv", "json", "integrals", "seed"}}};

  for (const auto& [section, body] : cfg.raw) {
    auto it = known.find(section);
    if (it == known.end()) throw std::invalid_argument("config: unknown section [" + section + "]");
    for (const auto& [key, val] : body) {
      if (!it->second.count(key)) throw std::invalid_argument("config: unknown key " + section + "." + key);
      const std::string v = val.get_value<std::string>();
      const std::string name = section + "." + key;
      if (section == "molecule") {
        if (key == "R_angstrom") cfg.point.r_angstrom = parse_double(v, name);
        else if (key == "R_min") cfg.r_min = parse_double(v, name);
        else if (key == "R_max") cfg.r_max = parse_double(v, name);
        else if (key == "R_points") cfg.r_points = static_cast<int>(parse_int(v, name));
        else if (key == "basis" && v != "sto-3g" && v != "STO-3G")
          throw std::invalid_argument("config: only the sto-3g basis is available");
      } else if (section == "cavity") {
        if (key == "omega_ev") cfg.point.omega_ev = parse_double(v, name);
        else if (key == "lambda_x") cfg.point.lambda.x() = parse_double(v, name);
        else if (key == "lambda_y") cfg.point.lambda.y() = parse_double(v, name);
        else if (key == "lambda_z") cfg.point.lambda.z() = parse_double(v, name);
        else if (key == "n_photon_max") cfg.point.n_photon_max = static_cast<int>(parse_int(v, name));
        else if (key == "lambda_x_list") {
          cfg.lambda_x_list.clear();
          for (const auto& s : detail::split_list(v)) cfg.lambda_x_list.push_back(parse_double(s, name));
        }
      } else if (section == "encoding") {
        if (key == "mapping") {
          if (v == "jw") cfg.plan.fermion_mapping = FermionMapping::jordan_wigner;
          else if (v == "bk") cfg.plan.fermion_mapping = FermionMapping::bravyi_kitaev;
          else throw std::invalid_argument("config: mapping must be jw or bk");
        } else if (key == "taper") {
          if (v == "parity") cfg.plan.taper = TaperMode::parity;
          else if (v == "none") cfg.plan.taper = TaperMode::none;
          else throw std::invalid_argument("config: taper must be parity or none");
        } else if (key == "sign_flip") {
          cfg.plan.sign_flip_reference = parse_bool(v, name);
        } else if (key == "boson") {
          if (v == "single") cfg.plan.boson_encoding = BosonEncoding::single_qubit;
          else if (v == "unary") cfg.plan.boson_encoding = BosonEncoding::unary;
          else throw std::invalid_argument("config: boson must be single or unary");
        }
      } else if (section == "noise") {
        const double d = parse_double(v, name);
        if (key == "p1") cfg.noise.p1 = d;
        else if (key == "p2") cfg.noise.p2 = d;
        else if (key == "gamma_ad") cfg.noise.gamma_ad = d;
        else if (key == "readout_flip") cfg.noise.readout_flip = d;
      } else if (section == "vqe") {
        if (key == "shots") cfg.vqe.shots = static_cast<std::uint64_t>(parse_int(v, name));
        else if (key == "repeats") cfg.vqe.n_repeats = static_cast<int>(parse_int(v, name));
        else if (key == "ref_repeats") cfg.vqe.ref_repeats = static_cast<int>(parse_int(v, name));
        else if (key == "calibration_shots") cfg.vqe.calibration_shots = static_cast<std::uint64_t>(parse_int(v, name));
        else if (key == "zne_factors") {
          cfg.vqe.zne_factors.clear();
          for (const auto& s : detail::split_list(v)) cfg.vqe.zne_factors.push_back(static_cast<int>(parse_int(s, name)));
        } else if (key == "mitigation") {
          cfg.vqe.mitigation = MitigationStack::none();
          for (const auto& s : detail::split_list(v)) {
            if (s == "readout") cfg.vqe.mitigation.readout = true;
            else if (s == "zne") cfg.vqe.mitigation.zne = true;
            else if (s == "rs") cfg.vqe.mitigation.rs = true;
            else if (s == "rzne") cfg.vqe.mitigation.rzne = true;
            else if (s != "none") throw std::invalid_argument("config: unknown mitigation '" + s + "'");
          }
          if (cfg.vqe.mitigation.rzne && !cfg.vqe.mitigation.zne)
            throw std::invalid_argument("config: rzne requires zne");
        } else if (key == "energy_tol") cfg.vqe.optimizer.energy_tol = parse_double(v, name);
        else if (key == "param_tol") cfg.vqe.optimizer.param_tol = parse_double(v, name);
        else if (key == "max_iterations") cfg.vqe.optimizer.max_iterations = static_cast<int>(parse_int(v, name));
        else if (key == "initial_step") cfg.vqe.optimizer.initial_step = parse_double(v, name);
        else if (key == "restarts") cfg.vqe.optimizer.restarts = static_cast<int>(parse_int(v, name));
        else if (key == "merge_reference_equivalent") cfg.vqe.synthesis.merge_reference_equivalent = parse_bool(v, name);
      } else if (section == "output") {
        if (key == "csv") cfg.csv_path = v;
        else if (key == "json") cfg.json_path = v;
        else if (key == "integrals") cfg.integrals_path = v;
        else if (key == "seed") cfg.vqe.seed = static_cast<std::uint64_t>(parse_int(v, name));
      }
    }
  }
  cfg.noise.validate();
  if (cfg.plan.boson_encoding == BosonEncoding::single_qubit && cfg.point.n_photon_max != 1)
    throw std::invalid_argument("config: single-qubit photon encoding requires n_photon_max = 1");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  return parse_config(is);
}

}  // namespace polariton
