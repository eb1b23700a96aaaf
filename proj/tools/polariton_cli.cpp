// Command-line driver: integrals, fci, vqe, scan-r, scan-lambda, ablate-xgate, resources.
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <gsl/gsl_version.h>
#include <nlohmann/json.hpp>

#include "polariton/config.hpp"

using namespace polariton;
using nlohmann::json;

namespace {

json ptree_to_json(const boost::property_tree::ptree& t) {
  json out = json::object();
  for (const auto& [section, body] : t) {
    json s = json::object();
    for (const auto& [k, v] : body) s[k] = v.get_value<std::string>();
    out[section] = s;
  }
  return out;
}

json effective_config(const ExperimentConfig& c) {
  json j;
  j["molecule"] = {{"R_angstrom", c.point.r_angstrom}, {"R_min", c.r_min}, {"R_max", c.r_max},
                   {"R_points", c.r_points}, {"basis", "sto-3g"}};
  j["cavity"] = {{"omega_ev", c.point.omega_ev},
                 {"lambda", {c.point.lambda.x(), c.point.lambda.y(), c.point.lambda.z()}},
                 {"n_photon_max", c.point.n_photon_max},
                 {"lambda_x_list", c.lambda_x_list}};
  j["encoding"] = describe(c.plan);
  j["noise"] = {{"p1", c.noise.p1}, {"p2", c.noise.p2}, {"gamma_ad", c.noise.gamma_ad},
                {"readout_flip", c.noise.readout_flip}};
  std::vector<std::string> stack;
  for (Stage s : kAllStages)
    if (c.vqe.mitigation.enabled(s)) stack.push_back(to_string(s));
  j["vqe"] = {{"shots", c.vqe.shots},
              {"repeats", c.vqe.n_repeats},
              {"ref_repeats", c.vqe.ref_repeats},
              {"zne_factors", c.vqe.zne_factors},
              {"mitigation", stack},
              {"energy_tol", c.vqe.optimizer.energy_tol},
              {"param_tol", c.vqe.optimizer.param_tol},
              {"max_iterations", c.vqe.optimizer.max_iterations},
              {"initial_step", c.vqe.optimizer.initial_step},
              {"restarts", c.vqe.optimizer.restarts},
              {"calibration_shots", c.vqe.calibration_shots},
              {"merge_reference_equivalent", c.vqe.synthesis.merge_reference_equivalent}};
  j["seed"] = c.vqe.seed;
  return j;
}

json versions() {
  return {{"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"gsl", GSL_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"cli11", CLI11_VERSION}};
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class CsvOut {
 public:
  explicit CsvOut(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "R,lambda_x,E_fci";
  for (Stage s : kAllStages) os << ",E_" << to_string(s);
  for (Stage s : kAllStages) os << ",rmse_" << to_string(s);
  os << ",n_fci";
  for (Stage s : kAllStages) os << ",n_" << to_string(s);
  os << ",iterations_mean,iterations_std,error\n";
  for (const auto& r : rows) {
    os << num(r.point.r_angstrom) << ',' << num(r.point.lambda.x()) << ',' << num(r.e_fci);
    auto stage_cols = [&](auto get) {
      for (Stage s : kAllStages) {
        os << ',';
        if (r.vqe && r.vqe->energy.count(s)) os << num(get(s));
      }
    };
    stage_cols([&](Stage s) { return r.vqe->energy.at(s).mean; });
    stage_cols([&](Stage s) { return r.vqe->energy.at(s).rmse; });
    os << ',' << num(r.n_fci);
    stage_cols([&](Stage s) { return r.vqe->photon_number.at(s).mean; });
    os << ',';
    if (r.vqe) os << num(r.vqe->iterations.mean) << ',' << num(r.vqe->iterations.rmse);
    else os << ',';
    os << ',' << (r.error.empty() ? "" : "\"" + r.error + "\"") << '\n';
  }
}

json rows_json(const std::vector<ScanRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    json j = {{"R", r.point.r_angstrom}, {"lambda_x", r.point.lambda.x()}, {"E_fci", r.e_fci}, {"n_fci", r.n_fci}};
    if (!r.error.empty()) j["error"] = r.error;
    if (r.vqe) {
      j["converged_all"] = !r.vqe->any_not_converged;
      j["calibration_condition"] = r.vqe->calibration_condition;
      std::vector<std::uint64_t> seeds;
      bool zfb = false, rfb = false;
      for (const auto& rep : r.vqe->repeats) {
        seeds.push_back(rep.seed);
        zfb |= rep.energy.zne_fallback;
        rfb |= rep.energy.rzne_fallback;
      }
      j["repeat_seeds"] = seeds;
      j["zne_fallback"] = zfb;
      j["rzne_fallback"] = rfb;
    }
    a.push_back(j);
  }
  return a;
}

struct Run {
  ExperimentConfig cfg;
  std::string command;
  std::string config_path;
  json results = json::object();
  std::vector<std::string> outputs;

  void finish() {
    if (cfg.json_path.empty()) return;
    json m;
    m["command"] = command;
    m["config_file"] = config_path;
    m["config"] = ptree_to_json(cfg.raw);
    m["effective"] = effective_config(cfg);
    m["seed"] = cfg.vqe.seed;
    m["versions"] = versions();
    m["created_utc"] = utc_now();
    m["outputs"] = outputs;
    m["results"] = results;
    std::ofstream os(cfg.json_path);
    if (!os) throw std::runtime_error("cannot write " + cfg.json_path);
    os << m.dump(2) << '\n';
  }
};

void cmd_integrals(Run& run) {
  const auto sys = compute_sto3g_h2(h2_geometry(run.cfg.point.r_angstrom));
  const auto cav = cavity_from_ev(run.cfg.point.omega_ev, run.cfg.point.lambda, run.cfg.point.n_photon_max);
  const std::string path = run.cfg.integrals_path;
  if (path.empty() || path == "-") save_integrals(std::cout, sys.integrals, cav);
  else {
    save_integrals(path, sys.integrals, cav);
    run.outputs.push_back(path);
  }
  run.results = {{"hf_energy", sys.scf.energy}, {"scf_cycles", sys.scf.cycles},
                 {"qed_hf_energy", qed_hf_reference(sys.integrals, cav).energy}};
}

EncodedProblem load_problem(const Run& run, const std::string& from_file) {
  if (from_file.empty()) return make_problem(run.cfg.point, run.cfg.plan);
  const auto [ints, cav] = load_integrals(from_file);
  return encode_problem(ints, cav, run.cfg.plan);
}

void cmd_fci(Run& run, const std::string& from_file) {
  const auto p = load_problem(run, from_file);
  const auto f = fci_solve(p);
  CsvOut out(run.cfg.csv_path);
  out.os() << "R,lambda_x,encoding,n_qubits,E_fci,n_fci,E_qedhf,sector_dim,residual\n"
           << num(run.cfg.point.r_angstrom) << ',' << num(p.cavity.lambda.x()) << ',' << describe(p.mapper.plan())
           << ',' << p.n_qubits() << ',' << num(f.energy) << ',' << num(f.photon_number) << ','
           << num(p.reference.energy) << ',' << f.sector_dim << ',' << num(f.residual) << '\n';
  if (!run.cfg.csv_path.empty()) run.outputs.push_back(run.cfg.csv_path);
  run.results = {{"E_fci", f.energy}, {"n_fci", f.photon_number}, {"E_qedhf", p.reference.energy},
                 {"n_qubits", p.n_qubits()}, {"warnings", p.warnings}};
}

void cmd_vqe(Run& run) {
  const auto rows = std::vector<ScanRow>{run_point(run.cfg.point, run.cfg.plan, run.cfg.noise, run.cfg.vqe, true)};
  CsvOut out(run.cfg.csv_path);
  write_scan_csv(out.os(), rows);
  if (!run.cfg.csv_path.empty()) run.outputs.push_back(run.cfg.csv_path);
  run.results["rows"] = rows_json(rows);
  if (!rows[0].error.empty()) throw std::runtime_error(rows[0].error);
}

void cmd_scan(Run& run, bool over_r, bool with_vqe) {
  const auto rows = over_r ? scan_dissociation(run.cfg.r_grid(), run.cfg.point, run.cfg.plan, run.cfg.noise, run.cfg.vqe, with_vqe)
                           : scan_coupling(run.cfg.lambda_x_list, run.cfg.point, run.cfg.plan, run.cfg.noise, run.cfg.vqe, with_vqe);
  CsvOut out(run.cfg.csv_path);
  write_scan_csv(out.os(), rows);
  if (!run.cfg.csv_path.empty()) run.outputs.push_back(run.cfg.csv_path);
  run.results["rows"] = rows_json(rows);
  int failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  if (failed) std::fprintf(stderr, "warning: %d point(s) failed, see the error column\n", failed);
}

void cmd_ablate(Run& run) {
  const auto r = xgate_ablation(run.cfg.point, run.cfg.noise, run.cfg.vqe, run.cfg.plan);
  CsvOut out(run.cfg.csv_path);
  out.os() << "variant,E_mean,E_std,percent_error,E_fci\n";
  for (const auto* arm : {&r.with_x, &r.without_x})
    out.os() << (arm->sign_flip ? "sign_flipped_0" : "x_gates_1") << ',' << num(arm->mean) << ','
             << num(arm->std_dev) << ',' << num(arm->percent_error) << ',' << num(r.e_fci) << '\n';
  if (!run.cfg.csv_path.empty()) run.outputs.push_back(run.cfg.csv_path);
  run.results = {{"E_fci", r.e_fci},
                 {"gap_sigma", r.gap_sigma},
                 {"x_gates_1", {{"mean", r.with_x.mean}, {"energies", r.with_x.energies}}},
                 {"sign_flipped_0", {{"mean", r.without_x.mean}, {"energies", r.without_x.energies}}}};
}

void cmd_resources(Run& run) {
  CsvOut out(run.cfg.csv_path);
  out.os() << "encoding,qubits,cnots,cnots_unmerged,params,gates\n";
  json a = json::array();
  std::vector<EncodingPlan> plans(3, run.cfg.plan);
  plans[0].fermion_mapping = FermionMapping::jordan_wigner;
  plans[0].taper = TaperMode::none;
  plans[1].fermion_mapping = FermionMapping::bravyi_kitaev;
  plans[1].taper = TaperMode::none;
  plans[2].fermion_mapping = FermionMapping::bravyi_kitaev;
  plans[2].taper = TaperMode::parity;
  for (const auto& plan : plans) {
    const auto p = make_problem(run.cfg.point, plan);
    SynthesisOptions merged = run.cfg.vqe.synthesis, plain = merged;
    merged.merge_reference_equivalent = true;
    plain.merge_reference_equivalent = false;
    const auto r = count_resources(build_ansatz(p, merged).circuit);
    const auto u = count_resources(build_ansatz(p, plain).circuit);
    out.os() << describe(plan) << ',' << r.qubits << ',' << r.cnots << ',' << u.cnots << ',' << r.params << ','
             << r.gates << '\n';
    a.push_back({{"encoding", describe(plan)}, {"qubits", r.qubits}, {"cnots", r.cnots},
                 {"cnots_unmerged", u.cnots}, {"params", r.params}, {"gates", r.gates}});
  }
  if (!run.cfg.csv_path.empty()) run.outputs.push_back(run.cfg.csv_path);
  run.results["encodings"] = a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polaritonic H2 on an emulated noisy device"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  std::string config_path, csv, json_out, integrals_file, dump_circuit;
  std::int64_t seed = -1;
  bool fci_only = false;
  app.add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--csv", csv, "CSV output path ('-' for stdout)");
  app.add_option("--json", json_out, "JSON manifest path");
  app.add_option("--seed", seed, "base seed override");

  auto* integrals = app.add_subcommand("integrals", "compute STO-3G integrals and write the integral file");
  integrals->add_option("-o,--output", integrals_file, "integral file ('-' for stdout)");
  auto* fci = app.add_subcommand("fci", "exact ground state in the physical sector");
  fci->add_option("--integrals", integrals_file, "read integrals from file instead of computing them")
      ->check(CLI::ExistingFile);
  auto* vqe = app.add_subcommand("vqe", "noisy VQE with mitigation at one geometry");
  vqe->add_option("--dump-circuit", dump_circuit, "write the parameterized ansatz circuit");
  auto* scan_r = app.add_subcommand("scan-r", "bond-length scan");
  scan_r->add_flag("--fci-only", fci_only, "skip VQE");
  auto* scan_l = app.add_subcommand("scan-lambda", "coupling scan at the per-coupling equilibrium");
  scan_l->add_flag("--fci-only", fci_only, "skip VQE");
  auto* ablate = app.add_subcommand("ablate-xgate", "X-gate preparation vs sign-flipped reference");
  auto* resources = app.add_subcommand("resources", "qubit and CNOT counts per encoding");

  CLI11_PARSE(app, argc, argv);

  try {
    Run run;
    run.cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    run.config_path = config_path;
    if (!csv.empty()) run.cfg.csv_path = csv;
    if (!json_out.empty()) run.cfg.json_path = json_out;
    if (seed >= 0) run.cfg.vqe.seed = static_cast<std::uint64_t>(seed);
    if (!integrals_file.empty() && app.got_subcommand(integrals)) run.cfg.integrals_path = integrals_file;
    run.command = app.get_subcommands().front()->get_name();

    const auto t0 = std::chrono::steady_clock::now();
    if (app.got_subcommand(integrals)) cmd_integrals(run);
    else if (app.got_subcommand(fci)) cmd_fci(run, integrals_file);
    else if (app.got_subcommand(vqe)) {
      if (!dump_circuit.empty()) {
        std::ofstream os(dump_circuit);
        os << build_ansatz(make_problem(run.cfg.point, run.cfg.plan), run.cfg.vqe.synthesis).circuit.dump();
        run.outputs.push_back(dump_circuit);
      }
      cmd_vqe(run);
    } else if (app.got_subcommand(scan_r)) cmd_scan(run, true, !fci_only);
    else if (app.got_subcommand(scan_l)) cmd_scan(run, false, !fci_only);
    else if (app.got_subcommand(ablate)) cmd_ablate(run);
    else if (app.got_subcommand(resources)) cmd_resources(run);
    run.results["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.finish();
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
