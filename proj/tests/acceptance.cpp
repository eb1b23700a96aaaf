// Acceptance checks 1-10: one PASS/FAIL line each; exit status 1 on any failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "polariton/vqe.hpp"

using namespace polariton;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EncodingPlan plan_of(FermionMapping f, TaperMode t, BosonEncoding b = BosonEncoding::single_qubit) {
  EncodingPlan p;
  p.fermion_mapping = f;
  p.taper = t;
  p.boson_encoding = b;
  return p;
}

const PointSpec kRef{0.735, 2.0, {0.1, 0, 0}};

std::vector<double> r_grid() {
  std::vector<double> r;
  for (int i = 0; i < 10; ++i) r.push_back(0.5 + i * (2.0 - 0.5) / 9);
  return r;
}

Outcome fci_reference() {
  const double e = fci_energy(kRef);
  return {std::abs(e + 1.1295) <= 5e-4, fmt("E_FCI = %.7f Ha (target -1.1295 +- 0.0005)", e)};
}

Outcome energy_differences() {
  PointSpec p = kRef;
  p.lambda = Eigen::Vector3d::Zero();
  const double e0 = fci_energy(p);
  p.lambda.x() = 0.1;
  const double d1 = fci_energy(p) - e0;
  p.lambda.x() = 0.05;
  const double d2 = fci_energy(p) - e0;
  return {std::abs(d1 - 7.8e-3) <= 3e-4 && std::abs(d2 - 1.96e-3) <= 1.5e-4,
          fmt("dE(0.1) = %.3f mHa, dE(0.05) = %.3f mHa", 1e3 * d1, 1e3 * d2)};
}

Outcome equilibrium_shift() {
  PointSpec p = kRef;
  p.lambda = Eigen::Vector3d::Zero();
  const double r0 = fci_equilibrium(p);
  p.lambda.x() = 0.2;
  const double r2 = fci_equilibrium(p);
  return {std::abs(r0 - 0.735) <= 3e-3 && std::abs(r2 - 0.726) <= 3e-3,
          fmt("R_eq(0) = %.4f A, R_eq(0.2) = %.4f A", r0, r2)};
}

Outcome resource_counts() {
  auto res = [](const EncodingPlan& plan) { return count_resources(build_ansatz(make_problem(kRef, plan)).circuit); };
  const auto jw = res(plan_of(FermionMapping::jordan_wigner, TaperMode::none));
  const auto bk = res(plan_of(FermionMapping::bravyi_kitaev, TaperMode::none));
  const auto tp = res(plan_of(FermionMapping::bravyi_kitaev, TaperMode::parity));
  return {jw.qubits == 5 && bk.qubits == 3 && tp.qubits == 2 && tp.cnots == 2,
          fmt("qubits JW/BK/BK+taper = %zu/%zu/%zu, tapered CNOTs = %zu (JW %zu, BK %zu CNOTs reported)", jw.qubits,
              bk.qubits, tp.qubits, tp.cnots, jw.cnots, bk.cnots)};
}

Outcome ansatz_exactness() {
  double worst = 0;
  for (double lx : {0.0, 0.05, 0.1, 0.2})
    for (double r : r_grid()) {
      const auto p = make_problem(PointSpec{r, 2.0, {lx, 0, 0}}, EncodingPlan{});
      const auto a = build_ansatz(p);
      worst = std::max(worst, std::abs(vqe_exact(p.hamiltonian, a).value - fci_solve(p).energy));
    }
  return {worst <= 1e-6, fmt("max |E_VQE - E_FCI| = %.2e Ha over 40 points", worst)};
}

Outcome mitigation_recovery() {
  const auto rows = scan_dissociation(r_grid(), kRef, EncodingPlan{}, NoiseModel{}, VqeConfig{});
  int good = 0;
  std::string per;
  for (const auto& row : rows) {
    if (!row.error.empty() || !row.vqe) {
      per += " err";
      continue;
    }
    const double raw = std::abs(row.vqe->energy.at(Stage::raw).mean - row.e_fci);
    const double rz = std::abs(row.vqe->energy.at(Stage::rzne).mean - row.e_fci);
    const bool ok = rz <= 1.6e-3 && raw > 1e-2;
    good += ok;
    per += fmt(" %.3f:%.2f/%.1f%s", row.point.r_angstrom, 1e3 * rz, 1e3 * raw, ok ? "" : "*");
  }
  return {good >= 8, fmt("%d/10 points within 1.6 mHa with raw > 10 mHa; R:rzne/raw mHa", good) + per};
}

Outcome zne_decay_law() {
  const auto p = make_problem(kRef, EncodingPlan{});
  const auto a = build_ansatz(p);
  const auto theta = vqe_exact(p.hamiltonian, a).x;
  NoiseModel n = NoiseModel::ideal();
  n.p2 = 0.01;
  VqeConfig cfg;
  cfg.shots = 0;
  NoisyBackend be(a, n, cfg, std::nullopt);
  const auto v = be.measure(be.estimator(p.hamiltonian), be.states(theta, cfg.zne_factors.size()), 1);
  const ExpFit f = fit_exponential(make_series(cfg.zne_factors, v.raw));
  const double want = -double(a.circuit.count(GateKind::CNOT)) * std::log(1 - n.p2);
  const double rel = std::abs(f.g / want - 1);
  return {rel < 0.05 && !f.fallback, fmt("g = %.6f, -#CNOT ln(1-p2) = %.6f, rel. diff %.1e", f.g, want, rel)};
}

Outcome photon_number() {
  const std::vector<double> lams = {0.0, 0.05, 0.1, 0.15, 0.2};
  double worst = 0, ref_n = 0;
  for (double lx : lams) {
    const auto p = make_problem(PointSpec{0.735, 20.0, {lx, 0, 0}}, EncodingPlan{});
    const auto a = build_ansatz(p);
    const auto opt = vqe_exact(p.hamiltonian, a);
    worst = std::max(worst, std::abs(exact_photon_number(p, a, opt.x) - fci_solve(p).photon_number));
    ref_n = std::max(ref_n, std::abs(exact_photon_number(p, a, std::vector<double>(a.n_params(), 0.0))));
  }
  const auto rows = scan_coupling(lams, PointSpec{0.735, 20.0, {0, 0, 0}}, EncodingPlan{}, NoiseModel{}, VqeConfig{});
  double raw = 0, rz = 0;
  bool ok_rows = true;
  for (const auto& row : rows) {
    if (!row.vqe) {
      ok_rows = false;
      continue;
    }
    raw += std::abs(row.vqe->photon_number.at(Stage::raw).mean - row.n_fci) / double(rows.size());
    rz += std::abs(row.vqe->photon_number.at(Stage::rzne).mean - row.n_fci) / double(rows.size());
  }
  return {ok_rows && worst <= 1e-6 && ref_n == 0.0 && rz < raw,
          fmt("noiseless max dev %.1e, QED-HF <b+b> = %g, mean |err| raw %.2e vs rzne %.2e", worst, ref_n, raw, rz)};
}

Outcome xgate_ablation_check() {
  VqeConfig cfg;
  cfg.n_repeats = 20;
  const auto on = xgate_ablation(kRef, NoiseModel{}, cfg);
  NoiseModel off;
  off.gamma_ad = 0;
  const auto no = xgate_ablation(kRef, off, cfg);
  const bool ordered = std::abs(on.without_x.mean - on.e_fci) < std::abs(on.with_x.mean - on.e_fci);
  return {ordered && std::abs(no.gap_sigma) <= 2.0,
          fmt("damping on: |1> %.3f%% vs |0> %.3f%% (%.1f sigma); damping off: gap %.2f sigma",
              on.with_x.percent_error, on.without_x.percent_error, on.gap_sigma, no.gap_sigma)};
}

Outcome spectral_equivalence() {
  std::vector<std::pair<std::string, double>> e;
  for (auto f : {FermionMapping::jordan_wigner, FermionMapping::bravyi_kitaev})
    for (auto t : {TaperMode::none, TaperMode::parity})
      for (auto b : {BosonEncoding::single_qubit, BosonEncoding::unary}) {
        const auto plan = plan_of(f, t, b);
        e.emplace_back(describe(plan), fci_energy(kRef, plan));
      }
  double spread = 0;
  for (const auto& [n, v] : e) spread = std::max(spread, std::abs(v - e.front().second));
  return {spread <= 1e-9, fmt("%zu encodings, max spread %.1e Ha", e.size(), spread)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
      {"FCI reference energy", fci_reference},
      {"FCI energy differences", energy_differences},
      {"equilibrium bond shift", equilibrium_shift},
      {"resource counts", resource_counts},
      {"ansatz exactness", ansatz_exactness},
      {"mitigation recovery", mitigation_recovery},
      {"ZNE decay law", zne_decay_law},
      {"photon number", photon_number},
      {"X-gate ablation", xgate_ablation_check},
      {"cross-mapping spectra", spectral_equivalence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %-24s %s  %s [%.1fs]\n", i + 1, checks[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
