#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "polariton/chem.hpp"
#include "polariton/circuit.hpp"
#include "polariton/exact.hpp"
#include "polariton/hamiltonian.hpp"
#include "polariton/mitigation.hpp"
#include "polariton/optimizer.hpp"
#include "polariton/simulator.hpp"

namespace polariton {

enum class Stage { raw, readout, zne, rs, rzne };
inline constexpr Stage kAllStages[] = {Stage::raw, Stage::readout, Stage::zne, Stage::rs, Stage::rzne};

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::raw: return "raw";
    case Stage::readout: return "ro";
    case Stage::zne: return "zne";
    case Stage::rs: return "rs";
    case Stage::rzne: return "rzne";
  }
  return "?";
}

/// Mitigation techniques that can be switched on.
struct MitigationStack {
  bool readout = true;
  bool zne = true;
  bool rs = true;
  bool rzne = true;

  static MitigationStack none() { return {false, false, false, false}; }
  bool enabled(Stage s) const {
    switch (s) {
      case Stage::raw: return true;
      case Stage::readout: return readout;
      case Stage::zne: return zne;
      case Stage::rs: return rs;
      case Stage::rzne: return rzne && zne;
    }
    return false;
  }
};

struct VqeConfig {
  std::uint64_t shots = 20000;  // 0 = exact expectations (noise channels still applied)
  int n_repeats = 10;
  int ref_repeats = 50;
  std::vector<int> zne_factors = {1, 3, 5, 51, 101, 201};
  MitigationStack mitigation;
  NelderMeadOptions optimizer;
  std::uint64_t calibration_shots = 20000;
  std::uint64_t seed = 20240229;
  SynthesisOptions synthesis;
};

// --- ansatz -----------------------------------------------------------------------

struct Ansatz {
  GeneratorPool pool;
  Circuit circuit;  // parameterized
  std::uint64_t reference_bits = 0;

  std::size_t n_params() const { return circuit.n_params(); }
};

inline Ansatz build_ansatz(const EncodedProblem& p, const SynthesisOptions& opt = {}) {
  Ansatz a;
  a.pool = build_pucc_pool(p.integrals, p.mapper);
  a.reference_bits = p.mapper.frame_reference_bits();
  a.circuit = synthesize(a.pool, a.reference_bits, opt);
  return a;
}

/// Noiseless energy of the ansatz at `theta`.
inline double exact_energy(const PauliSum& h, const Ansatz& a, const std::vector<double>& theta) {
  return expectation(h, simulate_state(a.circuit.bind(theta)));
}

// --- noisy evaluation -------------------------------------------------------------

/// Per-factor measurements of one observable at one parameter point.
struct FactorValues {
  std::vector<double> raw, corrected;
};

/// Evaluates observables on folded, noisy circuits.
class NoisyBackend {
 public:
  NoisyBackend(const Ansatz& ansatz, NoiseModel noise, const VqeConfig& cfg,
               std::optional<ReadoutCalibration> cal)
      : ansatz_(&ansatz), noise_(std::move(noise)), cfg_(cfg), cal_(std::move(cal)) {
    for (int m : cfg_.zne_factors) folded_.push_back(fold_cnots(ansatz.circuit, m));
  }

  const std::vector<int>& factors() const { return cfg_.zne_factors; }
  const NoiseModel& noise() const { return noise_; }

  std::vector<DensityMatrix> states(const std::vector<double>& theta, std::size_t n_factors) const {
    std::vector<DensityMatrix> out;
    for (std::size_t i = 0; i < n_factors; ++i) out.push_back(evolve(folded_[i].bind(theta), noise_));
    return out;
  }

  FactorValues measure(const NoisyEstimator& est, const std::vector<DensityMatrix>& rhos,
                       std::uint64_t seed) const {
    FactorValues v;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
      const auto nv = est.measure(rhos[i], derive_seed(seed, {std::uint64_t(cfg_.zne_factors[i])}));
      v.raw.push_back(nv.raw);
      v.corrected.push_back(nv.corrected);
    }
    return v;
  }

  NoisyEstimator estimator(const PauliSum& obs) const {
    return NoisyEstimator(obs, noise_, cfg_.mitigation.readout ? cal_ : std::nullopt, cfg_.shots);
  }

 private:
  const Ansatz* ansatz_;
  NoiseModel noise_;
  VqeConfig cfg_;
  std::optional<ReadoutCalibration> cal_;
  std::vector<Circuit> folded_;
};

inline ZneSeries make_series(const std::vector<int>& factors, const std::vector<double>& values) {
  return {factors, values};
}

/// Stage values of one observable at fixed parameters. The reference series
/// (averaged over ref_repeats) drives RS and rZNE.
struct StageValues {
  std::map<Stage, double> value;
  ExpFit fit, ref_fit;
  bool zne_fallback = false, rzne_fallback = false;
};

inline StageValues mitigate(const FactorValues& target, const FactorValues& reference, double reference_exact,
                            const std::vector<int>& factors, const MitigationStack& stack) {
  StageValues s;
  s.value[Stage::raw] = target.raw.front();
  const auto& tv = stack.readout ? target.corrected : target.raw;
  const auto& rv = stack.readout ? reference.corrected : reference.raw;
  if (stack.readout) s.value[Stage::readout] = target.corrected.front();
  if (stack.zne) {
    s.value[Stage::zne] = zne_extrapolate(make_series(factors, tv), &s.fit);
    s.zne_fallback = s.fit.fallback;
  }
  if (stack.rs) s.value[Stage::rs] = rs_rescale(tv.front(), rv.front(), reference_exact);
  if (stack.rzne && stack.zne) {
    s.ref_fit = fit_exponential(make_series(factors, rv));
    const auto r = rzne_combine(s.ref_fit, s.fit, reference_exact);
    s.value[Stage::rzne] = r.value;
    s.rzne_fallback = r.fallback;
  }
  return s;
}

inline FactorValues average(const std::vector<FactorValues>& runs) {
  FactorValues out;
  out.raw.assign(runs.front().raw.size(), 0.0);
  out.corrected.assign(runs.front().corrected.size(), 0.0);
  for (const auto& r : runs)
    for (std::size_t i = 0; i < r.raw.size(); ++i) {
      out.raw[i] += r.raw[i] / double(runs.size());
      out.corrected[i] += r.corrected[i] / double(runs.size());
    }
  return out;
}

// --- VQE ----------------------------------------------------------------------------

struct VqeRepeat {
  std::vector<double> params;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  double first_objective = 0;
  StageValues energy;
  StageValues surrogate;  // S = 1 - 2 N
  std::map<Stage, double> photon_number;
  std::uint64_t seed = 0;
};

struct StageStats {
  double mean = 0;
  double rmse = 0;  // RMS deviation of repeats from their mean
};

inline StageStats stage_stats(const std::vector<double>& v) {
  StageStats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x / double(v.size());
  double ss = 0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.rmse = std::sqrt(ss / double(v.size()));
  return s;
}

struct VqeResult {
  std::vector<VqeRepeat> repeats;
  std::map<Stage, StageStats> energy;
  std::map<Stage, StageStats> photon_number;
  StageStats iterations;
  double reference_exact = 0;
  double calibration_condition = 1;
  std::size_t n_params = 0;
  bool any_not_converged = false;
};

/// Surrogate S = I - 2 N whose value on the QED-HF reference is 1.
inline PauliSum photon_surrogate(const PauliSum& number_op) {
  return PauliSum::identity(number_op.n_qubits()) - number_op * 2.0;
}

/// Objective used inside the optimizer: readout-corrected energy,
/// ZNE-extrapolated when enabled.
inline double objective_value(const FactorValues& v, const std::vector<int>& factors, const MitigationStack& stack) {
  const auto& series = stack.readout ? v.corrected : v.raw;
  if (!stack.zne) return series.front();
  return zne_extrapolate(make_series(factors, series));
}

/// Runs n_repeats independent noisy VQE optimizations and post-processes the
/// converged parameters with every enabled mitigation stage.
inline VqeResult vqe_minimize(const EncodedProblem& p, const Ansatz& ansatz, const NoiseModel& noise,
                              const VqeConfig& cfg) {
  if (cfg.n_repeats < 1) throw std::invalid_argument("vqe_minimize: n_repeats must be >= 1");
  if (cfg.zne_factors.empty() || cfg.zne_factors.front() != 1)
    throw std::invalid_argument("vqe_minimize: noise factors must start at 1");
  if (cfg.mitigation.zne && cfg.zne_factors.size() < 3)
    throw std::invalid_argument("vqe_minimize: ZNE needs at least 3 noise factors");
  if (ansatz.circuit.n_qubits() != p.n_qubits()) throw std::invalid_argument("vqe_minimize: encoding mismatch");

  VqeResult res;
  res.n_params = ansatz.n_params();
  const std::size_t n = p.n_qubits();
  const ReadoutCalibration cal =
      calibrate_readout(noise, n, cfg.shots == 0 ? 0 : cfg.calibration_shots, derive_seed(cfg.seed, {0xCA1B}));
  res.calibration_condition = cal.condition_number;
  NoisyBackend backend(ansatz, noise, cfg, cal);
  const auto h_est = backend.estimator(p.hamiltonian);
  const PauliSum s_obs = photon_surrogate(p.photon_number);
  const auto s_est = backend.estimator(s_obs);
  const std::vector<int>& factors = cfg.zne_factors;
  const std::size_t n_obj_factors = cfg.mitigation.zne ? factors.size() : 1;

  const std::vector<double> zero(ansatz.n_params(), 0.0);
  res.reference_exact = exact_energy(p.hamiltonian, ansatz, zero);
  const double s_ref_exact = expectation(s_obs, simulate_state(ansatz.circuit.bind(zero)));

  // reference state measured ref_repeats times at every factor
  const auto ref_states = backend.states(zero, factors.size());
  std::vector<FactorValues> ref_e, ref_s;
  for (int k = 0; k < cfg.ref_repeats; ++k) {
    ref_e.push_back(backend.measure(h_est, ref_states, derive_seed(cfg.seed, {0x5EF, std::uint64_t(k), 0})));
    ref_s.push_back(backend.measure(s_est, ref_states, derive_seed(cfg.seed, {0x5EF, std::uint64_t(k), 1})));
  }
  const FactorValues ref_e_avg = average(ref_e), ref_s_avg = average(ref_s);

  for (int r = 0; r < cfg.n_repeats; ++r) {
    VqeRepeat rep;
    rep.seed = derive_seed(cfg.seed, {0x7E9, std::uint64_t(r)});
    std::uint64_t eval = 0;
    auto f = [&](const std::vector<double>& theta) {
      const auto rhos = backend.states(theta, n_obj_factors);
      const auto v = backend.measure(h_est, rhos, derive_seed(rep.seed, {eval++}));
      return objective_value(v, factors, cfg.mitigation);
    };
    rep.first_objective = f(zero);
    const auto opt = nelder_mead(f, zero, cfg.optimizer);
    rep.params = opt.x;
    rep.iterations = opt.iterations;
    rep.evaluations = opt.evaluations + 1;
    rep.converged = opt.converged;
    res.any_not_converged |= !opt.converged;

    // final post-processing with fresh seeds
    const auto rhos = backend.states(rep.params, factors.size());
    const auto e = backend.measure(h_est, rhos, derive_seed(rep.seed, {0xF1A, 0}));
    const auto s = backend.measure(s_est, rhos, derive_seed(rep.seed, {0xF1A, 1}));
    rep.energy = mitigate(e, ref_e_avg, res.reference_exact, factors, cfg.mitigation);
    rep.surrogate = mitigate(s, ref_s_avg, s_ref_exact, factors, cfg.mitigation);
    for (const auto& [stage, val] : rep.surrogate.value) rep.photon_number[stage] = 0.5 * (1.0 - val);
    res.repeats.push_back(std::move(rep));
  }

  for (Stage st : kAllStages) {
    if (!cfg.mitigation.enabled(st)) continue;
    std::vector<double> e, nph;
    for (const auto& rep : res.repeats) {
      e.push_back(rep.energy.value.at(st));
      nph.push_back(rep.photon_number.at(st));
    }
    res.energy[st] = stage_stats(e);
    res.photon_number[st] = stage_stats(nph);
  }
  std::vector<double> it;
  for (const auto& rep : res.repeats) it.push_back(rep.iterations);
  res.iterations = stage_stats(it);
  return res;
}

/// Noiseless VQE with exact expectations.
inline OptimizeResult vqe_exact(const PauliSum& h, const Ansatz& ansatz, NelderMeadOptions opt = {}) {
  opt.energy_tol = 0.0;  // stop on simplex size only
  opt.restarts = std::max(opt.restarts, 2);
  opt.param_tol = std::min(opt.param_tol, 1e-9);
  opt.max_iterations = std::max(opt.max_iterations, 2000);
  auto f = [&](const std::vector<double>& theta) { return exact_energy(h, ansatz, theta); };
  return nelder_mead(f, std::vector<double>(ansatz.n_params(), 0.0), opt);
}

/// <b+b> of the noiseless ansatz state.
inline double exact_photon_number(const EncodedProblem& p, const Ansatz& a, const std::vector<double>& theta) {
  return expectation(p.photon_number, simulate_state(a.circuit.bind(theta)));
}

// --- problem setup and scans ----------------------------------------------------------

struct PointSpec {
  double r_angstrom = 0.735;
  double omega_ev = 2.0;
  Eigen::Vector3d lambda = Eigen::Vector3d(0.05, 0, 0);
  int n_photon_max = 1;
};

inline EncodedProblem make_problem(const PointSpec& pt, const EncodingPlan& plan) {
  const auto sys = compute_sto3g_h2(h2_geometry(pt.r_angstrom));
  return encode_problem(sys.integrals, cavity_from_ev(pt.omega_ev, pt.lambda, pt.n_photon_max), plan);
}

inline double fci_energy(const PointSpec& pt, const EncodingPlan& plan = {}) {
  return fci_solve(make_problem(pt, plan)).energy;
}

/// Minimum of the FCI curve: grid search on [lo, hi] with `step`, then the
/// vertex of the parabola through the lowest point and its neighbours.
inline double fci_equilibrium(PointSpec pt, double lo = 0.60, double hi = 0.90, double step = 0.005,
                              const EncodingPlan& plan = {}) {
  std::vector<double> r, e;
  for (double x = lo; x <= hi + 1e-12; x += step) {
    pt.r_angstrom = x;
    r.push_back(x);
    e.push_back(fci_energy(pt, plan));
  }
  const auto k = static_cast<std::size_t>(std::min_element(e.begin(), e.end()) - e.begin());
  if (k == 0 || k + 1 == e.size()) throw std::runtime_error("fci_equilibrium: minimum at the grid edge");
  const double d = (e[k - 1] - 2 * e[k] + e[k + 1]);
  return r[k] + 0.5 * step * (e[k - 1] - e[k + 1]) / d;
}

struct ScanRow {
  PointSpec point;
  double e_fci = 0;
  double n_fci = 0;
  std::optional<VqeResult> vqe;
  std::string error;
};

inline ScanRow run_point(const PointSpec& pt, const EncodingPlan& plan, const NoiseModel& noise,
                         const VqeConfig& cfg, bool with_vqe) {
  ScanRow row;
  row.point = pt;
  try {
    const auto p = make_problem(pt, plan);
    const auto f = fci_solve(p);
    row.e_fci = f.energy;
    row.n_fci = f.photon_number;
    if (with_vqe) {
      const auto a = build_ansatz(p, cfg.synthesis);
      row.vqe = vqe_minimize(p, a, noise, cfg);
    }
  } catch (const std::exception& ex) {
    row.error = ex.what();
  }
  return row;
}

/// Bond-length scan at fixed cavity; each point gets its own seed stream.
inline std::vector<ScanRow> scan_dissociation(const std::vector<double>& r_list, PointSpec base,
                                              const EncodingPlan& plan, const NoiseModel& noise, VqeConfig cfg,
                                              bool with_vqe = true) {
  if (r_list.empty()) throw std::invalid_argument("scan_dissociation: empty grid");
  std::vector<ScanRow> rows;
  const std::uint64_t seed = cfg.seed;
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    base.r_angstrom = r_list[i];
    cfg.seed = derive_seed(seed, {0x5CA4, i});
    rows.push_back(run_point(base, plan, noise, cfg, with_vqe));
  }
  return rows;
}

/// Coupling scan; each point sits at its own FCI equilibrium bond length.
inline std::vector<ScanRow> scan_coupling(const std::vector<double>& lambda_x, PointSpec base,
                                          const EncodingPlan& plan, const NoiseModel& noise, VqeConfig cfg,
                                          bool with_vqe = true) {
  if (lambda_x.empty()) throw std::invalid_argument("scan_coupling: empty grid");
  std::vector<ScanRow> rows;
  const std::uint64_t seed = cfg.seed;
  for (std::size_t i = 0; i < lambda_x.size(); ++i) {
    base.lambda = Eigen::Vector3d(lambda_x[i], 0, 0);
    try {
      base.r_angstrom = fci_equilibrium(base);
    } catch (const std::exception& ex) {
      rows.push_back({base, 0, 0, std::nullopt, ex.what()});
      continue;
    }
    cfg.seed = derive_seed(seed, {0x1A4B, i});
    rows.push_back(run_point(base, plan, noise, cfg, with_vqe));
  }
  return rows;
}

// --- X-gate removal ablation ----------------------------------------------------------

struct AblationArm {
  bool sign_flip = false;
  std::vector<double> energies;
  double mean = 0, std_dev = 0, percent_error = 0;
};

struct AblationResult {
  double e_fci = 0;
  AblationArm with_x, without_x;  // |1>-initialized vs sign-flipped |0> start
  double gap_sigma = 0;           // |mean error difference| / combined standard error
};

/// VQE with the readout-corrected objective for both preparations; the
/// reported energy is the readout-corrected value at the optimum.
inline AblationResult xgate_ablation(const PointSpec& pt, const NoiseModel& noise, VqeConfig cfg,
                                     EncodingPlan plan = {}) {
  if (plan.taper != TaperMode::parity) throw std::invalid_argument("xgate_ablation: tapered encoding required");
  cfg.mitigation = {true, false, false, false};
  AblationResult out;
  for (int arm = 0; arm < 2; ++arm) {
    plan.sign_flip_reference = arm == 1;
    const auto p = make_problem(pt, plan);
    out.e_fci = fci_solve(p).energy;
    const auto a = build_ansatz(p, cfg.synthesis);
    VqeConfig c = cfg;
    c.seed = derive_seed(cfg.seed, {0xAB1, std::uint64_t(arm)});
    const auto res = vqe_minimize(p, a, noise, c);
    AblationArm& dst = arm ? out.without_x : out.with_x;
    dst.sign_flip = arm == 1;
    for (const auto& r : res.repeats) dst.energies.push_back(r.energy.value.at(Stage::readout));
    const auto st = stage_stats(dst.energies);
    dst.mean = st.mean;
    const double nn = double(dst.energies.size());
    dst.std_dev = nn > 1 ? st.rmse * std::sqrt(nn / (nn - 1)) : 0.0;
    dst.percent_error = 100.0 * std::abs((dst.mean - out.e_fci) / out.e_fci);
  }
  const double nn = double(out.with_x.energies.size());
  const double se = std::sqrt((out.with_x.std_dev * out.with_x.std_dev + out.without_x.std_dev * out.without_x.std_dev) / nn);
  const double gap = std::abs(out.with_x.mean - out.e_fci) - std::abs(out.without_x.mean - out.e_fci);
  out.gap_sigma = se > 0 ? gap / se : (gap == 0 ? 0 : INFINITY);
  return out;
}

}  // namespace polariton
