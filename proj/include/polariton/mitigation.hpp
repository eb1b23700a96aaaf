#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "polariton/simulator.hpp"

namespace polariton {

// --- readout ------------------------------------------------------------------------

struct ReadoutCalibration {
  std::vector<Confusion> confusion;  // estimated, rows renormalized
  std::vector<Confusion> inverse;
  double condition_number = 1;
};

inline ReadoutCalibration make_calibration(std::vector<Confusion> conf, double singular_tol = 1e-6) {
  ReadoutCalibration cal;
  for (std::size_t q = 0; q < conf.size(); ++q) {
    Eigen::Matrix2d m;
    m << conf[q][0][0], conf[q][0][1], conf[q][1][0], conf[q][1][1];
    const double det = m.determinant();
    if (std::abs(det) < singular_tol)
      throw std::runtime_error("readout calibration is singular on qubit " + std::to_string(q));
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
    cal.condition_number = std::max(cal.condition_number, svd.singularValues()(0) / svd.singularValues()(1));
    const Eigen::Matrix2d inv = m.inverse();
    cal.inverse.push_back({{{inv(0, 0), inv(0, 1)}, {inv(1, 0), inv(1, 1)}}});
  }
  cal.confusion = std::move(conf);
  return cal;
}

/// Prepares |0...0> and |1...1> (ideal preparation, noisy readout) and
/// reads the per-qubit confusion rows from the marginals. With shots = 0 the
/// exact confusion of the noise model is returned.
inline ReadoutCalibration calibrate_readout(const NoiseModel& noise, std::size_t n_qubits,
                                            std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) return make_calibration(confusion_matrices(noise, n_qubits));
  if (shots < 1000) throw std::invalid_argument("calibrate_readout: at least 1000 shots required");
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<Confusion> conf(n_qubits);
  for (int prepared = 0; prepared < 2; ++prepared) {
    std::vector<double> p(dim, 0.0);
    p[prepared ? dim - 1 : 0] = 1.0;
    const auto counts =
        sample_counts(apply_confusion(p, confusion_matrices(noise, n_qubits)), shots, derive_seed(seed, {0xCA1, std::uint64_t(prepared)}));
    for (std::size_t q = 0; q < n_qubits; ++q) {
      std::uint64_t ones = 0;
      for (std::size_t k = 0; k < dim; ++k)
        if ((k >> q) & 1U) ones += counts.counts[k];
      const double f1 = double(ones) / double(shots);
      conf[q][prepared] = {1.0 - f1, f1};
    }
  }
  return make_calibration(std::move(conf));
}

/// Quasi-distribution after inverting the tensor-product confusion.
inline std::vector<double> correct_readout(const std::vector<double>& observed, const ReadoutCalibration& cal) {
  // observed = C^T p per qubit, so p = (C^{-1})^T observed
  return apply_confusion(observed, cal.inverse);
}

// --- noisy expectation estimator --------------------------------------------------

struct NoisyValue {
  double raw = 0;        // from reported outcomes
  double corrected = 0;  // after readout inversion
};

/// Estimates <obs> from a density matrix by sampling every qubit-wise
/// commuting group (or exactly, when `shots` is 0).
class NoisyEstimator {
 public:
  NoisyEstimator(const PauliSum& obs, NoiseModel noise, std::optional<ReadoutCalibration> cal,
                 std::uint64_t shots)
      : n_(obs.n_qubits()), noise_(std::move(noise)), cal_(std::move(cal)), shots_(shots) {
    groups_ = group_qubitwise(obs, &constant_);
    conf_ = confusion_matrices(noise_, n_);
  }

  std::size_t n_groups() const { return groups_.size(); }
  std::uint64_t shots() const { return shots_; }
  const std::vector<MeasurementGroup>& groups() const { return groups_; }

  NoisyValue measure(const DensityMatrix& rho, std::uint64_t seed) const {
    if (rho.n_qubits() != n_) throw std::invalid_argument("NoisyEstimator: qubit count mismatch");
    NoisyValue v{constant_, constant_};
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      auto reported = apply_confusion(basis_probabilities(rho, g.basis), conf_);
      if (shots_ > 0) reported = sample_counts(reported, shots_, derive_seed(seed, {gi})).frequencies();
      const auto fixed = cal_ ? correct_readout(reported, *cal_) : reported;
      for (const auto& [key, c] : g.terms) {
        v.raw += c * parity_expectation(reported, term_mask(key));
        v.corrected += c * parity_expectation(fixed, term_mask(key));
      }
    }
    return v;
  }

 private:
  std::size_t n_;
  NoiseModel noise_;
  std::optional<ReadoutCalibration> cal_;
  std::uint64_t shots_;
  std::vector<MeasurementGroup> groups_;
  std::vector<Confusion> conf_;
  double constant_ = 0;
};

// --- zero-noise extrapolation ---------------------------------------------------

struct ExpFit {
  double a = 0, g = 0, c = 0;
  double rms = 0;
  bool fallback = false;  // linear extrapolation used
  double at(double m) const { return a * std::exp(-g * m) + c; }
};

struct ZneSeries {
  std::vector<int> factors;
  std::vector<double> values;

  void validate() const {
    if (factors.size() != values.size()) throw std::invalid_argument("ZneSeries: size mismatch");
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (factors[i] < 1 || factors[i] % 2 == 0) throw std::invalid_argument("ZneSeries: factors must be odd");
      if (i && factors[i] <= factors[i - 1]) throw std::invalid_argument("ZneSeries: factors must increase");
      if (!std::isfinite(values[i])) throw std::invalid_argument("ZneSeries: non-finite value");
    }
  }
};

namespace detail {

/// Residuals of a e^{-s^2 m} + c - y; parameters (a, s, c).
struct ExpResidual : Eigen::DenseFunctor<double> {
  const std::vector<double>& m;
  const std::vector<double>& y;
  ExpResidual(const std::vector<double>& m_, const std::vector<double>& y_)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(m_.size())), m(m_), y(y_) {}
  int operator()(const InputType& p, ValueType& f) const {
    for (std::size_t k = 0; k < m.size(); ++k) f(k) = p(0) * std::exp(-p(1) * p(1) * m[k]) + p(2) - y[k];
    return 0;
  }
  int df(const InputType& p, JacobianType& j) const {
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double e = std::exp(-p(1) * p(1) * m[k]);
      j(k, 0) = e;
      j(k, 1) = -2.0 * p(0) * p(1) * m[k] * e;
      j(k, 2) = 1.0;
    }
    return 0;
  }
};

inline std::pair<double, double> linear_fit_ac(const std::vector<double>& m, const std::vector<double>& y, double g) {
  Eigen::MatrixXd A(m.size(), 2);
  Eigen::VectorXd b(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    A(k, 0) = std::exp(-g * m[k]);
    A(k, 1) = 1.0;
    b(k) = y[k];
  }
  const Eigen::Vector2d ac = A.colPivHouseholderQr().solve(b);
  return {ac(0), ac(1)};
}

}  // namespace detail

/// Least-squares fit of f(m) = a e^{-g m} + c with g >= 0.
inline ExpFit fit_exponential(const ZneSeries& s) {
  s.validate();
  if (s.factors.size() < 3) throw std::invalid_argument("fit_exponential: need at least 3 factors");
  std::vector<double> m(s.factors.begin(), s.factors.end());
  const auto& y = s.values;
  const std::size_t n = y.size();

  double spread = 0, scale = 0;
  for (double v : y) {
    spread = std::max(spread, std::abs(v - y.front()));
    scale = std::max(scale, std::abs(v));
  }
  ExpFit fit;
  if (spread <= 1e-14 * std::max(1.0, scale)) {
    fit.c = y.front();
    return fit;
  }

  // slope of log|dy/dm| against the interval midpoints
  double g0 = 0;
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double d = (y[k + 1] - y[k]) / (m[k + 1] - m[k]);
      if (d == 0.0) continue;
      const double xm = 0.5 * (m[k] + m[k + 1]), ly = std::log(std::abs(d));
      sx += xm, sy += ly, sxx += xm * xm, sxy += xm * ly;
      ++cnt;
    }
    if (cnt >= 2) {
      const double den = cnt * sxx - sx * sx;
      if (den != 0.0) g0 = -(cnt * sxy - sx * sy) / den;
    }
    if (!std::isfinite(g0) || g0 <= 0) g0 = 1.0 / (m.back() - m.front());
  }
  const auto [a0, c0] = detail::linear_fit_ac(m, y, g0);

  Eigen::VectorXd p(3);
  p << a0, std::sqrt(g0), c0;
  detail::ExpResidual fn(m, y);
  Eigen::LevenbergMarquardt<detail::ExpResidual> lm(fn);
  lm.setMaxfev(500);
  lm.setXtol(1e-12);
  lm.setFtol(1e-14);
  const auto status = lm.minimize(p);
  const bool ok = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation && p.allFinite();
  if (ok) {
    fit.a = p(0);
    fit.g = p(1) * p(1);
    fit.c = p(2);
  } else {
    // linear through the two smallest factors
    const double slope = (y[1] - y[0]) / (m[1] - m[0]);
    fit.fallback = true;
    fit.g = 0;
    fit.a = y[0] - slope * m[0];  // value at m = 0
    fit.c = 0;
  }
  double ss = 0;
  if (!fit.fallback)
    for (std::size_t k = 0; k < n; ++k) ss += std::pow(fit.at(m[k]) - y[k], 2);
  fit.rms = std::sqrt(ss / double(n));
  return fit;
}

/// f(0) = a + c.
inline double zne_extrapolate(const ZneSeries& s, ExpFit* out = nullptr) {
  const ExpFit f = fit_exponential(s);
  if (out) *out = f;
  return f.a + f.c;
}

inline double rs_rescale(double noisy_value, double reference_noisy, double reference_exact) {
  if (reference_exact == 0.0) throw std::invalid_argument("rs_rescale: exact reference value is zero");
  if (reference_noisy == 0.0) throw std::invalid_argument("rs_rescale: noisy reference value is zero");
  const double r = reference_noisy / reference_exact;
  return noisy_value / r;
}

struct RzneResult {
  double value = 0;
  bool fallback = false;  // |a_r| too small; plain ZNE returned
};

/// E = a_e (E_ref - c_r) / a_r + c_e.
inline RzneResult rzne_combine(const ExpFit& ref_fit, const ExpFit& vqe_fit, double reference_exact,
                               double min_abs_a = 1e-12) {
  if (ref_fit.fallback || vqe_fit.fallback || std::abs(ref_fit.a) < min_abs_a)
    return {vqe_fit.a + vqe_fit.c, true};
  return {vqe_fit.a * (reference_exact - ref_fit.c) / ref_fit.a + vqe_fit.c, false};
}

}  // namespace polariton
