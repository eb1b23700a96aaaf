#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace polariton {

struct NelderMeadOptions {
  double energy_tol = 1e-6;   // best value stalls for 2(n+1) iterations
  double param_tol = 1e-5;    // simplex characteristic size
  int max_iterations = 500;
  double initial_step = 0.1;
  int restarts = 1;  // fresh simplex around the previous optimum
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> history;  // best value after each iteration
};

using Objective = std::function<double(const std::vector<double>&)>;

namespace detail {
inline OptimizeResult nelder_mead_once(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  if (x0.empty()) throw std::invalid_argument("nelder_mead: empty parameter vector");
  const std::size_t n = x0.size();
  struct Ctx {
    const Objective* f;
    int evals = 0;
    std::size_t n;
  } ctx{&f, 0, n};

  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* p) -> double {
    auto* c = static_cast<Ctx*>(p);
    std::vector<double> x(c->n);
    for (std::size_t i = 0; i < c->n; ++i) x[i] = gsl_vector_get(v, i);
    ++c->evals;
    const double y = (*c->f)(x);
    return std::isfinite(y) ? y : std::numeric_limits<double>::max();
  };

  auto vec = [](std::size_t k) { return std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>(gsl_vector_alloc(k), gsl_vector_free); };
  auto x = vec(n), step = vec(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, x0[i]);
    gsl_vector_set(step.get(), i, opt.initial_step);
  }
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  gsl_set_error_handler_off();
  if (gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get()) != GSL_SUCCESS)
    throw std::runtime_error("nelder_mead: initialization failed");

  OptimizeResult r;
  const int window = 2 * static_cast<int>(n + 1);
  while (r.iterations < opt.max_iterations) {
    ++r.iterations;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    r.history.push_back(s->fval);
    const double size = gsl_multimin_fminimizer_size(s.get());
    if (size < opt.param_tol) {
      r.converged = true;
      break;
    }
    if (static_cast<int>(r.history.size()) > window &&
        r.history[r.history.size() - 1 - window] - s->fval < opt.energy_tol) {
      r.converged = true;
      break;
    }
  }
  r.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(s->x, i);
  r.value = s->fval;
  r.evaluations = ctx.evals;
  return r;
}
}  // namespace detail

/// Derivative-free minimization with the GSL simplex (nmsimplex2).
inline OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  OptimizeResult r = detail::nelder_mead_once(f, std::move(x0), opt);
  for (int k = 0; k < opt.restarts && r.iterations < opt.max_iterations; ++k) {
    NelderMeadOptions o = opt;
    o.max_iterations = opt.max_iterations - r.iterations;
    OptimizeResult next = detail::nelder_mead_once(f, r.x, o);
    next.iterations += r.iterations;
    next.evaluations += r.evaluations;
    next.history.insert(next.history.begin(), r.history.begin(), r.history.end());
    r = std::move(next);
  }
  return r;
}

}  // namespace polariton
