#ifndef PBH_BASELINES_HPP
#define PBH_BASELINES_HPP

#include "pbh/barycenter.hpp"
#include "pbh/local_solver.hpp"
#include "pbh/objectives.hpp"
#include "pbh/proximal_basin_hopping.hpp"
#include "pbh/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace pbh {

/// Metropolis rule: accept with probability min(1, exp((f_current - f_candidate) / delta)).
/// Always consumes exactly one uniform draw.
inline bool metropolis_accept(double f_current, double f_candidate, double delta, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (f_candidate <= f_current) return true;
  const double p = std::exp((f_current - f_candidate) / delta);
  return u < p;
}

/**
 * Basin hopping: one Gaussian perturbation per iteration, one local solve,
 * Metropolis acceptance at temperature delta. gamma and delta follow the same
 * update rules as proximal basin hopping; with a single sample the adaptive
 * temperature rule never fires, so delta stays fixed in adaptive mode.
 */
inline RunTrace run_bh(const Objective& f, const LocalSolver& solver, const PbhConfig& config,
                       const Vector& x0) {
  config.validate();
  solver.validate();
  if (x0.size() != f.dimension()) throw InvalidDimension("x0 dimension mismatch");
  if (!all_finite(x0)) throw InvalidInput("x0 must be finite");

  const auto start = detail::Clock::now();
  Rng rng = make_rng(config.seed);
  RunTrace trace;
  trace.algorithm = "bh";
  trace.monotone = false;
  trace.initial_point = x0;
  trace.initial_value = f(x0);

  Vector x = x0;
  double fx = trace.initial_value;
  double gamma = config.gamma0;
  double delta = config.delta0;

  for (long k = 0;; ++k) {
    if (k >= config.max_iterations) {
      trace.termination = Termination::max_iter;
      break;
    }
    if (config.budget_seconds && detail::seconds_since(start) >= *config.budget_seconds) {
      trace.termination = Termination::budget;
      break;
    }
    auto samples = draw_samples(rng, x, delta, gamma, 1);
    Vector candidate = solver.solve(f, samples.front());
    const double fc = f(candidate);

    IterationRecord rec;
    rec.gamma = gamma;
    rec.delta = delta;
    rec.n_samples = 1;
    rec.outcome = classify(fc, fx);
    rec.accepted = metropolis_accept(fx, fc, delta, rng);

    if (rec.outcome != StepOutcome::strict) gamma = config.grow_gamma(gamma);
    const double values[] = {fc};
    delta = next_delta(config, delta, rec.outcome, values, std::span<const Vector>(&candidate, 1), fc);

    if (rec.accepted) {
      x = std::move(candidate);
      fx = fc;
    }
    rec.iterate = x;
    rec.f_value = fx;
    rec.elapsed_seconds = detail::seconds_since(start);
    trace.record(std::move(rec), config.trace_capacity);

    if (detail::reached_target(f, config, fx)) {
      trace.termination = Termination::converged_tol;
      break;
    }
  }
  // Final, not best-seen, iterate.
  trace.final_point = x;
  trace.final_value = fx;
  return trace;
}

/// Zeroth-order proximal method: proximal basin hopping with the identity
/// in place of the local solver, so samples are weighted by raw f values.
inline RunTrace run_zop(const Objective& f, const PbhConfig& config, const Vector& x0) {
  RunTrace trace = run_pbh(f, LocalSolver::identity(), config, x0);
  trace.algorithm = "zop";
  return trace;
}

}  // namespace pbh

#endif  // PBH_BASELINES_HPP
