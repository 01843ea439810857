#ifndef PBH_PROXIMAL_BASIN_HOPPING_HPP
#define PBH_PROXIMAL_BASIN_HOPPING_HPP

#include "pbh/barycenter.hpp"
#include "pbh/local_solver.hpp"
#include "pbh/objectives.hpp"
#include "pbh/types.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pbh {

/**
 * Tunables of proximal basin hopping.
 *
 * gamma is the proximal scale (grown by eta1 when an iteration does not
 * strictly improve), delta the temperature (divided by eta2 every iteration,
 * or adapted from the observed samples when `adaptive_delta` is set), and the
 * sample count at iteration k is round(n_samples * sample_growth^k).
 */
struct PbhConfig {
  double gamma0 = 5.0;
  double delta0 = 0.5;
  double eta1 = 1.5;
  double eta2 = 2.0;
  int n_samples = 20;
  double sample_growth = 1.0;
  bool adaptive_delta = true;
  long max_iterations = 100;
  std::optional<double> budget_seconds;
  std::uint64_t seed = 0;
  // A run stops once f <= known minimum + target_tolerance.
  double target_tolerance = 1e-9;
  // Hard cap on the per-iteration sample count when sample_growth > 1.
  long max_samples = 1L << 20;
  // Worker threads for the batched local solves; 0 = hardware concurrency.
  unsigned workers = 0;
  // Upper bound on gamma. Without it a long stagnating run overflows
  // delta * gamma after about 1750 growth steps at eta1 = 1.5.
  double gamma_max = 1e100;
  // Trace records kept per run; 0 keeps every iteration.
  long trace_capacity = 10000;

  void validate() const {
    if (!(gamma0 > 0.0)) throw InvalidInput("gamma0 must be positive");
    if (!(delta0 > 0.0)) throw InvalidInput("delta0 must be positive");
    if (!(eta1 > 1.0 && eta2 > eta1)) throw InvalidInput("schedule requires 1 < eta1 < eta2");
    if (n_samples < 1) throw InvalidInput("n_samples must be >= 1");
    if (!(sample_growth >= 1.0)) throw InvalidInput("sample_growth must be >= 1");
    if (max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
    if (budget_seconds && !(*budget_seconds > 0.0)) {
      throw InvalidInput("budget_seconds must be positive");
    }
    if (!(target_tolerance >= 0.0)) throw InvalidInput("target_tolerance must be >= 0");
    if (max_samples < n_samples) throw InvalidInput("max_samples must be >= n_samples");
    if (!(gamma_max >= gamma0) || !std::isfinite(gamma_max)) {
      throw InvalidInput("gamma_max must be finite and >= gamma0");
    }
    if (trace_capacity != 0 && trace_capacity < 16) {
      throw InvalidInput("trace_capacity must be 0 or >= 16");
    }
  }

  double grow_gamma(double gamma) const { return std::min(gamma * eta1, gamma_max); }

  /// Sample count at iteration k: round(n_samples * sample_growth^k), capped.
  long samples_at(long k) const {
    if (sample_growth == 1.0) return n_samples;
    const double n = std::round(static_cast<double>(n_samples) *
                                std::pow(sample_growth, static_cast<double>(k)));
    if (!(n < static_cast<double>(max_samples))) return max_samples;
    return static_cast<long>(n);
  }
};

enum class StepOutcome { strict, equal, worse };
enum class Termination { max_iter, budget, converged_tol };

inline std::string to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::strict: return "strict";
    case StepOutcome::equal: return "equal";
    case StepOutcome::worse: return "worse";
  }
  return "?";
}

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iter: return "max_iter";
    case Termination::budget: return "budget";
    case Termination::converged_tol: return "converged_tol";
  }
  return "?";
}

// Exact comparison: a tolerance would merge the "equal" and "worse" branches.
inline StepOutcome classify(double candidate, double current) {
  if (candidate < current) return StepOutcome::strict;
  if (candidate == current) return StepOutcome::equal;
  return StepOutcome::worse;
}

struct IterationRecord {
  long index = 0;  // 0-based iteration number
  Vector iterate;
  double f_value = 0.0;
  double gamma = 0.0;  // in effect during this iteration
  double delta = 0.0;
  long n_samples = 0;
  double elapsed_seconds = 0.0;
  bool accepted = false;
  StepOutcome outcome = StepOutcome::strict;
};

struct RunTrace {
  std::string algorithm;
  Vector initial_point;
  double initial_value = 0.0;
  std::vector<IterationRecord> iterations;
  Vector final_point;
  double final_value = 0.0;
  Termination termination = Termination::max_iter;
  // False for Metropolis basin hopping, which may accept worse points.
  bool monotone = true;
  long iterations_run = 0;
  // Records kept are the multiples of the stride plus the latest iteration.
  long record_stride = 1;

  /// Appends the next iteration while keeping at most `capacity` records
  /// (0 keeps all). A full trace drops every other record and doubles the
  /// stride, so cheap long runs stay bounded in memory.
  void record(IterationRecord rec, long capacity) {
    rec.index = iterations_run++;
    if (!iterations.empty() && iterations.back().index % record_stride != 0) iterations.pop_back();
    if (capacity > 0 && static_cast<long>(iterations.size()) >= capacity) {
      record_stride *= 2;
      std::erase_if(iterations, [&](const IterationRecord& r) { return r.index % record_stride != 0; });
    }
    iterations.push_back(std::move(rec));
  }
};

struct StepResult {
  Vector x_next;
  double f_next = 0.0;
  StepOutcome improved = StepOutcome::strict;
  Vector candidate;  // T_f(barycenter)
  double candidate_value = 0.0;
  WeightedSampleSet samples;
};

/**
 * One iteration: draw n samples from N(x, delta gamma I), minimize each
 * locally, take the softmin barycenter at temperature delta, minimize it once
 * more, and keep the result unless it is strictly worse than x.
 */
inline StepResult pbh_step(const Objective& f, const LocalSolver& solver, Rng& rng,
                           const Vector& x, double fx, double gamma, double delta, long n,
                           unsigned workers = 0) {
  if (!(gamma > 0.0 && delta > 0.0)) throw InvalidInput("gamma and delta must be positive");
  if (n < 1) throw InvalidInput("sample count must be >= 1");
  const auto starts = draw_samples(rng, x, delta, gamma, static_cast<int>(n));

  StepResult r;
  r.samples.delta = delta;
  r.samples.minimized_points = solver.solve_batch(f, starts, workers);
  r.samples.values.reserve(starts.size());
  for (const auto& p : r.samples.minimized_points) r.samples.values.push_back(f(p));

  const double v_min = *std::min_element(r.samples.values.begin(), r.samples.values.end());
  const Vector bary = std::isfinite(v_min) ? weighted_mean(r.samples) : x;
  if (std::isfinite(v_min) && all_finite(bary)) {
    r.candidate = solver.solve(f, bary);
    r.candidate_value = f(r.candidate);
  } else {
    // Nothing finite was sampled; the step is a rejection.
    r.candidate = x;
    r.candidate_value = std::numeric_limits<double>::infinity();
  }
  r.improved = classify(r.candidate_value, fx);
  if (r.improved == StepOutcome::worse) {
    r.x_next = x;
    r.f_next = fx;
  } else {
    r.x_next = r.candidate;
    r.f_next = r.candidate_value;
  }
  return r;
}

inline StepResult pbh_step(const Objective& f, const LocalSolver& solver, Rng& rng,
                           const Vector& x, double gamma, double delta, long n) {
  return pbh_step(f, solver, rng, x, f(x), gamma, delta, n);
}

/**
 * Temperature refinement from the observed samples.
 *
 * If the refined barycenter did not reach the best sampled value (within
 * 1e-9 (1 + |v_min|)), the temperature is reset to the concentration
 * threshold of the sampled minimizers, clamped to
 * [current / eta2^2, current / eta2]. Samples within 1e-6 (1 + ||p_best||) of
 * the best point count as the same minimizer; the basin radius is half the
 * distance from the best point to the nearest other minimizer. When the
 * threshold is undefined (tied best values, no distinct minimizer) the
 * temperature is divided by eta2.
 */
inline double adaptive_delta_update(double current_delta, double eta2,
                                    std::span<const double> sample_values,
                                    std::span<const Vector> sample_points,
                                    double barycenter_value) {
  if (sample_values.empty() || sample_values.size() != sample_points.size()) {
    throw InvalidInput("sample values and points must be non-empty and of equal length");
  }
  const std::size_t best = detail::argmin_value(sample_values);
  const double v_min = sample_values[best];
  const double tol = 1e-9 * (1.0 + std::abs(v_min));
  if (barycenter_value <= v_min + tol) return current_delta;

  const double fallback = current_delta / eta2;
  const double merge = 1e-6 * (1.0 + sample_points[best].norm());
  std::vector<double> values{v_min};
  std::vector<Vector> points{sample_points[best]};
  double nearest = kInfinitySentinel;
  for (std::size_t i = 0; i < sample_values.size(); ++i) {
    if (i == best) continue;
    const double dist = (sample_points[i] - sample_points[best]).norm();
    if (dist <= merge) continue;
    if (!std::isfinite(sample_values[i])) continue;
    values.push_back(sample_values[i]);
    points.push_back(sample_points[i]);
    nearest = std::min(nearest, dist);
  }
  if (values.size() < 2 || !std::isfinite(v_min)) return fallback;

  double threshold = 0.0;
  try {
    threshold = concentration_threshold(values, points, 0.5 * nearest);
  } catch (const InvalidInput&) {
    return fallback;
  }
  return std::clamp(threshold, current_delta / (eta2 * eta2), fallback);
}

/// Temperature schedule shared by every algorithm in the family. Without
/// adaptation delta shrinks by eta2 each iteration. With adaptation it is held
/// while steps strictly improve and the samples concentrate; a sample cloud
/// that concentrates yet fails to beat x is no reason to hold it, so any
/// non-strict step falls back to at least the base schedule.
inline double next_delta(const PbhConfig& config, double delta, StepOutcome outcome,
                         std::span<const double> sample_values,
                         std::span<const Vector> sample_points, double candidate_value) {
  double next = delta / config.eta2;
  if (config.adaptive_delta) {
    next = adaptive_delta_update(delta, config.eta2, sample_values, sample_points, candidate_value);
    if (outcome != StepOutcome::strict) next = std::min(next, delta / config.eta2);
  }
  return std::max(next, std::numeric_limits<double>::min());
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline bool reached_target(const Objective& f, const PbhConfig& c, double value) {
  const auto& known = f.known_minimum();
  return known && value <= known->value + c.target_tolerance;
}

}  // namespace detail

/// Proximal basin hopping from x0. The returned f-values never increase.
inline RunTrace run_pbh(const Objective& f, const LocalSolver& solver, const PbhConfig& config,
                        const Vector& x0) {
  config.validate();
  solver.validate();
  if (x0.size() != f.dimension()) throw InvalidDimension("x0 dimension mismatch");
  if (!all_finite(x0)) throw InvalidInput("x0 must be finite");

  const auto start = detail::Clock::now();
  Rng rng = make_rng(config.seed);
  RunTrace trace;
  trace.algorithm = "pbh";
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
    const long n = config.samples_at(k);
    StepResult step = pbh_step(f, solver, rng, x, fx, gamma, delta, n, config.workers);

    IterationRecord rec;
    rec.gamma = gamma;
    rec.delta = delta;
    rec.n_samples = n;
    rec.outcome = step.improved;
    rec.accepted = step.improved != StepOutcome::worse;

    if (step.improved != StepOutcome::strict) gamma = config.grow_gamma(gamma);
    delta = next_delta(config, delta, step.improved, step.samples.values,
                       step.samples.minimized_points, step.candidate_value);

    x = std::move(step.x_next);
    fx = step.f_next;
    rec.iterate = x;
    rec.f_value = fx;
    rec.elapsed_seconds = detail::seconds_since(start);
    trace.record(std::move(rec), config.trace_capacity);

    if (detail::reached_target(f, config, fx)) {
      trace.termination = Termination::converged_tol;
      break;
    }
  }
  trace.final_point = x;
  trace.final_value = fx;
  return trace;
}

}  // namespace pbh

#endif  // PBH_PROXIMAL_BASIN_HOPPING_HPP
