#ifndef PBH_LOCAL_SOLVER_HPP
#define PBH_LOCAL_SOLVER_HPP

#include "pbh/objectives.hpp"
#include "pbh/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace pbh {

enum class SolverMethod { gradient_descent, lbfgs };

inline std::string to_string(SolverMethod m) {
  return m == SolverMethod::gradient_descent ? "gd" : "lbfgs";
}

/**
 * Descent procedure sending a start point toward its local minimizer.
 *
 * Both methods only ever accept points that do not increase the objective,
 * so f(solve(x)) <= f(x). A non-finite value or gradient ends the descent at
 * the last finite iterate. `max_steps == 0` is the identity map.
 */
struct LocalSolver {
  SolverMethod method = SolverMethod::gradient_descent;
  int max_steps = 10;
  // Gradient descent only. About 1/L for Rastrigin (L = 2 + 40 pi^2); 0.01 halves to
  // 0.005 ~ 2/L, where descent oscillates without progress.
  double step_size = 0.0025;
  int memory = 10;          // lbfgs only
  double grad_tolerance = 1e-10;

  static LocalSolver identity() {
    LocalSolver s;
    s.max_steps = 0;
    return s;
  }

  static LocalSolver lbfgs(int max_steps, int memory = 10) {
    LocalSolver s;
    s.method = SolverMethod::lbfgs;
    s.max_steps = max_steps;
    s.memory = memory;
    return s;
  }

  void validate() const {
    if (max_steps < 0) throw InvalidInput("local solver max_steps must be >= 0");
    if (method == SolverMethod::gradient_descent && !(step_size > 0.0)) {
      throw InvalidInput("gradient descent step_size must be positive");
    }
    if (method == SolverMethod::lbfgs && memory < 1) {
      throw InvalidInput("lbfgs memory must be >= 1");
    }
    if (!(grad_tolerance >= 0.0)) throw InvalidInput("grad_tolerance must be >= 0");
  }

  Vector solve(const Objective& f, const Vector& x0) const;

  /// Elementwise solve; the output does not depend on `workers`.
  /// workers == 0 picks the hardware concurrency.
  std::vector<Vector> solve_batch(const Objective& f, std::span<const Vector> starts,
                                  unsigned workers = 0) const;

 private:
  Vector gradient_descent(const Objective& f, const Vector& x0) const;
  Vector run_lbfgs(const Objective& f, const Vector& x0) const;
};

inline Vector LocalSolver::solve(const Objective& f, const Vector& x0) const {
  if (x0.size() != f.dimension()) {
    throw InvalidDimension("start point has dimension " + std::to_string(x0.size()) +
                           ", objective expects " + std::to_string(f.dimension()));
  }
  if (!all_finite(x0)) throw InvalidInput("start point must be finite");
  if (max_steps == 0) return x0;
  return method == SolverMethod::gradient_descent ? gradient_descent(f, x0) : run_lbfgs(f, x0);
}

inline Vector LocalSolver::gradient_descent(const Objective& f, const Vector& x0) const {
  constexpr int kMaxHalvings = 30;
  Vector x = x0;
  Vector g;
  double fx = f.value_and_gradient(x, g);
  if (!std::isfinite(fx) || !all_finite(g)) return x;

  Vector trial(x.size());
  Vector g_trial;
  for (int step = 0; step < max_steps; ++step) {
    if (g.norm() <= grad_tolerance) break;
    double h = step_size;
    bool moved = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, h *= 0.5) {
      trial = x - h * g;
      const double ft = f.value(trial);
      if (std::isfinite(ft) && ft <= fx) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    const double ft = f.value_and_gradient(trial, g_trial);
    if (!std::isfinite(ft) || !all_finite(g_trial)) break;
    x.swap(trial);
    g.swap(g_trial);
    fx = ft;
  }
  return x;
}

inline Vector LocalSolver::run_lbfgs(const Objective& f, const Vector& x0) const {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 40;
  constexpr double kFlat = 1e-11;

  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> history;

  Vector x = x0;
  Vector g;
  double fx = f.value_and_gradient(x, g);
  if (!std::isfinite(fx) || !all_finite(g)) return x;
  const double f0 = fx;

  const Index n = x.size();
  Vector d(n), x_new(n), g_new(n), x_alt(n);
  std::vector<double> alpha_buf;

  for (int iter = 0; iter < max_steps; ++iter) {
    if (g.norm() <= grad_tolerance) break;

    // Two-loop recursion.
    d = -g;
    alpha_buf.assign(history.size(), 0.0);
    for (std::size_t i = history.size(); i-- > 0;) {
      alpha_buf[i] = history[i].rho * history[i].s.dot(d);
      d -= alpha_buf[i] * history[i].y;
    }
    if (!history.empty()) {
      const auto& last = history.back();
      d *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double beta = history[i].rho * history[i].y.dot(d);
      d += (alpha_buf[i] - beta) * history[i].s;
    }

    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      history.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    // Armijo backtracking with quadratic interpolation. When the unit step is
    // acceptable, the minimizer of the interpolating parabola is also tried.
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = x + step * d;
      f_new = f.value(x_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      // Predicted decrease below the precision of f: Armijo is decided by
      // rounding noise, so a shrinking gradient decides instead. f0 bounds
      // the result, keeping f(solve(x0)) <= f(x0).
      if (std::isfinite(f_new) && -step * slope <= kFlat * std::abs(fx) &&
          f_new <= fx + kFlat * std::abs(fx) && f_new <= f0) {
        f.value_and_gradient(x_new, g_new);
        if (all_finite(g_new) && g_new.norm() < g.norm()) {
          accepted = true;
          break;
        }
      }
      double next = 0.5 * step;
      if (std::isfinite(f_new)) {
        const double curv = f_new - fx - slope * step;
        if (curv > 0.0) next = -slope * step * step / (2.0 * curv);
      }
      step = std::clamp(next, 0.1 * step, 0.5 * step);
    }
    if (!accepted) {
      if (history.empty()) break;
      history.clear();
      --iter;  // retry this iteration as steepest descent
      continue;
    }
    if (step == 1.0) {
      const double curv = f_new - fx - slope;
      if (curv > 0.0) {
        const double alt = std::min(-slope / (2.0 * curv), 4.0);
        if (alt > 0.1 && alt != 1.0) {
          x_alt = x + alt * d;
          const double f_alt = f.value(x_alt);
          if (std::isfinite(f_alt) && f_alt < f_new && f_alt <= fx + kArmijo * alt * slope) {
            x_new.swap(x_alt);
            f_new = f_alt;
          }
        }
      }
    }

    const double fv = f.value_and_gradient(x_new, g_new);
    if (!std::isfinite(fv) || !all_finite(g_new)) break;
    Vector s = x_new - x;
    Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      history.push_back(Pair{std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(history.size()) > memory) history.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    fx = fv;
  }
  return x;
}

inline std::vector<Vector> LocalSolver::solve_batch(const Objective& f,
                                                    std::span<const Vector> starts,
                                                    unsigned workers) const {
  std::vector<Vector> out(starts.size());
  if (starts.empty()) return out;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, starts.size()));

  if (workers <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) out[i] = solve(f, starts[i]);
    return out;
  }
  // Validate up front so worker threads never throw.
  for (const auto& s : starts) {
    if (s.size() != f.dimension()) throw InvalidDimension("batch start has wrong dimension");
    if (!all_finite(s)) throw InvalidInput("batch start must be finite");
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < starts.size(); i += workers) out[i] = solve(f, starts[i]);
    });
  }
  pool.clear();  // join before `out` is returned
  return out;
}

}  // namespace pbh

#endif  // PBH_LOCAL_SOLVER_HPP
