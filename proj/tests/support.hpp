#ifndef PBH_TESTS_SUPPORT_HPP
#define PBH_TESTS_SUPPORT_HPP

// Oracles shared by the unit tests and the acceptance binary. Everything here
// is written independently of the library code it checks.

#include "pbh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace pbh::testing {

/// Central differences with step 1e-6 scaled by the coordinate magnitude.
inline Vector finite_difference_gradient(const Objective& f, const Vector& x) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / ((xp[i] - x[i]) + (x[i] - xm[i]));
  }
  return g;
}

/// Worst coordinate error relative to max(1, |g|_inf).
inline double gradient_relative_error(const Objective& f, const Vector& x) {
  const Vector g = f.gradient(x);
  const Vector fd = finite_difference_gradient(f, x);
  const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  return (g - fd).lpNorm<Eigen::Infinity>() / scale;
}

inline Vector uniform_point(Rng& rng, Index d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector x(d);
  for (Index i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

/// Atoms on a jittered cubic lattice of spacing 1.1; every pair stays beyond 0.7.
inline Vector lj_configuration(Rng& rng, int atoms) {
  const int side = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(atoms))));
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  Vector x(3 * atoms);
  for (int a = 0; a < atoms; ++a) {
    const int ix = a % side, iy = (a / side) % side, iz = a / (side * side);
    x[3 * a] = 1.1 * ix + jitter(rng);
    x[3 * a + 1] = 1.1 * iy + jitter(rng);
    x[3 * a + 2] = 1.1 * iz + jitter(rng);
  }
  return x;
}

/// Straight-line pairwise LJ sum, independent of the library's loop.
inline double lj_reference(const Vector& x) {
  const Index atoms = x.size() / 3;
  double e = 0.0;
  for (Index i = 0; i < atoms; ++i) {
    for (Index j = 0; j < atoms; ++j) {
      if (j <= i) continue;
      const double r = (x.segment<3>(3 * i) - x.segment<3>(3 * j)).norm();
      e += std::pow(r, -12.0) - 2.0 * std::pow(r, -6.0);
    }
  }
  return e;
}

/// Huber sum computed term by term from the documented formula.
inline double scaling_reference(const ScalingLawDataset& data, ScalingLaw law, const Vector& th) {
  const Index k = data.domains();
  double total = 0.0;
  for (const auto& o : data.observations) {
    const Vector& h = o.domain_weights;
    double alpha = th[2 + k], beta = th[4 + 2 * k];
    if (law == ScalingLaw::full) {
      for (Index j = 0; j < k; ++j) {
        alpha += th[5 + 2 * k + j] * h[j];
        beta += th[5 + 3 * k + j] * h[j];
      }
    }
    double la = th[1], lb = th[3 + k];
    for (Index j = 0; j < k; ++j) {
      la += th[2 + j] * h[j];
      lb += th[4 + k + j] * h[j];
    }
    const double pred = std::exp(th[0]) + std::exp(la) / std::pow(o.model_size / 1e6, alpha) +
                        std::exp(lb) / std::pow(o.tokens / 1e9, beta);
    const double r = std::log(pred) - std::log(o.loss);
    const double a = std::abs(r);
    const double d = data.huber_delta;
    total += a <= d ? 0.5 * r * r : d * (a - 0.5 * d);
  }
  return total / static_cast<double>(data.observations.size());
}

/// Objective list used by the gradient checks: (label, objective, sampler).
struct GradientCase {
  std::string label;
  Objective f;
  double lo, hi;  // sampling box, unused for lj
};

inline std::vector<GradientCase> gradient_cases(int d) {
  std::vector<GradientCase> cases;
  cases.push_back({"rastrigin", rastrigin(d), -5.12, 5.12});
  cases.push_back({"griewank", griewank(d), -600.0, 600.0});
  cases.push_back({"quadratic", quadratic(d), -10.0, 10.0});
  // LJ needs at least two atoms; d = 1 maps to the smallest cluster.
  cases.push_back({"lj", lennard_jones(std::max(d, 2)), 0.0, 0.0});
  SyntheticScalingOptions opt;
  opt.domains = d;
  cases.push_back({"scaling-additive",
                   scaling_law_objective(generate_synthetic_scaling_data(11, 32, ScalingLaw::additive, opt),
                                         ScalingLaw::additive),
                   -1.0, 1.0});
  cases.push_back({"scaling-full",
                   scaling_law_objective(generate_synthetic_scaling_data(12, 32, ScalingLaw::full, opt),
                                         ScalingLaw::full),
                   -1.0, 1.0});
  return cases;
}

inline Vector sample_for(const GradientCase& c, Rng& rng) {
  if (c.label == "lj") return lj_configuration(rng, static_cast<int>(c.f.dimension() / 3));
  return uniform_point(rng, c.f.dimension(), c.lo, c.hi);
}

/// Dense-grid argmin of a 1D function on [lo, hi].
template <class F>
double grid_argmin(F&& f, double lo, double hi, int n) {
  double best_x = lo, best_v = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

/// Random instance for the concentration-threshold soundness check.
struct MinimizerSet {
  std::vector<double> values;
  std::vector<Vector> points;
  double radius = 1.0;
};

inline MinimizerSet random_minimizer_set(Rng& rng) {
  std::uniform_int_distribution<int> n_dist(2, 10), d_dist(1, 5);
  std::uniform_real_distribution<double> coord(-5.0, 5.0), val(0.0, 3.0), rad(0.05, 2.0);
  MinimizerSet s;
  const int n = n_dist(rng), d = d_dist(rng);
  for (int i = 0; i < n; ++i) {
    s.points.push_back(uniform_point(rng, d, -5.0, 5.0));
    s.values.push_back(val(rng));
  }
  // Force a unique minimum.
  const auto best = std::min_element(s.values.begin(), s.values.end()) - s.values.begin();
  s.values[static_cast<std::size_t>(best)] -= 0.1;
  s.radius = rad(rng);
  return s;
}

/// True weighted mean from unshifted weights, in long double.
inline Vector naive_weighted_mean(const std::vector<Vector>& points, const std::vector<double>& values,
                                  double delta) {
  long double total = 0.0L;
  std::vector<long double> acc(static_cast<std::size_t>(points.front().size()), 0.0L);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const long double w = std::exp(-static_cast<long double>(values[i]) / delta);
    total += w;
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * points[i][static_cast<Index>(j)];
  }
  Vector out(points.front().size());
  for (std::size_t j = 0; j < acc.size(); ++j) out[static_cast<Index>(j)] = static_cast<double>(acc[j] / total);
  return out;
}

inline bool traces_identical(const RunTrace& a, const RunTrace& b) {
  if (a.iterations.size() != b.iterations.size()) return false;
  if (a.final_value != b.final_value || a.final_point != b.final_point) return false;
  if (a.termination != b.termination || a.iterations_run != b.iterations_run) return false;
  if (a.record_stride != b.record_stride) return false;
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const auto& p = a.iterations[i];
    const auto& q = b.iterations[i];
    if (p.index != q.index || p.iterate != q.iterate || p.f_value != q.f_value || p.gamma != q.gamma ||
        p.delta != q.delta || p.n_samples != q.n_samples || p.accepted != q.accepted ||
        p.outcome != q.outcome) {
      return false;
    }
  }
  return true;
}

inline bool trace_monotone(const RunTrace& t) {
  double prev = t.initial_value;
  for (const auto& r : t.iterations) {
    if (r.f_value > prev) return false;
    prev = r.f_value;
  }
  return true;
}

inline bool gamma_nondecreasing(const RunTrace& t) {
  for (std::size_t i = 1; i < t.iterations.size(); ++i) {
    if (t.iterations[i].gamma < t.iterations[i - 1].gamma) return false;
  }
  return true;
}

}  // namespace pbh::testing

#endif  // PBH_TESTS_SUPPORT_HPP
