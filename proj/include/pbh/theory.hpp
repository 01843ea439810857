#ifndef PBH_THEORY_HPP
#define PBH_THEORY_HPP

// Checkable mathematics behind proximal basin hopping: exact potentials and
// the ideal iteration on enumerated 1D landscapes, and the Gaussian
// ball-hitting probabilities that size the sample count.

#include "pbh/objectives.hpp"
#include "pbh/types.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace pbh::theory {

struct Minimizer {
  double location = 0.0;
  double value = 0.0;
};

/**
 * Local minimizers of a 1D function on [-domain_radius, domain_radius] and
 * the local maxima separating them. The basin of minimizer i is the interval
 * between boundaries i-1 and i, the outermost basins being clipped to the
 * domain.
 */
struct LandscapeModel {
  std::vector<Minimizer> minimizers;
  std::vector<double> basin_boundaries;
  double domain_radius = 1.0;

  std::size_t size() const { return minimizers.size(); }

  double basin_lower(std::size_t i) const {
    return i == 0 ? -domain_radius : basin_boundaries[i - 1];
  }
  double basin_upper(std::size_t i) const {
    return i + 1 == minimizers.size() ? domain_radius : basin_boundaries[i];
  }

  /// Distance from x to the closed basin of minimizer i (0 inside).
  double distance_to_basin(double x, std::size_t i) const {
    return std::max({basin_lower(i) - x, 0.0, x - basin_upper(i)});
  }

  std::size_t global_index() const {
    return static_cast<std::size_t>(
        std::min_element(minimizers.begin(), minimizers.end(),
                         [](const Minimizer& a, const Minimizer& b) { return a.value < b.value; }) -
        minimizers.begin());
  }

  void validate() const {
    if (minimizers.empty()) throw InvalidInput("landscape has no minimizers");
    if (basin_boundaries.size() + 1 != minimizers.size()) {
      throw InvalidInput("landscape needs exactly one boundary between adjacent minimizers");
    }
    if (!(domain_radius > 0.0)) throw InvalidInput("domain radius must be positive");
    for (std::size_t i = 0; i + 1 < minimizers.size(); ++i) {
      const double b = basin_boundaries[i];
      if (!(minimizers[i].location < b && b < minimizers[i + 1].location)) {
        throw InvalidInput("boundary must lie strictly between adjacent minimizers");
      }
    }
  }
};

/**
 * Finds all stationary points of a 1D objective on [-radius, radius] from
 * derivative sign changes on a uniform grid of `grid` cells, refined by
 * bisection to 1e-10 and classified by a second difference of f.
 *
 * Throws ResolutionError when a cell hides a pair of stationary points
 * (the derivative at the midpoint disagrees with both ends) or when minima
 * and maxima fail to alternate.
 */
inline LandscapeModel enumerate_1d_landscape(const Objective& f, double radius, int grid) {
  if (f.dimension() != 1) throw InvalidDimension("landscape enumeration requires a 1D objective");
  if (!(radius > 0.0)) throw InvalidInput("radius must be positive");
  if (grid < 2) throw InvalidInput("grid must have at least 2 cells");

  Vector p(1);
  auto deriv = [&](double x) {
    p[0] = x;
    return f.gradient(p)[0];
  };
  auto value = [&](double x) {
    p[0] = x;
    return f.value(p);
  };
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };

  const double h = 2.0 * radius / grid;
  std::vector<double> nodes(static_cast<std::size_t>(grid) + 1);
  std::vector<double> slopes(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i] = -radius + h * static_cast<double>(i);
    slopes[i] = deriv(nodes[i]);
  }
  nodes.back() = radius;
  slopes.back() = deriv(radius);

  struct Stationary {
    double x;
    bool is_min;
  };
  std::vector<Stationary> found;
  auto classify = [&](double x, int left_sign, int right_sign) {
    const double step = 0.5 * h;
    const double second = value(x + step) + value(x - step) - 2.0 * value(x);
    if (second > 0.0) return true;
    if (second < 0.0) return false;
    return left_sign < 0 && right_sign > 0;
  };

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int s = sign(slopes[i]);
    if (s == 0) {
      const int left = i > 0 ? sign(slopes[i - 1]) : -sign(slopes[i + 1]);
      const int right = i + 1 < nodes.size() ? sign(slopes[i + 1]) : -left;
      found.push_back({nodes[i], classify(nodes[i], left, right)});
    }
    if (i + 1 == nodes.size()) break;
    const int t = sign(slopes[i + 1]);
    if (s == 0 || t == 0) continue;
    const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
    if (s == t) {
      if (sign(deriv(mid)) == -s) {
        throw ResolutionError("grid of " + std::to_string(grid) +
                              " cells cannot separate stationary points near x = " +
                              std::to_string(mid) + "; increase the grid");
      }
      continue;
    }
    double lo = nodes[i], hi = nodes[i + 1];
    while (hi - lo > 1e-10) {
      const double m = 0.5 * (lo + hi);
      const int sm = sign(deriv(m));
      if (sm == 0) {
        lo = hi = m;
        break;
      }
      if (sm == s) lo = m; else hi = m;
    }
    const double root = 0.5 * (lo + hi);
    found.push_back({root, classify(root, s, t)});
  }

  LandscapeModel model;
  model.domain_radius = radius;
  bool seen_min = false;
  double pending_max = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (i > 0 && found[i].is_min == found[i - 1].is_min) {
      throw ResolutionError("stationary points do not alternate near x = " +
                            std::to_string(found[i].x) + "; increase the grid");
    }
    if (found[i].is_min) {
      if (seen_min) model.basin_boundaries.push_back(pending_max);
      model.minimizers.push_back({found[i].x, value(found[i].x)});
      seen_min = true;
    } else {
      pending_max = found[i].x;
    }
  }
  if (model.minimizers.empty()) throw ResolutionError("no local minimizer found on the domain");
  return model;
}

/// Distance from each non-global minimizer to the basin of its better
/// adjacent neighbour, maximized over the landscape (0 for a single basin).
inline double max_improving_hop(const LandscapeModel& model) {
  double worst = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    const double here = model.minimizers[i].value;
    const double x = model.minimizers[i].location;
    if (i > 0 && model.minimizers[i - 1].value < here) {
      best = std::min(best, model.distance_to_basin(x, i - 1));
    }
    if (i + 1 < model.size() && model.minimizers[i + 1].value < here) {
      best = std::min(best, model.distance_to_basin(x, i + 1));
    }
    if (std::isfinite(best)) worst = std::max(worst, best);
  }
  return worst;
}

/// V_x(i) = f(m_i) + dist(x, basin_i)^2 / (2 gamma) for every component.
inline std::vector<double> potential(const LandscapeModel& model, double x, double gamma) {
  std::vector<double> v(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double d = model.distance_to_basin(x, i);
    v[i] = model.minimizers[i].value + d * d / (2.0 * gamma);
  }
  return v;
}

/// Indices whose potential is within 1e-12 of the minimum.
inline std::vector<std::size_t> potential_argmin(const LandscapeModel& model, double x,
                                                 double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  const auto v = potential(model, x, gamma);
  const double lowest = *std::min_element(v.begin(), v.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= lowest + 1e-12) out.push_back(i);
  }
  return out;
}

struct IdealState {
  double location = 0.0;
  double value = 0.0;
  double gamma = 0.0;
};

struct IdealPbhResult {
  std::vector<IdealState> trajectory;  // starts with x0
  bool converged = false;
  int iterations_used = 0;
};

/**
 * The exact iteration x_{k+1} = argmin of f over argmin V_{x_k}, with gamma
 * multiplied by eta whenever f does not strictly decrease. A start point that
 * is not an enumerated minimizer (within 1e-9) carries value +infinity, so
 * the first hop always counts as an improvement.
 */
inline IdealPbhResult ideal_pbh(const LandscapeModel& model, double x0, double gamma0,
                                double eta, int max_iter) {
  model.validate();
  if (!(gamma0 > 0.0) || !(eta > 1.0)) throw InvalidInput("need gamma0 > 0 and eta > 1");
  const std::size_t global = model.global_index();
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (i != global && model.minimizers[i].value == model.minimizers[global].value) {
      throw InvalidInput("global minimum value is attained by several components");
    }
  }
  const double target = model.minimizers[global].location;

  double x = x0;
  double fx = std::numeric_limits<double>::infinity();
  for (const auto& m : model.minimizers) {
    if (std::abs(m.location - x0) <= 1e-9) fx = m.value;
  }
  double gamma = gamma0;
  IdealPbhResult result;
  result.trajectory.push_back({x, fx, gamma});

  for (int k = 0;; ++k) {
    if (std::isfinite(fx) && std::abs(x - target) <= 1e-9) {
      result.converged = true;
      result.iterations_used = k;
      break;
    }
    if (k >= max_iter) {
      result.iterations_used = k;
      break;
    }
    const auto candidates = potential_argmin(model, x, gamma);
    std::size_t pick = candidates.front();
    for (std::size_t c : candidates) {
      if (model.minimizers[c].value < model.minimizers[pick].value) pick = c;
    }
    const double next_value = model.minimizers[pick].value;
    if (!(next_value < fx)) gamma *= eta;
    x = model.minimizers[pick].location;
    fx = next_value;
    result.trajectory.push_back({x, fx, gamma});
  }
  return result;
}

/**
 * CDF of the noncentral chi-square with `dof` degrees of freedom and
 * noncentrality `lambda` at t, as the Poisson(lambda / 2) mixture of central
 * chi-square CDFs. Summation starts at the Poisson mode and walks outward
 * until the remaining Poisson mass on each side is below 5e-13, with at most
 * 1e6 terms.
 */
inline double noncentral_chisq_cdf(int dof, double lambda, double t) {
  if (dof < 1) throw InvalidInput("degrees of freedom must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda) || !(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInput("lambda and t must be finite and nonnegative");
  }
  if (t == 0.0) return 0.0;
  const double half_dof = 0.5 * dof;
  const double x = 0.5 * t;
  if (lambda == 0.0) return boost::math::gamma_p(half_dof, x);

  constexpr double kTail = 5e-13;
  constexpr long kMaxTerms = 1'000'000;
  const double mu = 0.5 * lambda;
  auto log_weight = [mu](long k) {
    return -mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0);
  };
  auto term = [&](long k, double w) {
    return w * boost::math::gamma_p(half_dof + static_cast<double>(k), x);
  };

  const long mode = static_cast<long>(std::floor(mu));
  double sum = 0.0;
  long terms = 0;
  // Upward from the mode: weights shrink by mu / (k + 1) < 1.
  for (long k = mode; terms < kMaxTerms; ++k, ++terms) {
    const double w = std::exp(log_weight(k));
    sum += term(k, w);
    const double next = mu / static_cast<double>(k + 1);
    const double ratio = mu / static_cast<double>(k + 2);
    if (ratio < 1.0 && w * next / (1.0 - ratio) < kTail) break;
  }
  // Downward: weights shrink by k / mu < 1.
  for (long k = mode - 1; k >= 0 && terms < kMaxTerms; --k, ++terms) {
    const double w = std::exp(log_weight(k));
    sum += term(k, w);
    const double ratio = static_cast<double>(k) / mu;
    if (w * ratio / (1.0 - ratio) < kTail) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// Probability that a draw of N(c, sigma^2 I_d), ||c|| = center_distance,
/// lands in the ball of radius r around the origin.
inline double ball_hit_probability(double center_distance, double sigma, double r, int d) {
  if (!(center_distance >= 0.0) || !(sigma > 0.0) || !(r > 0.0)) {
    throw InvalidInput("need center_distance >= 0, sigma > 0, r > 0");
  }
  const double lambda = center_distance * center_distance / (sigma * sigma);
  return noncentral_chisq_cdf(d, lambda, r * r / (sigma * sigma));
}

/**
 * Smallest N with 1 - (1 - p)^N >= alpha, i.e. ceil(log(1 - alpha) / log(1 - p)).
 * A ratio within 1e-12 (relative) of an integer counts as that integer, so
 * exact cases such as p = 0.5, alpha = 0.75 are not pushed up by log rounding.
 */
inline long required_samples(double hit_probability, double confidence) {
  if (!(hit_probability > 0.0 && hit_probability < 1.0)) {
    throw InvalidInput("hit probability must lie in (0, 1)");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidInput("confidence must lie in (0, 1)");
  }
  const double ratio = std::log1p(-confidence) / std::log1p(-hit_probability);
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-12 * nearest) return std::max(1L, static_cast<long>(nearest));
  return std::max(1L, static_cast<long>(std::ceil(ratio)));
}

}  // namespace pbh::theory

#endif  // PBH_THEORY_HPP
