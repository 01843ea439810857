#ifndef PBH_BARYCENTER_HPP
#define PBH_BARYCENTER_HPP

#include "pbh/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace pbh {

/// n i.i.d. draws from N(center, delta * gamma * I). Coordinates are drawn
/// sample by sample, so the stream depends only on the rng state and n.
inline std::vector<Vector> draw_samples(Rng& rng, const Vector& center, double delta,
                                        double gamma, int n) {
  const double variance = delta * gamma;
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidInput("sampling variance delta * gamma must be positive and finite");
  }
  if (n < 1) throw InvalidInput("sample count must be >= 1");
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  std::vector<Vector> out(static_cast<std::size_t>(n), Vector(center.size()));
  for (auto& y : out) {
    for (Index j = 0; j < center.size(); ++j) y[j] = center[j] + normal(rng);
  }
  return out;
}

/// Locally minimized samples with their objective values at temperature delta.
struct WeightedSampleSet {
  std::vector<Vector> minimized_points;
  std::vector<double> values;
  double delta = 1.0;
};

namespace detail {

inline std::size_t argmin_value(std::span<const double> values) {
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) -
                                  values.begin());
}

inline void validate(const WeightedSampleSet& set) {
  if (set.minimized_points.empty()) throw InvalidInput("weighted sample set is empty");
  if (set.minimized_points.size() != set.values.size()) {
    throw InvalidInput("points and values differ in length");
  }
  if (!(set.delta > 0.0)) throw InvalidInput("temperature delta must be positive");
  for (double v : set.values) {
    if (std::isnan(v)) throw InvalidInput("NaN objective value in weighted sample set");
  }
}

}  // namespace detail

/// Softmax weights exp(-(v_i - v_min) / delta), normalized. The minimum-value
/// sample always has unnormalized weight exactly 1.
inline std::vector<double> softmin_weights(std::span<const double> values, double delta) {
  const double v_min = *std::min_element(values.begin(), values.end());
  std::vector<double> w(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[i] = std::exp(-(values[i] - v_min) / delta);
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return w;
}

/// Weighted barycenter sum_i lambda_i p_i with lambda = softmin(values / delta).
inline Vector weighted_mean(const WeightedSampleSet& set) {
  detail::validate(set);
  const double v_min = *std::min_element(set.values.begin(), set.values.end());
  const Index d = set.minimized_points.front().size();
  Vector acc = Vector::Zero(d);
  double total = 0.0;
  for (std::size_t i = 0; i < set.values.size(); ++i) {
    const double w = std::exp(-(set.values[i] - v_min) / set.delta);
    if (w == 0.0) continue;
    acc += w * set.minimized_points[i];
    total += w;
  }
  return acc / total;
}

/**
 * Largest temperature for which the barycenter provably lies within
 * `basin_radius` of the best point:
 *
 *   delta* = gap / ln((N - 1) * max_i ||p_i - p_best|| / r)
 *
 * where gap is the difference between the runner-up and the best value.
 * Returns kInfinitySentinel when (N - 1) * max distance <= r, since the bound
 * then holds for every delta. Throws if the minimum is not unique.
 */
inline double concentration_threshold(std::span<const double> values,
                                      std::span<const Vector> points, double basin_radius) {
  if (values.empty() || values.size() != points.size()) {
    throw InvalidInput("values and points must be non-empty and of equal length");
  }
  if (!(basin_radius > 0.0)) throw InvalidInput("basin radius must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("values must be finite");
  }
  const std::size_t best = detail::argmin_value(values);
  double runner_up = kInfinitySentinel;
  double max_dist = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == best) continue;
    runner_up = std::min(runner_up, values[i]);
    max_dist = std::max(max_dist, (points[i] - points[best]).norm());
  }
  if (values.size() == 1) return kInfinitySentinel;
  const double gap = runner_up - values[best];
  if (!(gap > 0.0)) throw InvalidInput("minimum value is tied; concentration threshold undefined");
  const double ratio = static_cast<double>(values.size() - 1) * max_dist / basin_radius;
  if (ratio <= 1.0) return kInfinitySentinel;
  return gap / std::log(ratio);
}

}  // namespace pbh

#endif  // PBH_BARYCENTER_HPP
