#ifndef PBH_SCALING_LAW_HPP
#define PBH_SCALING_LAW_HPP

// Robust (Huber) fit of a data-mixture scaling law.
//
// With k mixture domains, weights h on the simplex, model size K and token
// count D, the predicted loss is
//
//   L(K, D, h) = E + A(h) / K'^alpha(h) + B(h) / D'^beta(h)
//
//   K' = K / 1e6,  D' = D / 1e9
//   E        = exp(e)
//   A(h)     = exp(a0 + sum_j a_j h_j)
//   B(h)     = exp(b0 + sum_j b_j h_j)
//   alpha(h) = alpha0 (+ sum_j alpha_j h_j for the full law)
//   beta(h)  = beta0  (+ sum_j beta_j h_j  for the full law)
//
// Parameter vector layout:
//   additive: [e, a0, a_1..a_k, alpha0, b0, b_1..b_k, beta0]            2k + 5
//   full:     additive followed by [alpha_1..alpha_k, beta_1..beta_k]   4k + 5
//
// The fit minimizes the mean Huber loss of r = log L_pred - log L_obs. The log
// prediction is a log-sum-exp of three terms, so it stays finite for any
// parameter vector.

#include "pbh/objectives.hpp"
#include "pbh/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pbh {

enum class ScalingLaw { additive, full };

inline std::string to_string(ScalingLaw law) {
  return law == ScalingLaw::additive ? "additive" : "full";
}

struct ScalingObservation {
  double model_size = 0.0;  // K
  double tokens = 0.0;      // D
  Vector domain_weights;    // h
  double loss = 0.0;
};

struct ScalingLawDataset {
  std::vector<ScalingObservation> observations;
  double huber_delta = 1e-3;
  // Ground truth used to generate synthetic data, when known.
  std::optional<Vector> true_parameters;
  // Half-width of the uniform log-space noise applied to each loss.
  double noise_level = 0.0;

  Index domains() const {
    return observations.empty() ? 0 : observations.front().domain_weights.size();
  }
};

inline Index scaling_parameter_count(ScalingLaw law, Index domains) {
  return law == ScalingLaw::additive ? 2 * domains + 5 : 4 * domains + 5;
}

inline constexpr double kModelSizeScale = 1e6;
inline constexpr double kTokenScale = 1e9;

inline double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

inline double huber_derivative(double r, double delta) {
  if (std::abs(r) <= delta) return r;
  return r > 0 ? delta : -delta;
}

namespace detail {

struct ScalingTerms {
  double log_pred = 0.0;
  double w_const = 0.0, w_model = 0.0, w_tokens = 0.0;  // softmax of the three terms
  double log_k = 0.0, log_d = 0.0;
};

inline ScalingTerms scaling_terms(const Vector& theta, ScalingLaw law,
                                  const ScalingObservation& obs) {
  const Index k = obs.domain_weights.size();
  const Vector& h = obs.domain_weights;
  ScalingTerms t;
  t.log_k = std::log(obs.model_size / kModelSizeScale);
  t.log_d = std::log(obs.tokens / kTokenScale);

  const Index a0 = 1, alpha0 = 2 + k, b0 = 3 + k, beta0 = 4 + 2 * k;
  double alpha = theta[alpha0];
  double beta = theta[beta0];
  if (law == ScalingLaw::full) {
    alpha += theta.segment(5 + 2 * k, k).dot(h);
    beta += theta.segment(5 + 3 * k, k).dot(h);
  }
  const double u0 = theta[0];
  const double u1 = theta[a0] + theta.segment(a0 + 1, k).dot(h) - alpha * t.log_k;
  const double u2 = theta[b0] + theta.segment(b0 + 1, k).dot(h) - beta * t.log_d;
  const double m = std::max({u0, u1, u2});
  const double e0 = std::exp(u0 - m), e1 = std::exp(u1 - m), e2 = std::exp(u2 - m);
  const double s = e0 + e1 + e2;
  t.log_pred = m + std::log(s);
  t.w_const = e0 / s;
  t.w_model = e1 / s;
  t.w_tokens = e2 / s;
  return t;
}

inline void validate_dataset(const ScalingLawDataset& data) {
  if (data.observations.empty()) throw InvalidInput("scaling-law dataset is empty");
  if (!(data.huber_delta > 0.0)) throw InvalidInput("huber_delta must be positive");
  const Index k = data.domains();
  if (k < 1) throw InvalidInput("scaling-law observations need at least one domain weight");
  for (const auto& o : data.observations) {
    if (o.domain_weights.size() != k) throw InvalidInput("inconsistent domain weight lengths");
    if (!(o.model_size > 0.0 && o.tokens > 0.0 && o.loss > 0.0)) {
      throw InvalidInput("model size, tokens and loss must be strictly positive");
    }
    if ((o.domain_weights.array() < 0.0).any() ||
        std::abs(o.domain_weights.sum() - 1.0) > 1e-12) {
      throw InvalidInput("domain weights must lie on the simplex");
    }
  }
}

}  // namespace detail

/// Predicted loss of one observation's (K, D, h) under parameters `theta`.
inline double scaling_law_predict(const Vector& theta, ScalingLaw law,
                                  const ScalingObservation& obs) {
  return std::exp(detail::scaling_terms(theta, law, obs).log_pred);
}

inline Objective scaling_law_objective(const ScalingLawDataset& data, ScalingLaw law) {
  detail::validate_dataset(data);
  const Index k = data.domains();
  const Index dim = scaling_parameter_count(law, k);
  auto shared = std::make_shared<const ScalingLawDataset>(data);

  auto value = [shared, law](const Vector& theta) {
    double total = 0.0;
    for (const auto& o : shared->observations) {
      const double r = detail::scaling_terms(theta, law, o).log_pred - std::log(o.loss);
      total += huber(r, shared->huber_delta);
    }
    return total / static_cast<double>(shared->observations.size());
  };

  auto value_grad = [shared, law, k](const Vector& theta, Vector& g) {
    g.setZero();
    double total = 0.0;
    const double inv_p = 1.0 / static_cast<double>(shared->observations.size());
    for (const auto& o : shared->observations) {
      const auto t = detail::scaling_terms(theta, law, o);
      const double r = t.log_pred - std::log(o.loss);
      total += huber(r, shared->huber_delta);
      const double c = huber_derivative(r, shared->huber_delta) * inv_p;
      const Vector& h = o.domain_weights;
      g[0] += c * t.w_const;
      g[1] += c * t.w_model;
      g.segment(2, k) += (c * t.w_model) * h;
      g[2 + k] -= c * t.w_model * t.log_k;
      g[3 + k] += c * t.w_tokens;
      g.segment(4 + k, k) += (c * t.w_tokens) * h;
      g[4 + 2 * k] -= c * t.w_tokens * t.log_d;
      if (law == ScalingLaw::full) {
        g.segment(5 + 2 * k, k) -= (c * t.w_model * t.log_k) * h;
        g.segment(5 + 3 * k, k) -= (c * t.w_tokens * t.log_d) * h;
      }
    }
    return total * inv_p;
  };

  std::optional<KnownMinimum> known;
  if (data.true_parameters && data.noise_level == 0.0 &&
      data.true_parameters->size() == dim) {
    known = KnownMinimum{*data.true_parameters, 0.0};
  }
  return Objective("scaling-" + to_string(law), dim, value, value_grad, known);
}

struct SyntheticScalingOptions {
  Index domains = 7;
  double noise_level = 1e-4;
  double huber_delta = 1e-3;
};

/**
 * Synthetic stand-in for collected training runs.
 *
 * Ground truth is drawn uniformly from:
 *   E in [1.5, 2.5], a0 and b0 in [0, 1], a_j and b_j in [-0.5, 0.5],
 *   alpha0 and beta0 in [0.25, 0.45], alpha_j and beta_j in [-0.05, 0.05].
 * K is log-uniform in [1e7, 1e9], D log-uniform in [1e9, 1e11], and h is a
 * flat Dirichlet draw. Each loss is the exact prediction times exp(u) with
 * u uniform in [-noise_level, noise_level], so the true parameters score at
 * most noise_level^2 / 2 whenever noise_level <= huber_delta.
 */
inline ScalingLawDataset generate_synthetic_scaling_data(std::uint64_t seed, int p,
                                                         ScalingLaw law,
                                                         SyntheticScalingOptions options = {}) {
  if (p < 1) throw InvalidInput("observation count must be >= 1");
  if (options.domains < 1) throw InvalidInput("domain count must be >= 1");
  const Index k = options.domains;
  Rng rng = make_rng(seed, 0x5ca1e);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Vector theta = Vector::Zero(scaling_parameter_count(law, k));
  theta[0] = std::log(uniform(1.5, 2.5));
  theta[1] = uniform(0.0, 1.0);
  for (Index j = 0; j < k; ++j) theta[2 + j] = uniform(-0.5, 0.5);
  theta[2 + k] = uniform(0.25, 0.45);
  theta[3 + k] = uniform(0.0, 1.0);
  for (Index j = 0; j < k; ++j) theta[4 + k + j] = uniform(-0.5, 0.5);
  theta[4 + 2 * k] = uniform(0.25, 0.45);
  if (law == ScalingLaw::full) {
    for (Index j = 0; j < 2 * k; ++j) theta[5 + 2 * k + j] = uniform(-0.05, 0.05);
  }

  ScalingLawDataset data;
  data.huber_delta = options.huber_delta;
  data.noise_level = options.noise_level;
  data.true_parameters = theta;
  data.observations.reserve(static_cast<std::size_t>(p));
  std::exponential_distribution<double> expo(1.0);
  for (int i = 0; i < p; ++i) {
    ScalingObservation o;
    o.model_size = std::pow(10.0, uniform(7.0, 9.0));
    o.tokens = std::pow(10.0, uniform(9.0, 11.0));
    o.domain_weights.resize(k);
    for (Index j = 0; j < k; ++j) o.domain_weights[j] = expo(rng);
    o.domain_weights /= o.domain_weights.sum();
    const double noise = options.noise_level > 0.0
                             ? uniform(-options.noise_level, options.noise_level)
                             : 0.0;
    o.loss = scaling_law_predict(theta, law, o) * std::exp(noise);
    data.observations.push_back(std::move(o));
  }
  return data;
}

}  // namespace pbh

#endif  // PBH_SCALING_LAW_HPP
