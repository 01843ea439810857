#ifndef PBH_OBJECTIVES_HPP
#define PBH_OBJECTIVES_HPP

#include "pbh/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

namespace pbh {

struct KnownMinimum {
  Vector point;
  double value = 0.0;
};

/**
 * A scalar objective on R^d with an analytic gradient.
 *
 * Objectives are immutable once built and cheap to copy (the callables are
 * shared), so a single instance can be evaluated from several threads.
 */
class Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  // Returns the value and writes the gradient into the second argument.
  using ValueGradFn = std::function<double(const Vector&, Vector&)>;

  Objective(std::string name, Index dimension, ValueFn value, ValueGradFn value_grad,
            std::optional<KnownMinimum> known_minimum = std::nullopt)
      : impl_(std::make_shared<const Impl>(Impl{std::move(name), dimension, std::move(value),
                                                std::move(value_grad),
                                                std::move(known_minimum)})) {
    if (dimension < 1) throw InvalidDimension("objective dimension must be >= 1");
  }

  const std::string& name() const { return impl_->name; }
  Index dimension() const { return impl_->dimension; }
  const std::optional<KnownMinimum>& known_minimum() const { return impl_->known_minimum; }

  double operator()(const Vector& x) const { return impl_->value(x); }
  double value(const Vector& x) const { return impl_->value(x); }

  Vector gradient(const Vector& x) const {
    Vector g(x.size());
    impl_->value_grad(x, g);
    return g;
  }

  double value_and_gradient(const Vector& x, Vector& grad) const {
    grad.resize(x.size());
    return impl_->value_grad(x, grad);
  }

 private:
  struct Impl {
    std::string name;
    Index dimension;
    ValueFn value;
    ValueGradFn value_grad;
    std::optional<KnownMinimum> known_minimum;
  };
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline void require_dimension(int d, int minimum, const char* what) {
  if (d < minimum) {
    throw InvalidDimension(std::string(what) + ": dimension must be >= " + std::to_string(minimum) +
                           ", got " + std::to_string(d));
  }
}

}  // namespace detail

/// f(x) = sum_i x_i^2 + 10 (1 - cos(2 pi x_i)); global minimum 0 at the origin.
inline Objective rastrigin(int d) {
  detail::require_dimension(d, 1, "rastrigin");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto value = [](const Vector& x) {
    double f = 0.0;
    for (Index i = 0; i < x.size(); ++i) f += x[i] * x[i] + 10.0 * (1.0 - std::cos(two_pi * x[i]));
    return f;
  };
  auto value_grad = [](const Vector& x, Vector& g) {
    double f = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double t = two_pi * x[i];
      f += x[i] * x[i] + 10.0 * (1.0 - std::cos(t));
      g[i] = 2.0 * x[i] + 10.0 * two_pi * std::sin(t);
    }
    return f;
  };
  return Objective("rastrigin", d, value, value_grad, KnownMinimum{Vector::Zero(d), 0.0});
}

/// f(x) = 1 + sum_i x_i^2 / 4000 - prod_i cos(x_i / sqrt(i)), i starting at 1.
inline Objective griewank(int d) {
  detail::require_dimension(d, 1, "griewank");
  auto value = [](const Vector& x) {
    double sum = 0.0;
    double prod = 1.0;
    for (Index i = 0; i < x.size(); ++i) {
      sum += x[i] * x[i];
      prod *= std::cos(x[i] * (1.0 / std::sqrt(static_cast<double>(i + 1))));
    }
    return 1.0 + sum / 4000.0 - prod;
  };
  auto value_grad = [](const Vector& x, Vector& g) {
    const Index n = x.size();
    double sum = 0.0;
    double prod = 1.0;
    Vector c(n), s(n), scale(n);
    for (Index i = 0; i < n; ++i) {
      scale[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
      c[i] = std::cos(x[i] * scale[i]);
      s[i] = std::sin(x[i] * scale[i]);
      sum += x[i] * x[i];
      prod *= c[i];
    }
    // d/dx_i of prod = -s_i * scale_i * prod_{j != i} c_j; computed without
    // dividing by c_i, which may vanish.
    for (Index i = 0; i < n; ++i) {
      double others = 1.0;
      for (Index j = 0; j < n; ++j) {
        if (j != i) others *= c[j];
      }
      g[i] = x[i] / 2000.0 + s[i] * scale[i] * others;
    }
    return 1.0 + sum / 4000.0 - prod;
  };
  return Objective("griewank", d, value, value_grad, KnownMinimum{Vector::Zero(d), 0.0});
}

/// f(x) = ||x||^2 / 2. Single basin; used as a sanity objective.
inline Objective quadratic(int d) {
  detail::require_dimension(d, 1, "quadratic");
  auto value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  auto value_grad = [](const Vector& x, Vector& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  return Objective("quadratic", d, value, value_grad, KnownMinimum{Vector::Zero(d), 0.0});
}

namespace lj {

// Pairs closer than this evaluate to the sentinel.
inline constexpr double kSingularDistance = 1e-12;
// Distances are clamped from below at this value inside the gradient.
inline constexpr double kGradientClamp = 1e-6;

inline double energy(const Vector& x) {
  const Index atoms = x.size() / 3;
  double e = 0.0;
  for (Index i = 0; i < atoms; ++i) {
    for (Index j = i + 1; j < atoms; ++j) {
      const double dx = x[3 * i] - x[3 * j];
      const double dy = x[3 * i + 1] - x[3 * j + 1];
      const double dz = x[3 * i + 2] - x[3 * j + 2];
      const double r2 = dx * dx + dy * dy + dz * dz;
      if (r2 < kSingularDistance * kSingularDistance) return kInfinitySentinel;
      const double inv6 = 1.0 / (r2 * r2 * r2);
      e += inv6 * inv6 - 2.0 * inv6;
    }
  }
  return e;
}

inline double energy_and_gradient(const Vector& x, Vector& g) {
  const Index atoms = x.size() / 3;
  g.setZero();
  double e = 0.0;
  bool singular = false;
  constexpr double clamp2 = kGradientClamp * kGradientClamp;
  for (Index i = 0; i < atoms; ++i) {
    for (Index j = i + 1; j < atoms; ++j) {
      const double d[3] = {x[3 * i] - x[3 * j], x[3 * i + 1] - x[3 * j + 1],
                           x[3 * i + 2] - x[3 * j + 2]};
      const double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
      if (r2 < kSingularDistance * kSingularDistance) singular = true;
      const double inv6 = 1.0 / (r2 * r2 * r2);
      if (!singular) e += inv6 * inv6 - 2.0 * inv6;
      // dE/dr2 = -6 r^-14 + 6 r^-8 ; dE/dx_i = 2 dE/dr2 * d
      const double rc2 = std::max(r2, clamp2);
      const double inv2 = 1.0 / rc2;
      const double inv6c = inv2 * inv2 * inv2;
      const double coef = 12.0 * inv2 * (inv6c - inv6c * inv6c);
      for (int k = 0; k < 3; ++k) {
        g[3 * i + k] += coef * d[k];
        g[3 * j + k] -= coef * d[k];
      }
    }
  }
  return singular ? kInfinitySentinel : e;
}

}  // namespace lj

/// Lennard-Jones cluster energy sum_{i<j} r_ij^-12 - 2 r_ij^-6 over `atoms`
/// points in R^3, flattened as (x0, y0, z0, x1, ...).
inline Objective lennard_jones(int atoms) {
  detail::require_dimension(atoms, 2, "lennard_jones (atoms)");
  std::optional<KnownMinimum> known;
  if (atoms == 2) {
    Vector p = Vector::Zero(6);
    p[3] = 1.0;
    known = KnownMinimum{p, -1.0};
  } else if (atoms == 3) {
    Vector p = Vector::Zero(9);
    p[3] = 1.0;
    p[6] = 0.5;
    p[7] = std::sqrt(3.0) / 2.0;
    known = KnownMinimum{p, -3.0};
  }
  return Objective("lj", 3 * atoms, lj::energy, lj::energy_and_gradient, known);
}

}  // namespace pbh

#endif  // PBH_OBJECTIVES_HPP
