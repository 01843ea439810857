#ifndef PBH_TYPES_HPP
#define PBH_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace pbh {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Every stochastic component draws from this engine. The sample stream is
// fully determined by the seed (libstdc++ distributions).
using Rng = std::mt19937_64;

// Stands in for +infinity where the result must stay finite: the LJ energy of
// coincident atoms, and "no constraint" thresholds.
inline constexpr double kInfinitySentinel = std::numeric_limits<double>::max();

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidDimension : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Unresolvable names or inconsistent experiment settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid too coarse to separate neighbouring stationary points.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& x) { return x.allFinite(); }

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace pbh

#endif  // PBH_TYPES_HPP
