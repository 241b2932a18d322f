#ifndef PHT_GENERATORS_HPP_
#define PHT_GENERATORS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pht/stream_model.hpp"

namespace pht {

// Counter-based generator: the n-th draw for a seed is splitmix64(seed + (n + 1) * golden_gamma).
// Any draw can be reproduced in isolation, so streams are identical across platforms.
class CounterRng {
 public:
  static constexpr const char* kAlgorithm = "splitmix64-counter";

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
};

struct Sine1Config {
  std::size_t n_samples = 100'000;
  std::size_t drift_period = 20'000;
  double noise_rate = 0.10;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Circle {
  double cx = 0.5;
  double cy = 0.5;
  double radius = 0.25;

  bool contains(double x, double y) const {
    return (x - cx) * (x - cx) + (y - cy) * (y - cy) < radius * radius;
  }
};

struct CirclesConfig {
  std::size_t n_samples = 100'000;
  std::size_t drift_period = 25'000;
  std::vector<Circle> circle_schedule = default_schedule();
  std::uint64_t seed = 1;

  static std::vector<Circle> default_schedule() {
    return {{0.2, 0.5, 0.15}, {0.4, 0.5, 0.2}, {0.6, 0.5, 0.25}, {0.8, 0.5, 0.3}};
  }
  void validate() const;
};

// Label of (x_a, x_b) before noise in the given concept segment.
int sine1_clean_label(double x_a, double x_b, std::size_t segment);

Stream generate_sine1(const Sine1Config& config);
Stream generate_circles(const CirclesConfig& config);

std::vector<std::size_t> true_drift_points(std::size_t n_samples, std::size_t drift_period);
inline std::vector<std::size_t> true_drift_points(const Sine1Config& c) {
  return true_drift_points(c.n_samples, c.drift_period);
}
inline std::vector<std::size_t> true_drift_points(const CirclesConfig& c) {
  return true_drift_points(c.n_samples, c.drift_period);
}

}  // namespace pht

#endif  // PHT_GENERATORS_HPP_
