#include "pht/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace pht {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

StreamSchema unit_square_schema(std::string a, std::string b) {
  StreamSchema schema;
  schema.feature_names = {std::move(a), std::move(b)};
  schema.feature_ranges = {{0.0, 1.0}, {0.0, 1.0}};
  schema.class_ids = {0, 1};
  schema.class_names = {"0", "1"};
  return schema;
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  std::uint64_t z = seed_ + (counter + 1) * kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

void Sine1Config::validate() const {
  if (n_samples == 0) throw std::invalid_argument("sine1: n_samples must be positive");
  if (drift_period == 0) throw std::invalid_argument("sine1: drift_period must be positive");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("sine1: noise_rate must lie in [0,1]");
}

void CirclesConfig::validate() const {
  if (n_samples == 0) throw std::invalid_argument("circles: n_samples must be positive");
  if (drift_period == 0) throw std::invalid_argument("circles: drift_period must be positive");
  if (circle_schedule.empty()) throw std::invalid_argument("circles: circle_schedule is empty");
  for (const auto& c : circle_schedule) {
    const bool inside = c.cx >= 0.0 && c.cx <= 1.0 && c.cy >= 0.0 && c.cy <= 1.0 && c.radius > 0.0 && c.radius <= 1.0;
    if (!inside) throw std::invalid_argument("circles: circle parameters must lie in [0,1] with radius > 0");
  }
}

int sine1_clean_label(double x_a, double x_b, std::size_t segment) {
  const int base = x_b < std::sin(x_a) ? 1 : 0;
  return segment % 2 == 0 ? base : 1 - base;
}

Stream generate_sine1(const Sine1Config& config) {
  config.validate();
  const CounterRng rng(config.seed);
  Stream stream;
  stream.schema = unit_square_schema("x_a", "x_b");
  stream.samples.resize(config.n_samples);
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    const double x_a = rng.uniform(3 * i);
    const double x_b = rng.uniform(3 * i + 1);
    int label = sine1_clean_label(x_a, x_b, i / config.drift_period);
    if (rng.uniform(3 * i + 2) < config.noise_rate) label = 1 - label;
    stream.samples[i] = Sample{i, {x_a, x_b}, label};
  }
  return stream;
}

Stream generate_circles(const CirclesConfig& config) {
  config.validate();
  const CounterRng rng(config.seed);
  Stream stream;
  stream.schema = unit_square_schema("x", "y");
  stream.samples.resize(config.n_samples);
  const auto& schedule = config.circle_schedule;
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    const double x = rng.uniform(2 * i);
    const double y = rng.uniform(2 * i + 1);
    const auto& circle = schedule[(i / config.drift_period) % schedule.size()];
    stream.samples[i] = Sample{i, {x, y}, circle.contains(x, y) ? 1 : 0};
  }
  return stream;
}

std::vector<std::size_t> true_drift_points(std::size_t n_samples, std::size_t drift_period) {
  std::vector<std::size_t> points;
  if (drift_period == 0) return points;
  for (std::size_t p = drift_period; p < n_samples; p += drift_period) points.push_back(p);
  return points;
}

}  // namespace pht
