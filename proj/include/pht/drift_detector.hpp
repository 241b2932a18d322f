#ifndef PHT_DRIFT_DETECTOR_HPP_
#define PHT_DRIFT_DETECTOR_HPP_

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pht/stream_model.hpp"

namespace pht {

// Hoeffding deviation bound for the mean of a variable with the given range:
// range * sqrt(ln(2 / delta) / (2 m)).
double hoeffding_epsilon(double range, double m, double delta);

// Harmonic mean of two segment sizes, 2 n0 n1 / (n0 + n1).
double harmonic_mean(double n0, double n1);

enum class MonitorMode { marginal, per_class };

std::string to_string(MonitorMode mode);
MonitorMode parse_monitor_mode(const std::string& text);

struct DetectorConfig {
  double delta = 0.002;
  std::size_t n_min = 30;
  std::size_t max_window = 10'000;
  MonitorMode monitor = MonitorMode::marginal;
  // Test every split instead of the power-of-two grid anchored at both window ends.
  bool exhaustive_splits = false;

  void validate() const;
};

struct FeatureEvidence {
  std::size_t feature = 0;
  std::optional<ClassId> class_id;  // set in per-class mode: the class whose mean moved most
  double mean_gap = 0.0;
  double threshold = 0.0;
};

struct DriftEvent {
  std::size_t drift_point = 0;  // first sample of the retained suffix
  std::size_t detected_at = 0;  // sample whose arrival triggered the cut
  std::vector<FeatureEvidence> evidence;  // one entry per feature
};

struct DriftReport {
  DetectorConfig config;
  std::vector<DriftEvent> events;
  std::vector<std::pair<std::size_t, std::size_t>> profile;  // (sample index, window length)

  std::vector<std::size_t> drift_points() const;
};

// Sequential drift detector over a labeled stream. Implementations own their state and must be fed
// samples in index order.
class DriftDetector {
 public:
  virtual ~DriftDetector() = default;

  // Returns the drift point when this sample caused a drift to be reported or refined.
  virtual std::optional<std::size_t> update(const Sample& sample) = 0;
  virtual std::size_t window_length() const = 0;
  virtual std::size_t window_start() const = 0;
  virtual const std::vector<std::pair<std::size_t, std::size_t>>& window_size_profile() const = 0;
  virtual DriftReport report() const = 0;
};

class OutOfOrderSample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adaptive-window detector: the window grows with every sample; whenever some split of it into an
// older prefix and a newer suffix shows a monitored mean gap above the Hoeffding threshold, the
// prefix is discarded and the test is repeated on what remains.
class HoeffdingWindowDetector final : public DriftDetector {
 public:
  HoeffdingWindowDetector(const StreamSchema& schema, DetectorConfig config);

  std::optional<std::size_t> update(const Sample& sample) override;
  std::size_t window_length() const override { return window_.size(); }
  std::size_t window_start() const override { return window_.empty() ? next_index_ : first_index_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& window_size_profile() const override { return profile_; }
  DriftReport report() const override;

  const DetectorConfig& config() const { return config_; }
  std::size_t stat_count() const { return stat_count_; }

 private:
  struct Cut {
    std::size_t split = 0;  // prefix length in samples
    std::vector<FeatureEvidence> evidence;
  };

  std::optional<Cut> find_cut() const;
  void push_prefix(const Sample& sample);
  void drop_front(std::size_t count);
  void rebuild_prefix();
  std::vector<std::size_t> candidate_splits() const;

  StreamSchema schema_;
  DetectorConfig config_;
  std::size_t n_features_ = 0;
  std::size_t n_groups_ = 1;  // 1 in marginal mode, class count in per-class mode
  std::size_t stat_count_ = 0;

  std::deque<Sample> window_;
  std::size_t first_index_ = 0;
  std::size_t next_index_ = 0;
  bool started_ = false;

  // Prefix sums over the buffered window, row r covers window positions [0, r) relative to base_.
  // Each row holds stat_count_ normalized sums followed by n_groups_ counts.
  std::vector<double> prefix_;
  std::size_t base_offset_ = 0;  // rows dropped from the front since the last rebuild

  std::vector<DriftEvent> events_;
  std::vector<std::pair<std::size_t, std::size_t>> profile_;
};

DriftReport detect_stream(const Stream& stream, const DetectorConfig& config);

}  // namespace pht

#endif  // PHT_DRIFT_DETECTOR_HPP_
