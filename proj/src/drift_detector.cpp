#include "pht/drift_detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pht {

double hoeffding_epsilon(double range, double m, double delta) {
  return range * std::sqrt(std::log(2.0 / delta) / (2.0 * m));
}

double harmonic_mean(double n0, double n1) { return 2.0 * n0 * n1 / (n0 + n1); }

std::string to_string(MonitorMode mode) { return mode == MonitorMode::per_class ? "per_class" : "marginal"; }

MonitorMode parse_monitor_mode(const std::string& text) {
  if (text == "marginal") return MonitorMode::marginal;
  if (text == "per_class" || text == "per-class") return MonitorMode::per_class;
  throw std::invalid_argument("unknown monitor mode '" + text + "'");
}

void DetectorConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (n_min == 0) throw std::invalid_argument("n_min must be positive");
  if (max_window < 2 * n_min) throw std::invalid_argument("max_window must be at least 2 * n_min");
}

std::vector<std::size_t> DriftReport::drift_points() const {
  std::vector<std::size_t> points;
  points.reserve(events.size());
  for (const auto& e : events) points.push_back(e.drift_point);
  return points;
}

HoeffdingWindowDetector::HoeffdingWindowDetector(const StreamSchema& schema, DetectorConfig config)
    : schema_(schema), config_(config) {
  config_.validate();
  n_features_ = schema_.feature_count();
  n_groups_ = config_.monitor == MonitorMode::per_class ? std::max<std::size_t>(schema_.class_count(), 1) : 1;
  stat_count_ = n_features_ * n_groups_;
  prefix_.assign(stat_count_ + n_groups_, 0.0);
}

void HoeffdingWindowDetector::push_prefix(const Sample& sample) {
  const std::size_t width = stat_count_ + n_groups_;
  const std::size_t last = prefix_.size() - width;
  prefix_.resize(prefix_.size() + width);
  std::copy(prefix_.begin() + static_cast<std::ptrdiff_t>(last), prefix_.begin() + static_cast<std::ptrdiff_t>(last + width),
            prefix_.begin() + static_cast<std::ptrdiff_t>(last + width));
  double* row = prefix_.data() + last + width;
  const std::size_t group = n_groups_ == 1 ? 0 : static_cast<std::size_t>(sample.label);
  for (std::size_t f = 0; f < n_features_; ++f) {
    const auto& range = schema_.feature_ranges[f];
    const double normalized = range.width() > 0.0 ? (sample.features[f] - range.min) / range.width() : 0.0;
    row[group * n_features_ + f] += normalized;
  }
  row[stat_count_ + group] += 1.0;
}

void HoeffdingWindowDetector::rebuild_prefix() {
  prefix_.assign(stat_count_ + n_groups_, 0.0);
  base_offset_ = 0;
  for (const auto& s : window_) push_prefix(s);
}

void HoeffdingWindowDetector::drop_front(std::size_t count) {
  count = std::min(count, window_.size());
  window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(count));
  first_index_ += count;
  base_offset_ += count;
  if (base_offset_ > std::max<std::size_t>(config_.max_window, 1024)) rebuild_prefix();
}

std::vector<std::size_t> HoeffdingWindowDetector::candidate_splits() const {
  const std::size_t length = window_.size();
  std::vector<std::size_t> splits;
  if (length < 2) return splits;
  if (config_.exhaustive_splits) {
    for (std::size_t k = 1; k < length; ++k) splits.push_back(k);
    return splits;
  }
  for (std::size_t seg = config_.n_min; seg < length; seg *= 2) {
    splits.push_back(seg);
    splits.push_back(length - seg);
  }
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  return splits;
}

std::optional<HoeffdingWindowDetector::Cut> HoeffdingWindowDetector::find_cut() const {
  const std::size_t length = window_.size();
  const std::size_t width = stat_count_ + n_groups_;
  const double* rows = prefix_.data() + base_offset_ * width;
  const double* total = rows + length * width;
  const double n_min = static_cast<double>(config_.n_min);

  struct Test {
    std::size_t split;
    std::size_t stat;
    double gap;
    double m;
  };
  std::vector<Test> tests;
  for (auto k : candidate_splits()) {
    const double* mid = rows + k * width;
    for (std::size_t g = 0; g < n_groups_; ++g) {
      const double n0 = mid[stat_count_ + g] - rows[stat_count_ + g];
      const double n1 = total[stat_count_ + g] - mid[stat_count_ + g];
      if (n0 < n_min || n1 < n_min) continue;
      for (std::size_t f = 0; f < n_features_; ++f) {
        const std::size_t s = g * n_features_ + f;
        const double mean0 = (mid[s] - rows[s]) / n0;
        const double mean1 = (total[s] - mid[s]) / n1;
        tests.push_back({k, s, std::abs(mean0 - mean1), harmonic_mean(n0, n1)});
      }
    }
  }
  if (tests.empty()) return std::nullopt;

  // Bonferroni correction over every test run on this window.
  const double delta = config_.delta / static_cast<double>(tests.size());
  const Test* worst = nullptr;
  double worst_ratio = 1.0;
  for (const auto& t : tests) {
    const double ratio = t.gap / hoeffding_epsilon(1.0, t.m, delta);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = &t;
    }
  }
  if (!worst) return std::nullopt;

  Cut cut;
  cut.split = worst->split;
  cut.evidence.resize(n_features_);
  std::vector<double> best_ratio(n_features_, -1.0);
  for (const auto& t : tests) {
    if (t.split != cut.split) continue;
    const std::size_t f = t.stat % n_features_;
    const double range = schema_.feature_ranges[f].width();
    const double eps = hoeffding_epsilon(1.0, t.m, delta);
    const double ratio = t.gap / eps;
    if (ratio > best_ratio[f]) {
      best_ratio[f] = ratio;
      auto& ev = cut.evidence[f];
      ev.feature = f;
      ev.mean_gap = t.gap * range;
      ev.threshold = eps * range;
      if (config_.monitor == MonitorMode::per_class) ev.class_id = static_cast<ClassId>(t.stat / n_features_);
    }
  }
  for (std::size_t f = 0; f < n_features_; ++f) cut.evidence[f].feature = f;
  return cut;
}

std::optional<std::size_t> HoeffdingWindowDetector::update(const Sample& sample) {
  if (started_ && sample.index != next_index_) {
    throw OutOfOrderSample("sample index " + std::to_string(sample.index) + " received, expected " +
                           std::to_string(next_index_));
  }
  if (sample.features.size() != n_features_) throw std::invalid_argument("sample arity does not match schema");
  if (n_groups_ > 1 && (sample.label < 0 || static_cast<std::size_t>(sample.label) >= n_groups_)) {
    throw std::invalid_argument("sample label outside the schema classes");
  }
  if (!started_) {
    started_ = true;
    first_index_ = sample.index;
  }
  next_index_ = sample.index + 1;

  window_.push_back(sample);
  push_prefix(sample);
  if (window_.size() > config_.max_window) drop_front(window_.size() - config_.max_window);

  std::optional<Cut> last_cut;
  while (auto cut = find_cut()) {
    drop_front(cut->split);
    last_cut = std::move(cut);
  }
  profile_.emplace_back(sample.index, window_.size());
  if (!last_cut) return std::nullopt;

  const std::size_t point = first_index_;
  // A cut that only removes samples already buffered when the previous drift fired belongs to
  // that drift: it sharpens the earlier estimate instead of opening a new event.
  if (!events_.empty() && point <= events_.back().detected_at) {
    events_.back().drift_point = point;
    events_.back().evidence = std::move(last_cut->evidence);
  } else {
    events_.push_back(DriftEvent{point, sample.index, std::move(last_cut->evidence)});
  }
  return point;
}

DriftReport HoeffdingWindowDetector::report() const {
  return DriftReport{config_, events_, profile_};
}

DriftReport detect_stream(const Stream& stream, const DetectorConfig& config) {
  HoeffdingWindowDetector detector(stream.schema, config);
  for (const auto& s : stream.samples) detector.update(s);
  return detector.report();
}

}  // namespace pht
