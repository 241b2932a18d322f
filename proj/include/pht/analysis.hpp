#ifndef PHT_ANALYSIS_HPP_
#define PHT_ANALYSIS_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pht/histogram.hpp"
#include "pht/stream_model.hpp"

namespace pht {

enum class FeatureStatus { kept, dropped_constant, dropped_low_variability, dropped_no_drift };

std::string to_string(FeatureStatus status);

struct FeatureReport {
  std::size_t feature = 0;
  FeatureStatus status = FeatureStatus::kept;
  // Total variation of the mean series divided by the feature range width, maximized over the
  // all-classes series and every per-class series.
  double drift_score = 0.0;
  std::optional<ClassId> class_filter;  // series that produced drift_score
};

struct FilterOptions {
  double range_epsilon = 1e-9;
  double drift_epsilon = 0.05;
  // Features whose average within-window std is below this fraction of their range are dropped.
  double variability_epsilon = 1e-3;
};

struct FeatureRanking {
  std::vector<FeatureReport> reports;  // indexed by feature
  std::vector<std::size_t> ranked;     // kept features, descending drift_score

  std::optional<std::size_t> top() const {
    return ranked.empty() ? std::nullopt : std::optional<std::size_t>(ranked.front());
  }
};

// Sum of |m[i+1] - m[i]| over a mean series.
double mean_series_variation(const MeanSeries& series);

FeatureRanking filter_features(const StreamSchema& schema, std::span<const WindowSummary> summaries,
                               const FilterOptions& options = {});

struct AlignmentOptions {
  std::size_t bins = kDefaultBins;
  std::size_t n_min = 30;
  // Windows shown on each side of the boundary in the realigned grid.
  std::size_t context_windows = 5;
};

struct AlignmentResult {
  std::size_t window_size = 0;
  std::size_t offset = 0;
  std::size_t boundary_index = 0;
  double sharpness = 0.0;
  // Realigned grid around the boundary: grid_windows windows of window_size starting at grid_start.
  std::size_t grid_start = 0;
  std::size_t grid_windows = 0;
  std::size_t windows_before = 0;  // windows of the grid that end at or before the boundary
  std::size_t feature = 0;         // feature whose per-class means define the sharpness
  std::optional<ClassId> class_filter;
};

// Cross-boundary jump of a mean series divided by the median absolute successive difference on
// either side of the boundary. `left` is the number of series points before the boundary.
double boundary_sharpness(const MeanSeries& series, std::size_t left, double range_width);

AlignmentResult align_drift(const Stream& stream, std::size_t approximate_drift, std::size_t window_size,
                            const AlignmentOptions& options = {});

struct LocalizeOptions {
  std::size_t initial_window = 5'000;
  double shrink_factor = 0.5;
  std::size_t min_window = 250;
  double delta = 0.002;  // significance of cross-window mean jumps
  // An alignment counts as abrupt once sharpness reaches this value at the final window or after
  // up to `halvings` halvings of it.
  double abrupt_sharpness = 2.0;
  std::size_t halvings = 2;
  FilterOptions filter;
  AlignmentOptions alignment;
};

enum class RegionKind { abrupt, continuous };

std::string to_string(RegionKind kind);

struct DriftRegion {
  std::size_t start = 0;  // sample range flagged at the initial window size
  std::size_t end = 0;
  RegionKind kind = RegionKind::abrupt;
  AlignmentResult alignment;        // best alignment tried; authoritative only when abrupt
  std::vector<double> sharpness_trials;  // sharpness at the final window and each halving tried
};

struct Localization {
  std::vector<DriftRegion> regions;

  std::vector<AlignmentResult> alignments() const;
  bool has_continuous_drift() const;
};

Localization localize(const Stream& stream, const LocalizeOptions& options = {});

// Least-squares change point of the monitored means inside [begin, end): the split maximizing the
// summed squared two-sample t statistics over every (feature, class filter) pair.
std::size_t estimate_change_point(const Stream& stream, std::size_t begin, std::size_t end,
                                  std::span<const std::size_t> features, std::size_t min_segment);

}  // namespace pht

#endif  // PHT_ANALYSIS_HPP_
