#ifndef PHT_HISTOGRAM_HPP_
#define PHT_HISTOGRAM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pht/stream_model.hpp"

namespace pht {

inline constexpr std::size_t kDefaultBins = 40;

// Fixed-edge histogram over one feature's global range. Bins are right-closed, (e_i, e_i+1],
// and the first bin also holds the range minimum.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;

  std::size_t bins() const { return counts.size(); }
  std::uint64_t total() const;
};

// Bin edges for a range. A zero-width range is widened to [min - 0.5, min + 0.5].
std::vector<double> make_edges(const FeatureRange& range, std::size_t bins);
std::size_t bin_index(const FeatureRange& range, std::size_t bins, double value);
Histogram empty_histogram(const FeatureRange& range, std::size_t bins);

struct ClassFeatureSummary {
  Histogram histogram;
  std::uint64_t count = 0;
  double mean = 0.0;  // meaningless when count == 0
};

struct FeatureSummary {
  Histogram histogram;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  // Indexed by dense class id.
  std::vector<ClassFeatureSummary> per_class;
  // Counts of samples inside the brush, filled only when a brush is requested.
  std::vector<std::uint64_t> brushed_counts;
};

struct WindowSummary {
  std::size_t window_index = 0;
  std::size_t start = 0;
  std::size_t size = 0;
  std::vector<FeatureSummary> per_feature;
  std::vector<std::uint64_t> count_per_class;
};

// Value range on one feature; samples with lo <= x[feature] <= hi are "brushed".
struct Brush {
  std::size_t feature = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool selects(const Sample& s) const { return s.features[feature] >= lo && s.features[feature] <= hi; }
};

WindowSummary summarize_window(const Window& window, const StreamSchema& schema, std::size_t bins = kDefaultBins,
                               const std::optional<Brush>& brush = std::nullopt);

std::vector<WindowSummary> summarize_stream(std::span<const Sample> stream, const WindowSpec& spec,
                                            const StreamSchema& schema, std::size_t bins = kDefaultBins,
                                            const std::optional<Brush>& brush = std::nullopt);

class HistogramMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Half the L1 distance between the normalized histograms.
double tv_distance(const Histogram& p, const Histogram& q);

struct MeanSeries {
  std::size_t feature = 0;
  std::optional<ClassId> class_filter;  // nullopt = all classes
  std::vector<std::pair<std::size_t, double>> values;  // (window_index, mean)
  std::vector<std::size_t> empty_windows;  // windows skipped because the class had no samples

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i].second; }
};

MeanSeries mean_series(std::span<const WindowSummary> summaries, std::size_t feature,
                       std::optional<ClassId> class_filter = std::nullopt);

}  // namespace pht

#endif  // PHT_HISTOGRAM_HPP_
