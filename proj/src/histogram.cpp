#include "pht/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pht {

namespace {

FeatureRange binning_range(const FeatureRange& range) {
  if (range.width() > 0.0) return range;
  return {range.min - 0.5, range.min + 0.5};
}

}  // namespace

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<double> make_edges(const FeatureRange& range, std::size_t bins) {
  const auto r = binning_range(range);
  std::vector<double> edges(bins + 1);
  const double width = r.width();
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = r.min + width * static_cast<double>(i) / static_cast<double>(bins);
  }
  edges.front() = r.min;
  edges.back() = r.max;
  return edges;
}

std::size_t bin_index(const FeatureRange& range, std::size_t bins, double value) {
  const auto r = binning_range(range);
  const double t = (value - r.min) / r.width();
  const double scaled = t * static_cast<double>(bins);
  // Bins are (e_i, e_i+1]; the first bin also takes the range minimum.
  if (!(scaled > 1.0)) return 0;
  const auto b = static_cast<std::size_t>(std::ceil(scaled)) - 1;
  return std::min(b, bins - 1);
}

Histogram empty_histogram(const FeatureRange& range, std::size_t bins) {
  return Histogram{make_edges(range, bins), std::vector<std::uint64_t>(bins, 0)};
}

WindowSummary summarize_window(const Window& window, const StreamSchema& schema, std::size_t bins,
                               const std::optional<Brush>& brush) {
  if (bins == 0) throw std::invalid_argument("bins must be at least 1");
  if (window.samples.empty()) throw std::invalid_argument("cannot summarize an empty window");
  const std::size_t n_features = schema.feature_count();
  const std::size_t n_classes = schema.class_count();
  if (brush && brush->feature >= n_features) throw std::invalid_argument("brush feature out of range");

  WindowSummary summary;
  summary.window_index = window.window_index;
  summary.start = window.start;
  summary.size = window.samples.size();
  summary.count_per_class.assign(n_classes, 0);
  for (const auto& s : window.samples) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= n_classes) {
      throw std::invalid_argument("sample " + std::to_string(s.index) + " has a label outside the schema");
    }
    ++summary.count_per_class[static_cast<std::size_t>(s.label)];
  }

  summary.per_feature.resize(n_features);
  const double n = static_cast<double>(window.samples.size());
  for (std::size_t f = 0; f < n_features; ++f) {
    const auto& range = schema.feature_ranges[f];
    auto& fs = summary.per_feature[f];
    fs.histogram = empty_histogram(range, bins);
    fs.per_class.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      fs.per_class[c].histogram.edges = fs.histogram.edges;
      fs.per_class[c].histogram.counts.assign(bins, 0);
      fs.per_class[c].count = summary.count_per_class[c];
    }
    if (brush) fs.brushed_counts.assign(bins, 0);

    std::vector<double> class_sums(n_classes, 0.0);
    double sum = 0.0;
    for (const auto& s : window.samples) {
      const double v = s.features[f];
      const auto b = bin_index(range, bins, v);
      const auto c = static_cast<std::size_t>(s.label);
      ++fs.histogram.counts[b];
      ++fs.per_class[c].histogram.counts[b];
      if (brush && brush->selects(s)) ++fs.brushed_counts[b];
      sum += v;
      class_sums[c] += v;
    }
    fs.mean = std::clamp(sum / n, range.min, range.max);
    double sq = 0.0;
    for (const auto& s : window.samples) {
      const double d = s.features[f] - fs.mean;
      sq += d * d;
    }
    fs.std = std::sqrt(sq / n);
    for (std::size_t c = 0; c < n_classes; ++c) {
      auto& pc = fs.per_class[c];
      if (pc.count > 0) pc.mean = std::clamp(class_sums[c] / static_cast<double>(pc.count), range.min, range.max);
    }
  }
  return summary;
}

std::vector<WindowSummary> summarize_stream(std::span<const Sample> stream, const WindowSpec& spec,
                                            const StreamSchema& schema, std::size_t bins,
                                            const std::optional<Brush>& brush) {
  std::vector<WindowSummary> out;
  for (const auto& w : slice_windows(stream, spec)) out.push_back(summarize_window(w, schema, bins, brush));
  return out;
}

double tv_distance(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges || p.counts.size() != q.counts.size()) {
    throw HistogramMismatch("tv_distance: histograms do not share edges");
  }
  const auto np = p.total();
  const auto nq = q.total();
  if (np == 0 || nq == 0) throw std::invalid_argument("tv_distance: empty histogram");
  const double inv_p = 1.0 / static_cast<double>(np);
  const double inv_q = 1.0 / static_cast<double>(nq);
  double acc = 0.0;
  for (std::size_t b = 0; b < p.counts.size(); ++b) {
    acc += std::abs(static_cast<double>(p.counts[b]) * inv_p - static_cast<double>(q.counts[b]) * inv_q);
  }
  return std::clamp(0.5 * acc, 0.0, 1.0);
}

MeanSeries mean_series(std::span<const WindowSummary> summaries, std::size_t feature,
                       std::optional<ClassId> class_filter) {
  MeanSeries series;
  series.feature = feature;
  series.class_filter = class_filter;
  for (const auto& s : summaries) {
    if (feature >= s.per_feature.size()) throw std::out_of_range("mean_series: feature index out of range");
    const auto& fs = s.per_feature[feature];
    if (!class_filter) {
      series.values.emplace_back(s.window_index, fs.mean);
      continue;
    }
    const auto c = static_cast<std::size_t>(*class_filter);
    if (*class_filter < 0 || c >= fs.per_class.size()) throw std::out_of_range("mean_series: unknown class");
    if (fs.per_class[c].count == 0) {
      series.empty_windows.push_back(s.window_index);
    } else {
      series.values.emplace_back(s.window_index, fs.per_class[c].mean);
    }
  }
  return series;
}

}  // namespace pht
