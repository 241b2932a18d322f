#include "pht/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pht/drift_detector.hpp"

namespace pht {

namespace {

// The all-classes series followed by one series per class.
std::vector<std::optional<ClassId>> class_filters(const StreamSchema& schema) {
  std::vector<std::optional<ClassId>> filters{std::nullopt};
  for (auto c : schema.class_ids) filters.emplace_back(c);
  return filters;
}

std::uint64_t filter_count(const WindowSummary& s, std::optional<ClassId> filter) {
  if (!filter) return s.size;
  return s.count_per_class[static_cast<std::size_t>(*filter)];
}

double filter_mean(const WindowSummary& s, std::size_t feature, std::optional<ClassId> filter) {
  const auto& fs = s.per_feature[feature];
  return filter ? fs.per_class[static_cast<std::size_t>(*filter)].mean : fs.mean;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// For each window pair, the largest |mean jump| / Hoeffding threshold over the monitored
// (feature, class filter) pairs, with delta split across every test performed.
std::vector<double> pair_ratios(std::span<const WindowSummary> summaries, const StreamSchema& schema,
                                std::span<const std::size_t> features, std::size_t n_min, double delta,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  struct Test {
    std::size_t pair;
    double gap;
    double width;
    double m;
  };
  std::vector<Test> tests;
  const auto filters = class_filters(schema);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& a = summaries[pairs[p].first];
    const auto& b = summaries[pairs[p].second];
    for (auto f : features) {
      const double width = schema.feature_ranges[f].width();
      if (!(width > 0.0)) continue;
      for (const auto& filter : filters) {
        const auto n0 = filter_count(a, filter);
        const auto n1 = filter_count(b, filter);
        if (n0 < n_min || n1 < n_min) continue;
        const double gap = std::abs(filter_mean(b, f, filter) - filter_mean(a, f, filter));
        tests.push_back({p, gap, width, harmonic_mean(static_cast<double>(n0), static_cast<double>(n1))});
      }
    }
  }
  std::vector<double> ratios(pairs.size(), 0.0);
  if (tests.empty()) return ratios;
  const double corrected = delta / static_cast<double>(tests.size());
  for (const auto& t : tests) {
    ratios[t.pair] = std::max(ratios[t.pair], t.gap / hoeffding_epsilon(t.width, t.m, corrected));
  }
  return ratios;
}

std::vector<double> transition_ratios(std::span<const WindowSummary> summaries, const StreamSchema& schema,
                                      std::span<const std::size_t> features, std::size_t n_min, double delta) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < summaries.size(); ++i) pairs.emplace_back(i, i + 1);
  return pair_ratios(summaries, schema, features, n_min, delta, pairs);
}

// Window spans [i, j] whose endpoints differ significantly although no adjacent transition inside
// them does: change that accumulates over several windows.
std::vector<std::pair<std::size_t, std::size_t>> cumulative_spans(std::span<const WindowSummary> summaries,
                                                                  const StreamSchema& schema,
                                                                  std::span<const std::size_t> features,
                                                                  std::size_t n_min, double delta,
                                                                  const std::vector<double>& adjacent) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    for (std::size_t j = i + 2; j < summaries.size(); ++j) pairs.emplace_back(i, j);
  }
  const auto ratios = pair_ratios(summaries, schema, features, n_min, delta, pairs);
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    if (ratios[p] <= 1.0) continue;
    const bool explained = std::any_of(adjacent.begin() + static_cast<std::ptrdiff_t>(i),
                                       adjacent.begin() + static_cast<std::ptrdiff_t>(j), [](double r) { return r > 1.0; });
    if (!explained) spans.emplace_back(i, j);
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& sp : spans) {
    if (!merged.empty() && sp.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, sp.second);
    } else {
      merged.push_back(sp);
    }
  }
  return merged;
}

std::vector<WindowSummary> summarize_grid(const Stream& stream, std::size_t start, std::size_t window_size,
                                          std::size_t count, std::size_t bins) {
  std::vector<WindowSummary> out;
  out.reserve(count);
  const std::span<const Sample> all(stream.samples);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = start + k * window_size;
    out.push_back(summarize_window(Window{k, s, all.subspan(s, window_size)}, stream.schema, bins));
  }
  return out;
}

}  // namespace

std::string to_string(FeatureStatus status) {
  switch (status) {
    case FeatureStatus::kept: return "kept";
    case FeatureStatus::dropped_constant: return "dropped_constant";
    case FeatureStatus::dropped_low_variability: return "dropped_low_variability";
    case FeatureStatus::dropped_no_drift: return "dropped_no_drift";
  }
  return "unknown";
}

std::string to_string(RegionKind kind) { return kind == RegionKind::abrupt ? "abrupt" : "continuous"; }

double mean_series_variation(const MeanSeries& series) {
  double total = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) total += std::abs(series[i] - series[i - 1]);
  return total;
}

FeatureRanking filter_features(const StreamSchema& schema, std::span<const WindowSummary> summaries,
                               const FilterOptions& options) {
  if (summaries.size() < 2) throw std::invalid_argument("filter_features: at least 2 windows are required");
  FeatureRanking ranking;
  const auto filters = class_filters(schema);
  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    FeatureReport report;
    report.feature = f;
    const double width = schema.feature_ranges[f].width();
    if (!(width >= options.range_epsilon) || width == 0.0) {
      report.status = FeatureStatus::dropped_constant;
      ranking.reports.push_back(report);
      continue;
    }
    for (const auto& filter : filters) {
      const double score = mean_series_variation(mean_series(summaries, f, filter)) / width;
      if (score > report.drift_score) {
        report.drift_score = score;
        report.class_filter = filter;
      }
    }
    double avg_std = 0.0;
    for (const auto& s : summaries) avg_std += s.per_feature[f].std;
    avg_std /= static_cast<double>(summaries.size());
    if (avg_std < options.variability_epsilon * width) {
      report.status = FeatureStatus::dropped_low_variability;
    } else if (report.drift_score < options.drift_epsilon) {
      report.status = FeatureStatus::dropped_no_drift;
    } else {
      ranking.ranked.push_back(f);
    }
    ranking.reports.push_back(report);
  }
  std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(), [&](std::size_t a, std::size_t b) {
    return ranking.reports[a].drift_score > ranking.reports[b].drift_score;
  });
  return ranking;
}

double boundary_sharpness(const MeanSeries& series, std::size_t left, double range_width) {
  const std::size_t n = series.size();
  if (left == 0 || left >= n) return 0.0;
  const double jump = std::abs(series[left] - series[left - 1]);
  std::vector<double> within;
  for (std::size_t i = 1; i < n; ++i) {
    if (i != left) within.push_back(std::abs(series[i] - series[i - 1]));
  }
  const double floor = range_width > 0.0 ? 1e-12 * range_width : 1e-300;
  const double scale = std::max(median(std::move(within)), floor);
  return std::min(jump / scale, 1e12);
}

AlignmentResult align_drift(const Stream& stream, std::size_t approximate_drift, std::size_t window_size,
                            const AlignmentOptions& options) {
  if (window_size < options.n_min) throw std::invalid_argument("align_drift: window_size below n_min");
  const std::size_t n = stream.size();
  if (approximate_drift < window_size || approximate_drift + window_size > n) {
    throw std::out_of_range("align_drift: drift at " + std::to_string(approximate_drift) +
                            " leaves no room for one window of " + std::to_string(window_size) + " on each side");
  }
  AlignmentResult result;
  result.window_size = window_size;
  result.offset = approximate_drift % window_size;
  result.boundary_index = approximate_drift;
  result.windows_before = std::min(options.context_windows, approximate_drift / window_size);
  const std::size_t after = std::min(options.context_windows, (n - approximate_drift) / window_size);
  result.grid_start = approximate_drift - result.windows_before * window_size;
  result.grid_windows = result.windows_before + after;

  const auto summaries = summarize_grid(stream, result.grid_start, window_size, result.grid_windows, options.bins);
  const auto& schema = stream.schema;
  FilterOptions keep_all;
  keep_all.drift_epsilon = 0.0;
  keep_all.variability_epsilon = 0.0;
  const auto ranking = filter_features(schema, summaries, keep_all);
  result.feature = ranking.top().value_or(0);

  const double width = schema.feature_ranges[result.feature].width();
  std::vector<std::optional<ClassId>> filters;
  for (auto c : schema.class_ids) filters.emplace_back(c);
  if (filters.empty()) filters.emplace_back(std::nullopt);
  result.sharpness = -1.0;
  for (const auto& filter : filters) {
    const auto series = mean_series(summaries, result.feature, filter);
    const auto left = static_cast<std::size_t>(std::count_if(
        series.values.begin(), series.values.end(), [&](const auto& v) { return v.first < result.windows_before; }));
    const double sharpness = boundary_sharpness(series, left, width);
    if (sharpness > result.sharpness) {
      result.sharpness = sharpness;
      result.class_filter = filter;
    }
  }
  result.sharpness = std::max(result.sharpness, 0.0);
  return result;
}

std::size_t estimate_change_point(const Stream& stream, std::size_t begin, std::size_t end,
                                  std::span<const std::size_t> features, std::size_t min_segment) {
  end = std::min(end, stream.size());
  if (end <= begin || end - begin < 2 * min_segment + 1) return begin + (end - begin) / 2;
  const auto& schema = stream.schema;
  const std::size_t n_classes = schema.class_count();
  const std::size_t len = end - begin;

  // A monitored statistic: the mean of `value` over the samples selected by `group`
  // (-1 = every sample, otherwise one class).
  struct Stat {
    int group;
    std::size_t feature;  // feature index, or class id for prevalence statistics
    bool prevalence;
  };
  std::vector<Stat> stats;
  for (int g = -1; g < static_cast<int>(n_classes); ++g) {
    for (auto f : features) stats.push_back({g, f, false});
  }
  for (std::size_t c = 0; n_classes > 1 && c < n_classes; ++c) stats.push_back({-1, c, true});

  std::vector<double> best_curve(len + 1, 0.0);
  std::vector<std::vector<double>> curves;
  double strongest = 0.0;
  std::vector<double> sum(len + 1), cnt(len + 1);
  for (const auto& st : stats) {
    double sq = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const auto& s = stream.samples[begin + i];
      const bool selected = st.group < 0 || s.label == st.group;
      const double v = st.prevalence ? (s.label == static_cast<ClassId>(st.feature) ? 1.0 : 0.0) : s.features[st.feature];
      sum[i + 1] = sum[i] + (selected ? v : 0.0);
      cnt[i + 1] = cnt[i] + (selected ? 1.0 : 0.0);
      if (selected) sq += v * v;
    }
    const double n = cnt[len];
    if (n < 4) continue;
    const double mean = sum[len] / n;
    const double var = sq / n - mean * mean;
    if (!(var > 1e-15)) continue;
    std::vector<double> curve(len + 1, 0.0);
    double peak = 0.0;
    for (std::size_t k = min_segment; k + min_segment <= len; ++k) {
      const double n0 = cnt[k];
      const double n1 = n - n0;
      if (n0 < 2 || n1 < 2) continue;
      const double diff = sum[k] / n0 - (sum[len] - sum[k]) / n1;
      curve[k] = diff * diff * n0 * n1 / (n * var);
      peak = std::max(peak, curve[k]);
    }
    strongest = std::max(strongest, peak);
    curves.push_back(std::move(curve));
  }

  // Statistics without a comparable peak of their own only add noise to the location.
  for (const auto& curve : curves) {
    if (*std::max_element(curve.begin(), curve.end()) < 0.25 * strongest) continue;
    for (std::size_t k = 0; k <= len; ++k) best_curve[k] += curve[k];
  }
  std::size_t best = len / 2;
  double best_score = -1.0;
  for (std::size_t k = min_segment; k + min_segment <= len; ++k) {
    if (best_curve[k] > best_score) {
      best_score = best_curve[k];
      best = k;
    }
  }
  return begin + best;
}

std::vector<AlignmentResult> Localization::alignments() const {
  std::vector<AlignmentResult> out;
  for (const auto& r : regions) {
    if (r.kind == RegionKind::abrupt) out.push_back(r.alignment);
  }
  return out;
}

bool Localization::has_continuous_drift() const {
  return std::any_of(regions.begin(), regions.end(), [](const DriftRegion& r) { return r.kind == RegionKind::continuous; });
}

Localization localize(const Stream& stream, const LocalizeOptions& options) {
  if (options.initial_window < options.min_window) throw std::invalid_argument("localize: initial_window < min_window");
  if (!(options.shrink_factor > 0.0 && options.shrink_factor < 1.0)) {
    throw std::invalid_argument("localize: shrink_factor must lie in (0,1)");
  }
  if (options.min_window < options.alignment.n_min) throw std::invalid_argument("localize: min_window < n_min");

  Localization result;
  const auto& schema = stream.schema;
  const std::span<const Sample> samples(stream.samples);
  const std::size_t n_min = options.alignment.n_min;
  const std::size_t bins = options.alignment.bins;

  const auto summaries = summarize_stream(samples, WindowSpec::disjoint(options.initial_window), schema, bins);
  if (summaries.size() < 2) return result;
  const auto ranking = filter_features(schema, summaries, options.filter);
  if (ranking.ranked.empty()) return result;
  const auto& features = ranking.ranked;

  // Runs of consecutive significant transitions form one region.
  const auto ratios = transition_ratios(summaries, schema, features, n_min, options.delta);
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // [first window, last window]
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] <= 1.0) continue;
    if (!spans.empty() && spans.back().second == i) {
      spans.back().second = i + 1;
    } else {
      spans.emplace_back(i, i + 1);
    }
  }

  for (const auto& [first, last] : spans) {
    DriftRegion region;
    region.start = summaries[first].start;
    region.end = summaries[last].start + summaries[last].size;

    // Zoom in: halve (or shrink) the window and keep the adjacent pair with the largest jump.
    std::size_t lo = region.start;
    std::size_t hi = region.end;
    std::size_t window = options.initial_window;
    while (true) {
      const auto next = static_cast<std::size_t>(std::floor(static_cast<double>(window) * options.shrink_factor));
      if (next < options.min_window || next == window) break;
      const std::size_t count = (hi - lo) / next;
      if (count < 2) break;
      window = next;
      const auto local = summarize_grid(stream, lo, window, count, bins);
      const auto local_ratios = transition_ratios(local, schema, features, n_min, options.delta);
      const auto best = static_cast<std::size_t>(
          std::max_element(local_ratios.begin(), local_ratios.end()) - local_ratios.begin());
      lo = local[best].start;
      hi = local[best + 1].start + window;
    }

    const std::size_t scan_lo = std::max(region.start, lo >= window ? lo - window : 0);
    const std::size_t scan_hi = std::min(region.end, hi + window);
    std::size_t point = estimate_change_point(stream, scan_lo, scan_hi, features, n_min);
    point = std::clamp(point, window, stream.size() - window);

    bool abrupt = false;
    bool have_alignment = false;
    for (std::size_t h = 0; h <= options.halvings && !abrupt; ++h) {
      const std::size_t w = window >> h;
      if (w < n_min || point < w || point + w > stream.size()) break;
      const auto alignment = align_drift(stream, point, w, options.alignment);
      region.sharpness_trials.push_back(alignment.sharpness);
      if (!have_alignment || alignment.sharpness > region.alignment.sharpness) region.alignment = alignment;
      have_alignment = true;
      if (alignment.sharpness >= options.abrupt_sharpness) {
        region.alignment = alignment;
        abrupt = true;
      }
    }
    if (!have_alignment) continue;
    region.kind = abrupt ? RegionKind::abrupt : RegionKind::continuous;
    result.regions.push_back(std::move(region));
  }

  // Drift too gradual for any single transition: no boundary to align, only the sharpness at the
  // region's change point for reference.
  for (const auto& [first, last] : cumulative_spans(summaries, schema, features, n_min, options.delta, ratios)) {
    DriftRegion region;
    region.kind = RegionKind::continuous;
    region.start = summaries[first].start;
    region.end = summaries[last].start + summaries[last].size;
    const std::size_t w = options.initial_window;
    std::size_t point = estimate_change_point(stream, region.start, region.end, features, n_min);
    if (stream.size() >= 2 * w) {
      point = std::clamp(point, w, stream.size() - w);
      region.alignment = align_drift(stream, point, w, options.alignment);
      region.sharpness_trials.push_back(region.alignment.sharpness);
    }
    result.regions.push_back(std::move(region));
  }
  std::sort(result.regions.begin(), result.regions.end(),
            [](const DriftRegion& a, const DriftRegion& b) { return a.start < b.start; });
  return result;
}

}  // namespace pht
