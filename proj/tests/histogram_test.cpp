#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pht/generators.hpp"
#include "pht/histogram.hpp"
#include "test_streams.hpp"

using namespace pht;

namespace {

Stream one_feature(const std::vector<double>& values, const std::vector<ClassId>& labels = {}) {
  Stream s;
  s.schema = pht::testing::unit_schema(1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.samples.push_back(Sample{i, {values[i]}, labels.empty() ? 0 : labels[i]});
  }
  return s;
}

WindowSummary whole(const Stream& s, std::size_t bins) {
  return summarize_window(Window{0, 0, std::span<const Sample>(s.samples)}, s.schema, bins);
}

Histogram hist(std::vector<std::uint64_t> counts) {
  return Histogram{make_edges({0.0, 1.0}, counts.size()), std::move(counts)};
}

// Plain re-computation of half the L1 distance between normalized counts.
double tv_oracle(const Histogram& p, const Histogram& q) {
  double np = 0, nq = 0;
  for (auto c : p.counts) np += static_cast<double>(c);
  for (auto c : q.counts) nq += static_cast<double>(c);
  double acc = 0;
  for (std::size_t b = 0; b < p.counts.size(); ++b) acc += std::fabs(p.counts[b] / np - q.counts[b] / nq);
  return acc / 2;
}

}  // namespace

TEST(SummarizeWindowTest, HandCountedExample) {
  const auto s = one_feature({0.0, 0.25, 0.5, 1.0});
  const auto summary = whole(s, 4);
  const auto& fs = summary.per_feature[0];
  EXPECT_EQ(fs.histogram.counts, (std::vector<std::uint64_t>{2, 1, 0, 1}));
  EXPECT_DOUBLE_EQ(fs.mean, 0.4375);
  EXPECT_EQ(fs.histogram.edges, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  // population std
  const double var = (0.4375 * 0.4375 + 0.1875 * 0.1875 + 0.0625 * 0.0625 + 0.5625 * 0.5625) / 4;
  EXPECT_NEAR(fs.std, std::sqrt(var), 1e-15);
}

TEST(SummarizeWindowTest, RangeEndsLandInOuterBins) {
  const auto s = one_feature({0.0, 1.0, 0.999999});
  const auto summary = whole(s, 40);
  EXPECT_EQ(summary.per_feature[0].histogram.counts.front(), 1u);
  EXPECT_EQ(summary.per_feature[0].histogram.counts.back(), 2u);
}

TEST(SummarizeWindowTest, UniformWindowMean) {
  const auto s = pht::testing::uniform_stream(5'000, 1, 3);
  const auto summary = summarize_window(Window{0, 0, s.samples}, s.schema);
  double direct = 0;
  for (const auto& sm : s.samples) direct += sm.features[0];
  direct /= 5'000;
  EXPECT_NEAR(summary.per_feature[0].mean, direct, 1e-12);
  EXPECT_NEAR(summary.per_feature[0].mean, 0.5, 0.02);
}

TEST(SummarizeWindowTest, DefaultBinsIsForty) {
  EXPECT_EQ(kDefaultBins, 40u);
  const auto s = pht::testing::uniform_stream(10, 2, 1);
  EXPECT_EQ(summarize_window(Window{0, 0, s.samples}, s.schema).per_feature[1].histogram.bins(), 40u);
}

TEST(SummarizeWindowTest, ConservationAndMeanConsistency) {
  const auto s = generate_sine1(Sine1Config{});
  for (const auto& summary : summarize_stream(s.samples, WindowSpec::disjoint(5'200), s.schema)) {
    std::uint64_t total = 0;
    for (auto c : summary.count_per_class) total += c;
    ASSERT_EQ(total, summary.size);
    for (const auto& fs : summary.per_feature) {
      ASSERT_EQ(fs.histogram.total(), summary.size);
      for (std::size_t b = 0; b < fs.histogram.bins(); ++b) {
        std::uint64_t sum = 0;
        for (const auto& pc : fs.per_class) sum += pc.histogram.counts[b];
        ASSERT_EQ(sum, fs.histogram.counts[b]);
      }
      double weighted = 0;
      for (const auto& pc : fs.per_class) weighted += pc.mean * static_cast<double>(pc.count);
      weighted /= static_cast<double>(summary.size);
      ASSERT_NEAR(weighted, fs.mean, 1e-9 * std::fabs(fs.mean));
      ASSERT_GE(fs.mean, 0.0);
      ASSERT_LE(fs.mean, 1.0);
    }
  }
}

TEST(SummarizeWindowTest, ZeroWidthFeatureStillBins) {
  Stream s = one_feature({3.7, 3.7, 3.7});
  s.schema.feature_ranges[0] = {3.7, 3.7};
  const auto summary = whole(s, 5);
  EXPECT_EQ(summary.per_feature[0].histogram.total(), 3u);
  EXPECT_DOUBLE_EQ(summary.per_feature[0].mean, 3.7);
  EXPECT_DOUBLE_EQ(summary.per_feature[0].std, 0.0);
}

TEST(SummarizeWindowTest, RejectsBadInput) {
  const auto s = one_feature({0.5});
  EXPECT_THROW(whole(s, 0), std::invalid_argument);
  EXPECT_THROW(summarize_window(Window{0, 0, {}}, s.schema, 4), std::invalid_argument);
  const auto bad = one_feature({0.5}, {7});
  EXPECT_THROW(whole(bad, 4), std::invalid_argument);
}

TEST(SummarizeWindowTest, BrushCounts) {
  const auto s = pht::testing::uniform_stream(2'000, 2, 9);
  const auto full = summarize_window(Window{0, 0, s.samples}, s.schema, 20, Brush{0, 0.0, 1.0});
  for (const auto& fs : full.per_feature) EXPECT_EQ(fs.brushed_counts, fs.histogram.counts);

  const Brush brush{1, 0.2, 0.4};
  const auto part = summarize_window(Window{0, 0, s.samples}, s.schema, 20, brush);
  std::vector<std::uint64_t> oracle(20, 0);
  for (const auto& sm : s.samples) {
    if (sm.features[1] >= 0.2 && sm.features[1] <= 0.4) ++oracle[bin_index({0, 1}, 20, sm.features[0])];
  }
  EXPECT_EQ(part.per_feature[0].brushed_counts, oracle);
  EXPECT_TRUE(summarize_window(Window{0, 0, s.samples}, s.schema, 20).per_feature[0].brushed_counts.empty());
}

TEST(SummarizeStreamTest, FigureWindowCounts) {
  const auto circles = generate_circles(CirclesConfig{});
  EXPECT_EQ(summarize_stream(circles.samples, WindowSpec::disjoint(5'000), circles.schema).size(), 20u);
  const auto sine = generate_sine1(Sine1Config{});
  EXPECT_EQ(summarize_stream(sine.samples, WindowSpec::disjoint(5'200), sine.schema).size(), 19u);
  EXPECT_TRUE(summarize_stream({}, WindowSpec::disjoint(10), sine.schema).empty());
}

TEST(SummarizeStreamTest, EqualsMappingOverSlices) {
  const auto s = pht::testing::uniform_stream(1'000, 2, 4);
  const WindowSpec spec{100, 70, 13};
  const auto summaries = summarize_stream(s.samples, spec, s.schema, 8);
  const auto windows = slice_windows(s.samples, spec);
  ASSERT_EQ(summaries.size(), windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto direct = summarize_window(windows[k], s.schema, 8);
    EXPECT_EQ(summaries[k].start, direct.start);
    EXPECT_EQ(summaries[k].per_feature[1].histogram.counts, direct.per_feature[1].histogram.counts);
    EXPECT_EQ(summaries[k].per_feature[1].mean, direct.per_feature[1].mean);
  }
}

TEST(TvDistanceTest, HandCases) {
  EXPECT_DOUBLE_EQ(tv_distance(hist({3, 5}), hist({3, 5})), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(hist({4, 0}), hist({0, 9})), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance(hist({1, 1}), hist({2, 0})), 0.5);
  // scale invariance: only normalized counts matter
  EXPECT_DOUBLE_EQ(tv_distance(hist({1, 3}), hist({10, 30})), 0.0);
}

TEST(TvDistanceTest, Errors) {
  EXPECT_THROW(tv_distance(hist({1, 1}), hist({1, 1, 1})), HistogramMismatch);
  Histogram shifted{make_edges({0.0, 2.0}, 2), {1, 1}};
  EXPECT_THROW(tv_distance(hist({1, 1}), shifted), HistogramMismatch);
  EXPECT_THROW(tv_distance(hist({0, 0}), hist({1, 1})), std::invalid_argument);
}

TEST(TvDistanceTest, MetricPropertiesOnRandomHistograms) {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> bins_dist(1, 50);
  for (int trial = 0; trial < 1'000; ++trial) {
    const auto bins = static_cast<std::size_t>(bins_dist(gen));
    auto random_hist = [&] {
      std::vector<std::uint64_t> counts(bins);
      std::uint64_t total = 0;
      for (auto& c : counts) total += (c = gen() % 20);
      if (total == 0) counts[0] = 1;
      return hist(counts);
    };
    const auto p = random_hist(), q = random_hist(), r = random_hist();
    const double pq = tv_distance(p, q);
    ASSERT_EQ(pq, tv_distance(q, p));
    ASSERT_EQ(tv_distance(p, p), 0.0);
    ASSERT_GE(pq, 0.0);
    ASSERT_LE(pq, 1.0);
    ASSERT_LE(tv_distance(p, r), pq + tv_distance(q, r) + 1e-12);
    ASSERT_NEAR(pq, tv_oracle(p, q), 1e-12);
  }
}

TEST(TvDistanceTest, RefiningBinsNeverDecreasesDistance) {
  const auto s = pht::testing::uniform_stream(4'000, 1, 21);
  const std::span<const Sample> all(s.samples);
  for (std::size_t bins : {1, 2, 5, 10, 20}) {
    for (std::size_t k = 0; k + 1 < 8; ++k) {
      const Window a{0, k * 500, all.subspan(k * 500, 500)};
      const Window b{1, (k + 1) * 500, all.subspan((k + 1) * 500, 500)};
      const double coarse = tv_distance(summarize_window(a, s.schema, bins).per_feature[0].histogram,
                                        summarize_window(b, s.schema, bins).per_feature[0].histogram);
      const double fine = tv_distance(summarize_window(a, s.schema, 2 * bins).per_feature[0].histogram,
                                      summarize_window(b, s.schema, 2 * bins).per_feature[0].histogram);
      ASSERT_GE(fine + 1e-15, coarse) << bins << " bins, pair " << k;
    }
  }
}

TEST(MeanSeriesTest, StationaryStreamStaysWithinHoeffdingBound) {
  const std::size_t n = 5'000;
  const auto s = pht::testing::uniform_stream(10 * n, 1, 8);
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(n), s.schema);
  const auto series = mean_series(summaries, 0);
  ASSERT_EQ(series.size(), 10u);
  // two equal-size windows: harmonic mean of the sizes is n
  const double bound = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n)));
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) EXPECT_LT(std::fabs(series[i] - series[j]), bound);
  }
}

TEST(MeanSeriesTest, Sine1ClassMeansSwapAcrossReversal) {
  const auto s = generate_sine1(Sine1Config{});
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(5'000), s.schema);
  const auto c0 = mean_series(summaries, 1, 0);
  const auto c1 = mean_series(summaries, 1, 1);
  // oracle: direct class-conditional averages of x_b in the windows on each side of 20,000
  auto direct = [&](std::size_t begin, ClassId c) {
    double sum = 0, n = 0;
    for (std::size_t i = begin; i < begin + 5'000; ++i) {
      if (s.samples[i].label == c) {
        sum += s.samples[i].features[1];
        n += 1;
      }
    }
    return sum / n;
  };
  EXPECT_NEAR(c0[3], direct(15'000, 0), 1e-12);
  EXPECT_NEAR(c1[3], direct(15'000, 1), 1e-12);
  EXPECT_NEAR(c0[4], direct(20'000, 0), 1e-12);
  EXPECT_NEAR(c1[4], direct(20'000, 1), 1e-12);
  // class 1 sits below the sine before the reversal and above it after
  EXPECT_LT(c1[3], c0[3]);
  EXPECT_GT(c1[4], c0[4]);
}

TEST(MeanSeriesTest, SingleWindowAndEmptyClass) {
  const auto s = one_feature({0.1, 0.2, 0.3}, {0, 0, 0});
  const std::vector<WindowSummary> one{whole(s, 4)};
  EXPECT_EQ(mean_series(one, 0).size(), 1u);
  const auto filtered = mean_series(one, 0, 1);
  EXPECT_EQ(filtered.size(), 0u);
  EXPECT_EQ(filtered.empty_windows, (std::vector<std::size_t>{0}));
  EXPECT_THROW(mean_series(one, 3), std::out_of_range);
  EXPECT_THROW(mean_series(one, 0, 9), std::out_of_range);
}
