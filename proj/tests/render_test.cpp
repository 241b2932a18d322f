#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "pht/generators.hpp"
#include "pht/render.hpp"
#include "test_streams.hpp"

using namespace pht;

namespace {

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

double attr(const std::string& element, const std::string& name) {
  const std::regex re(" " + name + "=\"(-?[0-9.]+)\"");
  std::smatch m;
  if (!std::regex_search(element, m, re)) throw std::runtime_error("no attribute " + name + " in " + element);
  return std::stod(m[1]);
}

// Text of each <g class="band"> group, in document order.
std::vector<std::string> bands(const std::string& svg) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (const auto& line : lines_of(svg)) {
    if (depth == 0 && line.find("<g class=\"band\"") != std::string::npos) {
      depth = 1;
      current = line + '\n';
      continue;
    }
    if (depth > 0) {
      current += line + '\n';
      if (line.find("<g ") != std::string::npos) ++depth;
      if (line.find("</g>") != std::string::npos && --depth == 0) out.push_back(current);
    }
  }
  return out;
}

std::vector<std::pair<double, double>> polyline_points(const std::string& element) {
  const std::regex re("points=\"([^\"]*)\"");
  std::smatch m;
  std::vector<std::pair<double, double>> out;
  if (!std::regex_search(element, m, re)) return out;
  std::istringstream in(m[1].str());
  for (std::string pair; in >> pair;) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

// The mean polyline of one layer inside a band.
std::string mean_line(const std::string& band, const std::string& layer) {
  const auto group = band.find("<g class=\"means\" data-layer=\"" + layer + "\"");
  if (group == std::string::npos) return {};
  const auto start = band.find("<polyline", group);
  return band.substr(start, band.find('\n', start) - start);
}

std::vector<WindowSummary> circles_by_5000() {
  const auto s = generate_circles(CirclesConfig{});
  return summarize_stream(s.samples, WindowSpec::disjoint(5'000), s.schema);
}

RenderSpec per_class_spec() {
  RenderSpec spec;
  spec.classes = {0, 1};
  spec.feature_names = {"x", "y"};
  spec.class_names = {"negative", "positive"};
  return spec;
}

}  // namespace

TEST(SvgNumberTest, TwoDecimalsTrimmed) {
  EXPECT_EQ(svg_number(1.0), "1");
  EXPECT_EQ(svg_number(1.5), "1.5");
  EXPECT_EQ(svg_number(1.256), "1.26");
  EXPECT_EQ(svg_number(-0.001), "0");
  EXPECT_THROW(svg_number(std::nan("")), std::logic_error);
}

TEST(RenderPhtTest, Deterministic) {
  const auto summaries = circles_by_5000();
  const auto spec = per_class_spec();
  EXPECT_EQ(render_pht(summaries, spec), render_pht(summaries, spec));
}

TEST(RenderPhtTest, MatchesGoldenFile) {
  const auto s = generate_sine1(Sine1Config{});
  const auto summaries = summarize_stream(s.samples, WindowSpec{500, 500, 17'550}, s.schema, kDefaultBins);
  auto spec = per_class_spec();
  spec.feature_names = s.schema.feature_names;
  spec.title = "SINE1 around the first drift";
  spec.drift_markers = {20'050};
  const std::vector<WindowSummary> fig(summaries.begin(), summaries.begin() + 10);
  const auto svg = render_pht(fig, spec);

  const std::filesystem::path golden = std::filesystem::path(PHT_TEST_DATA_DIR) / "golden" / "sine1_aligned.svg";
  if (std::getenv("PHT_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << svg;
  }
  std::ifstream in(golden, std::ios::binary);
  ASSERT_TRUE(in) << "missing golden file " << golden;
  std::ostringstream expected;
  expected << in.rdbuf();
  EXPECT_EQ(svg, expected.str());
}

TEST(RenderPhtTest, CirclesStructureMatchesSummaries) {
  const auto summaries = circles_by_5000();
  ASSERT_EQ(summaries.size(), 20u);
  const auto svg = render_pht(summaries, per_class_spec());
  const auto b = bands(svg);
  ASSERT_EQ(b.size(), 2u);
  for (const auto& band : b) {
    EXPECT_EQ(count_of(band, "<g class=\"cell\""), 20u);
    EXPECT_EQ(count_of(band, "<polyline class=\"mean-line\""), 3u);
    for (const auto* layer : {"all", "0", "1"}) EXPECT_EQ(polyline_points(mean_line(band, layer)).size(), 20u);
  }
}

TEST(RenderPhtTest, Sine1FullStreamStructure) {
  const auto s = generate_sine1(Sine1Config{});
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(5'200), s.schema);
  ASSERT_EQ(summaries.size(), 19u);
  RenderSpec spec;
  spec.classes = {0, 1};
  const auto svg = render_pht(summaries, spec);
  EXPECT_EQ(count_of(svg, "<g class=\"band\""), 2u);
  EXPECT_EQ(count_of(svg, "<g class=\"cell\""), 38u);
  EXPECT_EQ(count_of(svg, "<circle class=\"mean-marker\""), 2u * 3u * 19u);
}

TEST(RenderPhtTest, AlignedMeansJumpWithoutIntermediatePoint) {
  const auto s = generate_sine1(Sine1Config{});
  const auto summaries = summarize_stream(s.samples, WindowSpec{500, 500, 17'550}, s.schema);
  const std::vector<WindowSummary> fig(summaries.begin(), summaries.begin() + 10);
  ASSERT_EQ(fig.back().start + fig.back().size, 22'550u);
  const auto b = bands(render_pht(fig, per_class_spec()));
  ASSERT_EQ(b.size(), 2u);
  // The class-conditional means of x_b swap at the drift: the jump between cells 4 and 5 dwarfs
  // every step inside either segment.
  for (const auto* layer : {"0", "1"}) {
    const auto pts = polyline_points(mean_line(b[1], layer));
    ASSERT_EQ(pts.size(), 10u);
    double largest_within = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (i != 5) largest_within = std::max(largest_within, std::abs(pts[i].second - pts[i - 1].second));
    }
    EXPECT_GT(std::abs(pts[5].second - pts[4].second), 3.0 * largest_within) << "layer " << layer;
  }
}

TEST(RenderPhtTest, TallestBarHasTheFixedExtent) {
  const auto summaries = circles_by_5000();
  RenderSpec spec;
  const auto svg = render_pht(summaries, spec);
  const double extent = std::stod(svg_number(pht_bar_extent(spec, summaries.size())));
  for (const auto& band : bands(svg)) {
    double longest = 0.0;
    for (const auto& line : lines_of(band)) {
      if (line.find("class=\"bar\"") == std::string::npos) continue;
      const double w = attr(line, "width");
      EXPECT_LE(w, extent + 1e-9);
      longest = std::max(longest, w);
    }
    EXPECT_DOUBLE_EQ(longest, extent);
  }
}

TEST(RenderPhtTest, AllNumbersFinite) {
  const auto svg = render_pht(circles_by_5000(), per_class_spec());
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

TEST(RenderPhtTest, SingleWindowWithoutMeans) {
  const auto s = pht::testing::uniform_stream(500, 1, 3);
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(500), s.schema);
  RenderSpec spec;
  spec.show_means = false;
  const auto svg = render_pht(summaries, spec);
  EXPECT_EQ(count_of(svg, "<g class=\"cell\""), 1u);
  EXPECT_EQ(count_of(svg, "<polyline"), 0u);
}

TEST(RenderPhtTest, EmptyClassWindowIsSkippedInItsPolyline) {
  auto s = pht::testing::uniform_stream(2'000, 1, 3);
  for (std::size_t i = 500; i < 1'000; ++i) s.samples[i].label = 0;
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(500), s.schema);
  RenderSpec spec;
  spec.classes = {1};
  const auto b = bands(render_pht(summaries, spec));
  EXPECT_EQ(polyline_points(mean_line(b[0], "all")).size(), 4u);
  EXPECT_EQ(polyline_points(mean_line(b[0], "1")).size(), 3u);
}

TEST(RenderPhtTest, DriftMarkersSnapToBoundaries) {
  const auto summaries = circles_by_5000();
  RenderSpec spec;
  spec.drift_markers = {25'000, 50'100, 200'000};
  const auto svg = render_pht(summaries, spec);
  EXPECT_EQ(count_of(svg, "class=\"drift-marker\""), 2u);
}

TEST(RenderPhtTest, Errors) {
  const auto summaries = circles_by_5000();
  RenderSpec spec;
  EXPECT_THROW(render_pht({}, spec), RenderError);
  spec.features = {5};
  EXPECT_THROW(render_pht(summaries, spec), RenderError);
  spec = RenderSpec{};
  spec.classes = {7};
  EXPECT_THROW(render_pht(summaries, spec), RenderError);
  spec = RenderSpec{};
  spec.bins = 10;
  EXPECT_THROW(render_pht(summaries, spec), RenderError);
  const auto s = generate_circles(CirclesConfig{});
  const auto many = summarize_stream(s.samples, WindowSpec::disjoint(2'000), s.schema);
  EXPECT_THROW(render_pht(many, RenderSpec{}), RenderError);
  const auto wide = pht::testing::uniform_stream(1'000, 13, 1);
  const auto wide_summaries = summarize_stream(wide.samples, WindowSpec::disjoint(500), wide.schema);
  EXPECT_THROW(render_pht(wide_summaries, RenderSpec{}), RenderError);
  RenderSpec raised;
  raised.feature_cap = 13;
  EXPECT_NO_THROW(render_pht(wide_summaries, raised));
}

TEST(RenderParallelTest, SevenAxes) {
  const auto s = pht::testing::steady_drift_stream(2'000, 1);
  Stream seven = s;
  seven.schema.feature_names.push_back("label_noise");
  seven.schema.feature_ranges.push_back({0.0, 1.0});
  for (auto& sm : seven.samples) sm.features.push_back(static_cast<double>(sm.label));
  const auto summaries = summarize_stream(seven.samples, WindowSpec::disjoint(2'000), seven.schema);
  RenderSpec spec;
  spec.classes = {0, 1};
  const auto svg = render_parallel_histograms(summaries.front(), spec);
  EXPECT_EQ(count_of(svg, "<g class=\"axis-group\""), 7u);
  EXPECT_EQ(count_of(svg, "<line class=\"axis\""), 7u);
  EXPECT_EQ(count_of(svg, "sample-line"), 0u);
}

TEST(RenderParallelTest, SingleBinIsOneFullBar) {
  const auto s = pht::testing::uniform_stream(300, 3, 5);
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(300), s.schema, 1);
  RenderSpec spec;
  const auto svg = render_parallel_histograms(summaries.front(), spec);
  const double extent = std::stod(svg_number(parallel_bar_extent(spec, 3)));
  std::size_t bars = 0;
  for (const auto& line : lines_of(svg)) {
    if (line.find("class=\"bar\"") == std::string::npos) continue;
    ++bars;
    EXPECT_DOUBLE_EQ(attr(line, "width"), extent);
  }
  EXPECT_EQ(bars, 3u);
}

TEST(RenderParallelTest, WindowsDifferOnlyInBarGeometry) {
  const auto s = generate_sine1(Sine1Config{});
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(5'000), s.schema);
  RenderSpec spec;
  auto layout = [&](const WindowSummary& w) {
    std::string out;
    for (const auto& line : lines_of(render_parallel_histograms(w, spec))) {
      if (line.find("class=\"bar\"") == std::string::npos) out += line + '\n';
    }
    return out;
  };
  EXPECT_EQ(layout(summaries[0]), layout(summaries[7]));
  EXPECT_NE(render_parallel_histograms(summaries[0], spec), render_parallel_histograms(summaries[7], spec));
}

TEST(RenderParallelTest, SamplesOnlyBehindTheFlag) {
  const auto s = pht::testing::uniform_stream(50, 2, 5);
  const auto summaries = summarize_stream(s.samples, WindowSpec::disjoint(50), s.schema);
  RenderSpec spec;
  EXPECT_EQ(count_of(render_parallel_histograms(summaries.front(), spec, s.samples), "sample-line"), 0u);
  spec.draw_samples = true;
  EXPECT_EQ(count_of(render_parallel_histograms(summaries.front(), spec, s.samples), "sample-line"), 50u);
}
