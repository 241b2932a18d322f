#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pht/stream_model.hpp"
#include "test_streams.hpp"

using namespace pht;

namespace {

CsvOptions label_col(const std::string& name) {
  CsvOptions o;
  o.label_column = name;
  return o;
}

std::vector<Sample> indexed(std::size_t n) {
  std::vector<Sample> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i].index = i;
  return out;
}

}  // namespace

TEST(CsvTest, ThreeRowReadBack) {
  const auto s = parse_csv("a,b,label\n1.5,-2,0\n0.5,4,1\n3,1,0\n", label_col("label"));
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.schema.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(s.schema.feature_ranges[0].min, 0.5);
  EXPECT_DOUBLE_EQ(s.schema.feature_ranges[0].max, 3.0);
  EXPECT_DOUBLE_EQ(s.schema.feature_ranges[1].min, -2.0);
  EXPECT_DOUBLE_EQ(s.schema.feature_ranges[1].max, 4.0);
  EXPECT_EQ(s.samples[1].features, (std::vector<double>{0.5, 4.0}));
  EXPECT_EQ(s.samples[1].label, 1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.samples[i].index, i);
}

TEST(CsvTest, WrongArityNamesTheLine) {
  std::string text = "a,b,label\n";
  for (int i = 0; i < 5; ++i) text += "0.1,0.2,0\n";
  text += "0.1,0\n";  // line 7
  try {
    parse_csv(text, label_col("label"));
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(CsvTest, NonNumericCellIsRejected) {
  EXPECT_THROW(parse_csv("a,label\nx,0\n", label_col("label")), CsvError);
  EXPECT_THROW(parse_csv("a,label\n1.0,0\nnan,1\n", label_col("label")), CsvError);
}

TEST(CsvTest, MissingValueIsRejected) {
  EXPECT_THROW(parse_csv("a,b,label\n1,,0\n", label_col("label")), CsvError);
}

TEST(CsvTest, UnknownLabelColumn) {
  EXPECT_THROW(parse_csv("a,b\n1,0\n", label_col("cls")), CsvError);
  EXPECT_THROW(parse_csv("a,b\n1,0\n", label_col("7")), CsvError);
}

TEST(CsvTest, EmptyFile) {
  EXPECT_THROW(parse_csv("", label_col("label")), CsvError);
  EXPECT_THROW(parse_csv("a,label\n\n", label_col("label")), CsvError);
}

TEST(CsvTest, LabelColumnByIndexAndWithoutHeader) {
  CsvOptions o;
  o.header = false;
  o.label_column = "0";
  const auto s = parse_csv("1,0.5,0.25\n0,0.75,1\n", o);
  EXPECT_EQ(s.schema.feature_count(), 2u);
  EXPECT_EQ(s.samples[0].label, 1);
  EXPECT_EQ(s.samples[0].features, (std::vector<double>{0.5, 0.25}));
}

TEST(CsvTest, DefaultLabelColumn) {
  // "label" wins when present, else the last column
  const auto named = parse_csv("label,x\n1,0.5\n0,0.25\n", CsvOptions{});
  EXPECT_EQ(named.schema.feature_names, (std::vector<std::string>{"x"}));
  const auto last = parse_csv("x,y,cls\n0.5,0.1,a\n0.25,0.2,b\n", CsvOptions{});
  EXPECT_EQ(last.schema.feature_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(last.schema.class_names, (std::vector<std::string>{"a", "b"}));
}

TEST(CsvTest, LabelsMappedToDenseIdsKeepingText) {
  const auto s = parse_csv("x,label\n1,10\n2,2\n3,10\n4,-1\n", label_col("label"));
  // numeric labels sort numerically: -1, 2, 10
  EXPECT_EQ(s.schema.class_names, (std::vector<std::string>{"-1", "2", "10"}));
  EXPECT_EQ(s.schema.class_ids, (std::vector<ClassId>{0, 1, 2}));
  EXPECT_EQ(s.samples[0].label, 2);
  EXPECT_EQ(s.samples[1].label, 1);
  EXPECT_EQ(s.samples[3].label, 0);
}

TEST(CsvTest, ByteOrderMarkAndCrlf) {
  const auto s = parse_csv("\xEF\xBB\xBFx,label\r\n0.5,0\r\n1.5,1\r\n", label_col("label"));
  EXPECT_EQ(s.schema.feature_names[0], "x");
  EXPECT_EQ(s.size(), 2u);
}

TEST(CsvTest, FeatureSubsetAndMaxRows) {
  CsvOptions o = label_col("label");
  o.features = {"c", "a"};
  o.max_rows = 2;
  const auto s = parse_csv("a,b,c,label\n1,2,3,0\n4,5,6,1\n7,8,9,0\n", o);
  EXPECT_EQ(s.schema.feature_names, (std::vector<std::string>{"c", "a"}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.samples[1].features, (std::vector<double>{6, 4}));
}

TEST(CsvTest, WriteThenReadRoundTrips) {
  const auto original = pht::testing::uniform_stream(50, 3, 11);
  std::ostringstream out;
  write_csv(out, original);
  const auto back = parse_csv(out.str(), label_col("label"));
  ASSERT_EQ(back.size(), original.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.samples[i].features, original.samples[i].features);
    EXPECT_EQ(back.samples[i].label, original.samples[i].label);
  }
}

TEST(CsvTest, LoadFromDisk) {
  const auto path = std::filesystem::temp_directory_path() / "pht_stream_model_test.csv";
  {
    std::ofstream f(path);
    f << "x,label\n0.1,0\n0.2,1\n";
  }
  EXPECT_EQ(load_csv(path, label_col("label")).size(), 2u);
  std::filesystem::remove(path);
  EXPECT_THROW(load_csv(path, label_col("label")), CsvError);
}

TEST(SliceWindowsTest, Sine1FigureCount) {
  EXPECT_EQ(window_count(100'000, WindowSpec::disjoint(5'200)), 19u);
}

TEST(SliceWindowsTest, OffsetGrid) {
  const auto stream = indexed(100'000);
  const auto windows = slice_windows(stream, WindowSpec::disjoint(500, 17'800));
  ASSERT_FALSE(windows.empty());
  EXPECT_EQ(windows.front().start, 17'800u);
  EXPECT_EQ(windows.front().end(), 18'300u);
  const auto before = std::count_if(windows.begin(), windows.end(), [](const Window& w) { return w.end() <= 22'300; });
  EXPECT_EQ(before, 9);
}

TEST(SliceWindowsTest, StreamShorterThanWindow) {
  const auto stream = indexed(10);
  EXPECT_TRUE(slice_windows(stream, WindowSpec::disjoint(20)).empty());
  EXPECT_TRUE(slice_windows({}, WindowSpec::disjoint(1)).empty());
}

TEST(SliceWindowsTest, WindowsAreContiguousAndIndexed) {
  const auto stream = indexed(1'000);
  const WindowSpec spec{100, 30, 7};
  const auto windows = slice_windows(stream, spec);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    EXPECT_EQ(windows[k].window_index, k);
    EXPECT_EQ(windows[k].start, 7 + 30 * k);
    ASSERT_EQ(windows[k].samples.size(), 100u);
    for (std::size_t j = 0; j < 100; ++j) EXPECT_EQ(windows[k].samples[j].index, windows[k].start + j);
  }
}

TEST(SliceWindowsTest, CountMatchesBruteForce) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1'000; ++trial) {
    const std::size_t n = gen() % 400;
    const WindowSpec spec{1 + gen() % 60, 1 + gen() % 60, gen() % 80};
    std::size_t brute = 0;
    for (std::size_t start = spec.offset; start + spec.size <= n; start += spec.stride) ++brute;
    const auto stream = indexed(n);
    ASSERT_EQ(slice_windows(stream, spec).size(), brute) << n << " " << spec.size << " " << spec.stride << " " << spec.offset;
    ASSERT_EQ(window_count(n, spec), brute);
  }
}

TEST(SliceWindowsTest, DisjointCoverageIsAPrefix) {
  const auto stream = indexed(1'037);
  const auto windows = slice_windows(stream, WindowSpec::disjoint(100));
  std::size_t next = 0;
  for (const auto& w : windows) {
    EXPECT_EQ(w.start, next);
    next = w.end();
  }
  EXPECT_EQ(next, windows.size() * 100);
}

TEST(SliceWindowsTest, InvalidSpecYieldsNothing) {
  const auto stream = indexed(100);
  EXPECT_TRUE(slice_windows(stream, WindowSpec{0, 1, 0}).empty());
  EXPECT_TRUE(slice_windows(stream, WindowSpec{10, 0, 0}).empty());
}

TEST(SchemaTest, ValidateRejectsInvertedRange) {
  auto schema = pht::testing::unit_schema(1);
  schema.feature_ranges[0] = {1.0, 0.0};
  EXPECT_THROW(schema.validate(), std::invalid_argument);
}
