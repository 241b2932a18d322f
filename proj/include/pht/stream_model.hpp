#ifndef PHT_STREAM_MODEL_HPP_
#define PHT_STREAM_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pht {

using ClassId = int;

struct Sample {
  std::size_t index = 0;
  std::vector<double> features;
  ClassId label = 0;
};

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;

  double width() const { return max - min; }
  bool contains(double v) const { return v >= min && v <= max; }
};

struct StreamSchema {
  std::vector<std::string> feature_names;
  std::vector<FeatureRange> feature_ranges;
  // Dense ids 0..n-1; class_names[id] is the label text as it appeared in the source.
  std::vector<ClassId> class_ids;
  std::vector<std::string> class_names;

  std::size_t feature_count() const { return feature_names.size(); }
  std::size_t class_count() const { return class_ids.size(); }
  bool has_class(ClassId id) const;
  // Throws std::invalid_argument when a structural invariant is broken.
  void validate() const;
};

// A loaded stream. Immutable once constructed; readers may share it freely.
struct Stream {
  StreamSchema schema;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct WindowSpec {
  std::size_t size = 1;
  std::size_t stride = 1;
  std::size_t offset = 0;

  static WindowSpec disjoint(std::size_t size, std::size_t offset = 0) { return {size, size, offset}; }
  bool valid() const { return size >= 1 && stride >= 1; }
  bool is_disjoint() const { return stride == size; }
  std::size_t start_of(std::size_t window_index) const { return offset + window_index * stride; }
};

struct Window {
  std::size_t window_index = 0;
  std::size_t start = 0;
  std::span<const Sample> samples;

  std::size_t end() const { return start + samples.size(); }
};

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  // 1-based physical line in the file, 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvOptions {
  // Column name (requires header) or zero-based column index given as digits. Empty selects the
  // column named "label" when there is one, otherwise the last column.
  std::string label_column;
  bool header = true;
  // Optional explicit feature subset by name or index; empty means every non-label column.
  std::vector<std::string> features;
  // Stop after this many data rows (0 = all).
  std::size_t max_rows = 0;
};

Stream load_csv(const std::filesystem::path& path, const CsvOptions& options);
Stream parse_csv(std::string_view text, const CsvOptions& options);

// Writes the same dialect load_csv reads: header row, features then a trailing "label" column.
void write_csv(std::ostream& out, const Stream& stream);

// Number of full windows; equals floor((n - offset - size) / stride) + 1 when n >= offset + size.
std::size_t window_count(std::size_t n, const WindowSpec& spec);

std::vector<Window> slice_windows(std::span<const Sample> stream, const WindowSpec& spec);

// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace pht

#endif  // PHT_STREAM_MODEL_HPP_
