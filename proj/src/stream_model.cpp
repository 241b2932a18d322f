#include "pht/stream_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace pht {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(pos)));
      break;
    }
    cells.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return cells;
}

std::optional<double> parse_real(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::size_t resolve_column(const std::string& ref, const std::vector<std::string>& names,
                           std::size_t arity, const char* role) {
  if (auto it = std::find(names.begin(), names.end(), ref); it != names.end()) {
    return static_cast<std::size_t>(it - names.begin());
  }
  if (auto idx = parse_index(ref); idx && *idx < arity) return *idx;
  throw CsvError(std::string("unknown ") + role + " column '" + ref + "'");
}

// Integers sort numerically, anything else lexicographically.
std::vector<std::string> order_labels(std::vector<std::string> labels) {
  const bool numeric = std::all_of(labels.begin(), labels.end(),
                                   [](const std::string& s) { return parse_real(s).has_value(); });
  if (numeric) {
    std::sort(labels.begin(), labels.end(),
              [](const std::string& a, const std::string& b) { return *parse_real(a) < *parse_real(b); });
  } else {
    std::sort(labels.begin(), labels.end());
  }
  return labels;
}

}  // namespace

bool StreamSchema::has_class(ClassId id) const {
  return std::find(class_ids.begin(), class_ids.end(), id) != class_ids.end();
}

void StreamSchema::validate() const {
  if (feature_names.size() != feature_ranges.size()) {
    throw std::invalid_argument("schema: feature_names and feature_ranges differ in length");
  }
  for (std::size_t i = 0; i < feature_ranges.size(); ++i) {
    if (!(feature_ranges[i].min <= feature_ranges[i].max)) {
      throw std::invalid_argument("schema: feature '" + feature_names[i] + "' has min > max");
    }
  }
  if (!class_names.empty() && class_names.size() != class_ids.size()) {
    throw std::invalid_argument("schema: class_names and class_ids differ in length");
  }
}

Stream parse_csv(std::string_view text, const CsvOptions& options) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::pair<std::size_t, std::string_view>> lines;  // (1-based line number, content)
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (!trim(raw).empty()) lines.emplace_back(line_no, raw);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (lines.empty()) throw CsvError("empty file");

  std::vector<std::string> column_names;
  std::size_t first_data = 0;
  const std::size_t arity = split_row(lines.front().second).size();
  if (options.header) {
    for (auto cell : split_row(lines.front().second)) column_names.emplace_back(cell);
    first_data = 1;
  } else {
    for (std::size_t c = 0; c < arity; ++c) column_names.push_back("f" + std::to_string(c));
  }
  if (first_data >= lines.size()) throw CsvError("empty file: no data rows");
  std::size_t label_col = arity - 1;
  if (!options.label_column.empty()) {
    label_col = resolve_column(options.label_column, column_names, arity, "label");
  } else if (auto it = std::find(column_names.begin(), column_names.end(), "label"); it != column_names.end()) {
    label_col = static_cast<std::size_t>(it - column_names.begin());
  }
  std::vector<std::size_t> feature_cols;
  if (options.features.empty()) {
    for (std::size_t c = 0; c < arity; ++c) {
      if (c != label_col) feature_cols.push_back(c);
    }
  } else {
    for (const auto& f : options.features) {
      const auto c = resolve_column(f, column_names, arity, "feature");
      if (c == label_col) throw CsvError("feature column '" + f + "' is the label column");
      feature_cols.push_back(c);
    }
  }

  Stream stream;
  std::vector<std::string> raw_labels;
  std::map<std::string, int, std::less<>> seen;
  for (std::size_t r = first_data; r < lines.size(); ++r) {
    if (options.max_rows && stream.samples.size() >= options.max_rows) break;
    const auto [ln, content] = lines[r];
    const auto cells = split_row(content);
    if (cells.size() != arity) {
      throw CsvError("expected " + std::to_string(arity) + " columns, found " + std::to_string(cells.size()), ln);
    }
    Sample s;
    s.index = stream.samples.size();
    s.features.reserve(feature_cols.size());
    for (auto c : feature_cols) {
      if (cells[c].empty()) throw CsvError("missing value in column '" + column_names[c] + "'", ln);
      auto v = parse_real(cells[c]);
      if (!v) {
        throw CsvError("non-numeric value '" + std::string(cells[c]) + "' in column '" + column_names[c] + "'", ln);
      }
      s.features.push_back(*v);
    }
    if (cells[label_col].empty()) throw CsvError("missing label", ln);
    const std::string label(cells[label_col]);
    // first-appearance id for now, remapped once every label text is known
    auto [it, inserted] = seen.emplace(label, static_cast<int>(raw_labels.size()));
    if (inserted) raw_labels.push_back(label);
    s.label = it->second;
    stream.samples.push_back(std::move(s));
  }

  const auto ordered = order_labels(raw_labels);
  std::vector<ClassId> remap(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    remap[i] = static_cast<ClassId>(std::find(ordered.begin(), ordered.end(), raw_labels[i]) - ordered.begin());
  }
  for (auto& s : stream.samples) s.label = remap[static_cast<std::size_t>(s.label)];

  auto& schema = stream.schema;
  for (auto c : feature_cols) schema.feature_names.push_back(column_names[c]);
  schema.feature_ranges.assign(feature_cols.size(), FeatureRange{0.0, 0.0});
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    double lo = stream.samples.front().features[f];
    double hi = lo;
    for (const auto& s : stream.samples) {
      lo = std::min(lo, s.features[f]);
      hi = std::max(hi, s.features[f]);
    }
    schema.feature_ranges[f] = {lo, hi};
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) schema.class_ids.push_back(static_cast<ClassId>(i));
  schema.class_names = ordered;
  schema.validate();
  return stream;
}

Stream load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Stream& stream) {
  const auto& schema = stream.schema;
  for (const auto& name : schema.feature_names) out << name << ',';
  out << "label\n";
  std::string line;
  for (const auto& s : stream.samples) {
    line.clear();
    for (double v : s.features) {
      line += format_double(v);
      line += ',';
    }
    const auto id = static_cast<std::size_t>(s.label);
    line += id < schema.class_names.size() ? schema.class_names[id] : std::to_string(s.label);
    line += '\n';
    out << line;
  }
}

std::size_t window_count(std::size_t n, const WindowSpec& spec) {
  if (!spec.valid() || n < spec.offset + spec.size) return 0;
  return (n - spec.offset - spec.size) / spec.stride + 1;
}

std::vector<Window> slice_windows(std::span<const Sample> stream, const WindowSpec& spec) {
  const std::size_t count = window_count(stream.size(), spec);
  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = spec.start_of(k);
    windows.push_back(Window{k, start, stream.subspan(start, spec.size)});
  }
  return windows;
}

}  // namespace pht
