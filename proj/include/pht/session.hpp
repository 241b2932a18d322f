#ifndef PHT_SESSION_HPP_
#define PHT_SESSION_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pht/analysis.hpp"
#include "pht/drift_detector.hpp"
#include "pht/generators.hpp"
#include "pht/json_io.hpp"
#include "pht/stream_model.hpp"

namespace pht {

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);
std::string content_hash(std::string_view bytes);

struct CsvSource {
  std::filesystem::path path;
  CsvOptions options;
};

using GeneratorSource = std::variant<Sine1Config, CirclesConfig>;

class DatasetNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::string name;  // "sine1", "circles" or the CSV path
  Stream stream;
  std::string input_hash;
  Json source;  // description of where the stream came from
};

Dataset load_dataset(const CsvSource& source);
Dataset load_dataset(const GeneratorSource& source);

// Resolves a dataset description such as {"dataset": "sine1", "seed": 3} or {"dataset": "csv", "path": ...}.
// Unknown dataset names and missing files raise DatasetNotFound; malformed fields raise std::invalid_argument.
Dataset load_dataset(const Json& request);

// Summaries honoring params.count (0 = every window that fits).
std::vector<WindowSummary> compute_summaries(const Stream& stream, const SummaryParams& params);

// Resolves feature tokens (index or name) against the schema.
std::vector<std::size_t> resolve_features(const StreamSchema& schema, const std::vector<std::string>& tokens);
std::vector<ClassId> resolve_classes(const StreamSchema& schema, const std::vector<std::string>& tokens);

struct SessionConfig {
  std::optional<CsvSource> csv;
  std::optional<GeneratorSource> generator;
  SummaryParams summary;
  DetectorConfig detector;
  LocalizeOptions localize;

  // Throws std::invalid_argument unless exactly one dataset source is set and every part is valid.
  void validate() const;
  Json to_json() const;
};

struct AnalysisArtifact {
  Json schema;
  Json summaries;
  Json drift;
  Json analysis;
  std::map<std::string, std::string> figures;  // file name -> SVG
  std::string input_hash;
  std::string artifact_hash;

  // Writes every part plus manifest.json into dir, creating it if needed.
  void write(const std::filesystem::path& dir) const;
};

AnalysisArtifact build_artifact(const Dataset& dataset, const SessionConfig& config);

std::string read_file(const std::filesystem::path& path);

}  // namespace pht

#endif  // PHT_SESSION_HPP_
