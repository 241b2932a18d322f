#ifndef PHT_JSON_IO_HPP_
#define PHT_JSON_IO_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pht/analysis.hpp"
#include "pht/drift_detector.hpp"
#include "pht/generators.hpp"
#include "pht/histogram.hpp"

namespace pht {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

struct SummaryParams {
  WindowSpec window;
  std::size_t bins = kDefaultBins;
  std::size_t count = 0;  // max windows; 0 = all that fit
  std::vector<std::size_t> features;  // empty = all
  std::vector<ClassId> classes;       // empty = all
  std::optional<Brush> brush;
};

Json schema_to_json(const StreamSchema& schema);
StreamSchema schema_from_json(const Json& j);

Json summary_to_json(const WindowSummary& summary, std::span<const std::size_t> features,
                     std::span<const ClassId> classes);

// Full summaries document: format_version, input_hash, params, schema and one entry per window.
Json summaries_document(const StreamSchema& schema, std::span<const WindowSummary> summaries,
                        const SummaryParams& params, const std::string& input_hash);

struct LoadedSummaries {
  StreamSchema schema;
  std::vector<WindowSummary> summaries;
  std::vector<std::size_t> features;  // feature index of each per_feature entry
};

// Inverse of summaries_document. Throws std::invalid_argument on malformed input.
LoadedSummaries summaries_from_json(const Json& doc);

Json drift_report_to_json(const DriftReport& report, const std::string& input_hash);

Json analysis_to_json(const FeatureRanking& ranking, const Localization& localization, const LocalizeOptions& options,
                      const std::string& input_hash);

Json sine1_sidecar(const Sine1Config& config);
Json circles_sidecar(const CirclesConfig& config);

// Canonical text used for files and HTTP bodies.
std::string dump(const Json& j);

}  // namespace pht

#endif  // PHT_JSON_IO_HPP_
