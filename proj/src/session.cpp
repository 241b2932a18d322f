#include "pht/session.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pht/render.hpp"

namespace pht {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string content_hash(std::string_view bytes) { return hash_hex(fnv1a64(bytes)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetNotFound("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_dataset(const CsvSource& source) {
  if (!std::filesystem::is_regular_file(source.path)) throw DatasetNotFound("no such file: " + source.path.string());
  const std::string text = read_file(source.path);
  Dataset d;
  d.name = source.path.string();
  d.stream = parse_csv(text, source.options);
  // Options that change the parsed stream are part of the input identity.
  std::string identity = text;
  identity += '\0' + source.options.label_column + '\0' + std::to_string(source.options.header) + '\0' +
              std::to_string(source.options.max_rows);
  for (const auto& f : source.options.features) identity += '\0' + f;
  d.input_hash = content_hash(identity);
  d.source = Json{{"dataset", "csv"}, {"path", d.name}, {"label_column", source.options.label_column}};
  return d;
}

Dataset load_dataset(const GeneratorSource& source) {
  Dataset d;
  if (const auto* s = std::get_if<Sine1Config>(&source)) {
    d.name = "sine1";
    d.stream = generate_sine1(*s);
    d.source = sine1_sidecar(*s);
  } else {
    const auto& c = std::get<CirclesConfig>(source);
    d.name = "circles";
    d.stream = generate_circles(c);
    d.source = circles_sidecar(c);
  }
  d.input_hash = content_hash(d.source.dump());
  return d;
}

Dataset load_dataset(const Json& request) {
  if (!request.is_object() || !request.contains("dataset") || !request["dataset"].is_string()) {
    throw std::invalid_argument("request must be an object with a string 'dataset' field");
  }
  const auto name = request["dataset"].get<std::string>();
  if (name == "sine1") {
    Sine1Config c;
    c.n_samples = request.value("n_samples", c.n_samples);
    c.drift_period = request.value("drift_period", c.drift_period);
    c.noise_rate = request.value("noise_rate", c.noise_rate);
    c.seed = request.value("seed", c.seed);
    c.validate();
    return load_dataset(GeneratorSource{c});
  }
  if (name == "circles") {
    CirclesConfig c;
    c.n_samples = request.value("n_samples", c.n_samples);
    c.drift_period = request.value("drift_period", c.drift_period);
    c.seed = request.value("seed", c.seed);
    c.validate();
    return load_dataset(GeneratorSource{c});
  }
  if (name == "csv") {
    if (!request.contains("path") || !request["path"].is_string()) throw std::invalid_argument("csv dataset needs 'path'");
    CsvSource src;
    src.path = request["path"].get<std::string>();
    src.options.label_column = request.value("label_column", std::string{});
    return load_dataset(src);
  }
  throw DatasetNotFound("unknown dataset '" + name + "'");
}

std::vector<WindowSummary> compute_summaries(const Stream& stream, const SummaryParams& params) {
  if (!params.window.valid()) throw std::invalid_argument("window size and stride must be positive");
  if (params.bins == 0) throw std::invalid_argument("bins must be positive");
  if (params.brush && params.brush->feature >= stream.schema.feature_count()) {
    throw std::invalid_argument("brush feature out of range");
  }
  std::span<const Sample> samples(stream.samples);
  if (params.count > 0) {
    const std::size_t end = params.window.start_of(params.count - 1) + params.window.size;
    if (end < samples.size()) samples = samples.first(end);
  }
  return summarize_stream(samples, params.window, stream.schema, params.bins, params.brush);
}

std::vector<std::size_t> resolve_features(const StreamSchema& schema, const std::vector<std::string>& tokens) {
  std::vector<std::size_t> out;
  for (const auto& t : tokens) {
    const auto it = std::find(schema.feature_names.begin(), schema.feature_names.end(), t);
    if (it != schema.feature_names.end()) {
      out.push_back(static_cast<std::size_t>(it - schema.feature_names.begin()));
      continue;
    }
    std::size_t idx = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), idx);
    if (ec != std::errc{} || p != t.data() + t.size() || idx >= schema.feature_count()) {
      throw std::invalid_argument("unknown feature '" + t + "'");
    }
    out.push_back(idx);
  }
  return out;
}

std::vector<ClassId> resolve_classes(const StreamSchema& schema, const std::vector<std::string>& tokens) {
  std::vector<ClassId> out;
  for (const auto& t : tokens) {
    ClassId id = -1;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), id);
    if (ec != std::errc{} || p != t.data() + t.size() || !schema.has_class(id)) {
      throw std::invalid_argument("unknown class '" + t + "'");
    }
    out.push_back(id);
  }
  return out;
}

void SessionConfig::validate() const {
  if (csv.has_value() == generator.has_value()) {
    throw std::invalid_argument("exactly one dataset source (CSV or generator) must be set");
  }
  if (generator) std::visit([](const auto& g) { g.validate(); }, *generator);
  if (!summary.window.valid()) throw std::invalid_argument("window size and stride must be positive");
  if (summary.bins == 0) throw std::invalid_argument("bins must be positive");
  detector.validate();
}

Json SessionConfig::to_json() const {
  Json j;
  if (csv) j["source"] = Json{{"csv", csv->path.string()}, {"label_column", csv->options.label_column}};
  if (generator) {
    j["source"] = std::visit(
        [](const auto& g) {
          if constexpr (std::is_same_v<std::decay_t<decltype(g)>, Sine1Config>) {
            return sine1_sidecar(g);
          } else {
            return circles_sidecar(g);
          }
        },
        *generator);
  }
  j["window"] = {{"size", summary.window.size}, {"stride", summary.window.stride}, {"offset", summary.window.offset}};
  j["bins"] = summary.bins;
  j["count"] = summary.count;
  j["features"] = summary.features;
  j["classes"] = summary.classes;
  j["detector"] = {{"delta", detector.delta},
                   {"n_min", detector.n_min},
                   {"max_window", detector.max_window},
                   {"monitor", to_string(detector.monitor)}};
  j["localize"] = {{"initial_window", localize.initial_window},
                   {"shrink_factor", localize.shrink_factor},
                   {"min_window", localize.min_window},
                   {"delta", localize.delta}};
  return j;
}

AnalysisArtifact build_artifact(const Dataset& dataset, const SessionConfig& config) {
  config.validate();
  const auto& stream = dataset.stream;
  AnalysisArtifact a;
  a.input_hash = dataset.input_hash;
  a.artifact_hash = hash_hex(fnv1a64(config.to_json().dump(), fnv1a64(dataset.input_hash)));
  a.schema = schema_to_json(stream.schema);

  const auto summaries = compute_summaries(stream, config.summary);
  a.summaries = summaries_document(stream.schema, summaries, config.summary, dataset.input_hash);

  const auto report = detect_stream(stream, config.detector);
  a.drift = drift_report_to_json(report, dataset.input_hash);

  FeatureRanking ranking;
  if (summaries.size() >= 2) ranking = filter_features(stream.schema, summaries, config.localize.filter);
  const auto localization = localize(stream, config.localize);
  a.analysis = analysis_to_json(ranking, localization, config.localize, dataset.input_hash);

  if (!summaries.empty()) {
    RenderSpec spec;
    spec.bins = config.summary.bins;
    spec.features = config.summary.features;
    spec.classes = config.summary.classes;
    spec.feature_names = stream.schema.feature_names;
    spec.class_names = stream.schema.class_names;
    spec.drift_markers = report.drift_points();
    std::span<const WindowSummary> shown(summaries);
    if (shown.size() > kMaxWindowsPerFigure) shown = shown.first(kMaxWindowsPerFigure);
    if (spec.features.size() > spec.feature_cap) spec.features.resize(spec.feature_cap);
    if (spec.features.empty() && stream.schema.feature_count() > spec.feature_cap) {
      for (std::size_t f = 0; f < spec.feature_cap; ++f) spec.features.push_back(f);
    }
    a.figures["pht.svg"] = render_pht(shown, spec);
  }
  return a;
}

void AnalysisArtifact::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << body;
  };
  put("schema.json", dump(schema));
  put("summaries.json", dump(summaries));
  put("drift.json", dump(drift));
  put("analysis.json", dump(analysis));
  Json files = Json::array({"schema.json", "summaries.json", "drift.json", "analysis.json"});
  for (const auto& [name, svg] : figures) {
    put(name, svg);
    files.push_back(name);
  }
  put("manifest.json", dump(Json{{"format_version", kFormatVersion},
                                 {"input_hash", input_hash},
                                 {"artifact_hash", artifact_hash},
                                 {"files", files}}));
}

}  // namespace pht
