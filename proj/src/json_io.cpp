#include "pht/json_io.hpp"

#include <stdexcept>

namespace pht {

namespace {

Json window_spec_json(const WindowSpec& w) {
  return Json{{"size", w.size}, {"stride", w.stride}, {"offset", w.offset}};
}

Json nullable_mean(const ClassFeatureSummary& c) { return c.count ? Json(c.mean) : Json(nullptr); }

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key);
}

Json config_json(const DetectorConfig& c) {
  return Json{{"delta", c.delta},
              {"n_min", c.n_min},
              {"max_window", c.max_window},
              {"monitor", to_string(c.monitor)},
              {"exhaustive_splits", c.exhaustive_splits},
              {"split_grid", c.exhaustive_splits ? "exhaustive" : "n_min*2^k from both window ends"},
              {"test", "hoeffding mean gap, R*sqrt(ln(2/delta')/(2m)), m = harmonic mean of segment sizes, "
                       "delta' = delta / tests"}};
}

Json alignment_json(const AlignmentResult& a) {
  return Json{{"window_size", a.window_size},
              {"offset", a.offset},
              {"boundary_index", a.boundary_index},
              {"sharpness", a.sharpness},
              {"grid_start", a.grid_start},
              {"grid_windows", a.grid_windows},
              {"windows_before", a.windows_before},
              {"feature", a.feature},
              {"class", a.class_filter ? Json(*a.class_filter) : Json(nullptr)}};
}

}  // namespace

std::string dump(const Json& j) { return j.dump(1) + "\n"; }

Json schema_to_json(const StreamSchema& schema) {
  Json ranges = Json::array();
  for (const auto& r : schema.feature_ranges) ranges.push_back(Json::array({r.min, r.max}));
  return Json{{"feature_names", schema.feature_names},
              {"feature_ranges", ranges},
              {"class_ids", schema.class_ids},
              {"class_names", schema.class_names}};
}

StreamSchema schema_from_json(const Json& j) {
  StreamSchema s;
  s.feature_names = required<std::vector<std::string>>(j, "feature_names");
  for (const auto& r : field(j, "feature_ranges")) {
    if (!r.is_array() || r.size() != 2) throw std::invalid_argument("feature_ranges entries must be [min, max]");
    s.feature_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
  }
  s.class_ids = required<std::vector<ClassId>>(j, "class_ids");
  if (j.contains("class_names")) s.class_names = j.at("class_names").get<std::vector<std::string>>();
  s.validate();
  return s;
}

Json summary_to_json(const WindowSummary& summary, std::span<const std::size_t> features,
                     std::span<const ClassId> classes) {
  Json per_feature = Json::array();
  for (auto f : features) {
    const auto& fs = summary.per_feature.at(f);
    Json per_class = Json::object();
    for (auto c : classes) {
      const auto& pc = fs.per_class.at(static_cast<std::size_t>(c));
      per_class[std::to_string(c)] = Json{{"counts", pc.histogram.counts}, {"mean", nullable_mean(pc)}, {"count", pc.count}};
    }
    Json entry{{"feature", f},
               {"edges", fs.histogram.edges},
               {"counts", fs.histogram.counts},
               {"mean", fs.mean},
               {"std", fs.std},
               {"per_class", per_class}};
    if (!fs.brushed_counts.empty()) entry["brushed_counts"] = fs.brushed_counts;
    per_feature.push_back(std::move(entry));
  }
  Json counts = Json::object();
  for (auto c : classes) counts[std::to_string(c)] = summary.count_per_class.at(static_cast<std::size_t>(c));
  return Json{{"window_index", summary.window_index},
              {"start", summary.start},
              {"size", summary.size},
              {"count_per_class", counts},
              {"per_feature", per_feature}};
}

Json summaries_document(const StreamSchema& schema, std::span<const WindowSummary> summaries,
                        const SummaryParams& params, const std::string& input_hash) {
  std::vector<std::size_t> features = params.features;
  if (features.empty()) {
    for (std::size_t f = 0; f < schema.feature_count(); ++f) features.push_back(f);
  }
  std::vector<ClassId> classes = params.classes;
  if (classes.empty()) classes = schema.class_ids;

  Json p{{"window", window_spec_json(params.window)}, {"bins", params.bins}, {"count", params.count}, {"features", features}, {"classes", classes}};
  if (params.brush) p["brush"] = Json{{"feature", params.brush->feature}, {"lo", params.brush->lo}, {"hi", params.brush->hi}};
  Json list = Json::array();
  for (const auto& s : summaries) list.push_back(summary_to_json(s, features, classes));
  return Json{{"format_version", kFormatVersion},
              {"kind", "summaries"},
              {"input_hash", input_hash},
              {"params", p},
              {"schema", schema_to_json(schema)},
              {"summaries", list}};
}

LoadedSummaries summaries_from_json(const Json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("summaries document must be a JSON object");
  if (doc.value("format_version", 0) != kFormatVersion) throw std::invalid_argument("unsupported format_version");
  LoadedSummaries out;
  const auto full = schema_from_json(field(doc, "schema"));
  const auto& list = field(doc, "summaries");
  if (!list.is_array() || list.empty()) throw std::invalid_argument("summaries list is empty");
  out.features = required<std::vector<std::size_t>>(field(doc, "params"), "features");
  for (auto f : out.features) {
    if (f >= full.feature_count()) throw std::invalid_argument("feature index out of range in params");
    out.schema.feature_names.push_back(full.feature_names[f]);
    out.schema.feature_ranges.push_back(full.feature_ranges[f]);
  }
  out.schema.class_ids = full.class_ids;
  out.schema.class_names = full.class_names;
  const std::size_t n_classes = full.class_count();

  for (const auto& js : list) {
    WindowSummary s;
    s.window_index = required<std::size_t>(js, "window_index");
    s.start = required<std::size_t>(js, "start");
    s.size = required<std::size_t>(js, "size");
    s.count_per_class.assign(n_classes, 0);
    for (const auto& [key, value] : field(js, "count_per_class").items()) {
      const auto c = static_cast<std::size_t>(std::stoul(key));
      if (c >= n_classes) throw std::invalid_argument("unknown class id " + key);
      s.count_per_class[c] = value.get<std::uint64_t>();
    }
    const auto& pf = field(js, "per_feature");
    if (pf.size() != out.features.size()) throw std::invalid_argument("per_feature length does not match params");
    for (const auto& jf : pf) {
      FeatureSummary fs;
      fs.histogram.edges = required<std::vector<double>>(jf, "edges");
      fs.histogram.counts = required<std::vector<std::uint64_t>>(jf, "counts");
      if (fs.histogram.edges.size() != fs.histogram.counts.size() + 1) {
        throw std::invalid_argument("edges must have one more entry than counts");
      }
      fs.mean = required<double>(jf, "mean");
      fs.std = required<double>(jf, "std");
      fs.per_class.resize(n_classes);
      for (auto& pc : fs.per_class) {
        pc.histogram.edges = fs.histogram.edges;
        pc.histogram.counts.assign(fs.histogram.counts.size(), 0);
      }
      for (const auto& [key, value] : field(jf, "per_class").items()) {
        const auto c = static_cast<std::size_t>(std::stoul(key));
        if (c >= n_classes) throw std::invalid_argument("unknown class id " + key);
        auto& pc = fs.per_class[c];
        pc.histogram.counts = required<std::vector<std::uint64_t>>(value, "counts");
        pc.count = value.value("count", pc.histogram.total());
        if (!value.at("mean").is_null()) pc.mean = value.at("mean").get<double>();
      }
      if (jf.contains("brushed_counts")) fs.brushed_counts = jf.at("brushed_counts").get<std::vector<std::uint64_t>>();
      s.per_feature.push_back(std::move(fs));
    }
    out.summaries.push_back(std::move(s));
  }
  return out;
}

Json drift_report_to_json(const DriftReport& report, const std::string& input_hash) {
  Json profile = Json::array();
  for (const auto& [index, length] : report.profile) profile.push_back(Json::array({index, length}));
  Json evidence = Json::array();
  for (const auto& e : report.events) {
    Json features = Json::array();
    for (const auto& fe : e.evidence) {
      features.push_back(Json{{"feature", fe.feature},
                              {"class", fe.class_id ? Json(*fe.class_id) : Json(nullptr)},
                              {"mean_gap", fe.mean_gap},
                              {"threshold", fe.threshold}});
    }
    evidence.push_back(Json{{"drift_point", e.drift_point}, {"detected_at", e.detected_at}, {"features", features}});
  }
  return Json{{"format_version", kFormatVersion},
              {"kind", "drift_report"},
              {"input_hash", input_hash},
              {"config", config_json(report.config)},
              {"drift_points", report.drift_points()},
              {"profile", profile},
              {"evidence", evidence}};
}

Json analysis_to_json(const FeatureRanking& ranking, const Localization& localization, const LocalizeOptions& options,
                      const std::string& input_hash) {
  Json reports = Json::array();
  for (const auto& r : ranking.reports) {
    reports.push_back(Json{{"feature", r.feature},
                           {"status", to_string(r.status)},
                           {"drift_score", r.drift_score},
                           {"class", r.class_filter ? Json(*r.class_filter) : Json(nullptr)}});
  }
  Json regions = Json::array();
  for (const auto& r : localization.regions) {
    regions.push_back(Json{{"start", r.start},
                           {"end", r.end},
                           {"kind", to_string(r.kind)},
                           {"alignment", alignment_json(r.alignment)},
                           {"sharpness_trials", r.sharpness_trials}});
  }
  Json alignments = Json::array();
  for (const auto& a : localization.alignments()) alignments.push_back(alignment_json(a));
  return Json{{"format_version", kFormatVersion},
              {"kind", "analysis"},
              {"input_hash", input_hash},
              {"options",
               {{"initial_window", options.initial_window},
                {"shrink_factor", options.shrink_factor},
                {"min_window", options.min_window},
                {"delta", options.delta},
                {"n_min", options.alignment.n_min},
                {"bins", options.alignment.bins},
                {"range_epsilon", options.filter.range_epsilon},
                {"drift_epsilon", options.filter.drift_epsilon},
                {"variability_epsilon", options.filter.variability_epsilon},
                {"abrupt_sharpness", options.abrupt_sharpness},
                {"halvings", options.halvings}}},
              {"metadata",
               {{"continuous_drift_rule",
                 "heuristic: a region is continuous when sharpness stays below abrupt_sharpness at the final window "
                 "and after each of `halvings` halvings"}}},
              {"feature_reports", reports},
              {"ranked_features", ranking.ranked},
              {"alignments", alignments},
              {"regions", regions},
              {"continuous_drift", localization.has_continuous_drift()}};
}

Json sine1_sidecar(const Sine1Config& c) {
  return Json{{"format_version", kFormatVersion},
              {"dataset", "sine1"},
              {"rng", CounterRng::kAlgorithm},
              {"config", {{"n_samples", c.n_samples}, {"drift_period", c.drift_period}, {"noise_rate", c.noise_rate}, {"seed", c.seed}}},
              {"segment_rule", "segment k covers [k*drift_period, (k+1)*drift_period); odd segments reverse the label"},
              {"noise", "independent label flip with probability noise_rate"},
              {"true_drift_points", true_drift_points(c)}};
}

Json circles_sidecar(const CirclesConfig& c) {
  Json schedule = Json::array();
  for (const auto& circle : c.circle_schedule) schedule.push_back(Json::array({circle.cx, circle.cy, circle.radius}));
  return Json{{"format_version", kFormatVersion},
              {"dataset", "circles"},
              {"rng", CounterRng::kAlgorithm},
              {"config", {{"n_samples", c.n_samples}, {"drift_period", c.drift_period}, {"circle_schedule", schedule}, {"seed", c.seed}}},
              {"segment_rule", "segment k covers [k*drift_period, (k+1)*drift_period) and uses circle k mod schedule length"},
              {"true_drift_points", true_drift_points(c)}};
}

}  // namespace pht
