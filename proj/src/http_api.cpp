#include "pht/http_api.hpp"

#include <charconv>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>

#include "httplib.h"
#include "pht/render.hpp"

namespace pht {

namespace {

// Collects every problem with a request so a 400 can name all offending fields at once.
struct FieldErrors {
  Json list = Json::array();
  void add(const std::string& field, const std::string& message) {
    list.push_back(Json{{"field", field}, {"message", message}});
  }
  bool empty() const { return list.empty(); }
};

class Params {
 public:
  Params(const QueryParams& raw, std::set<std::string> allowed, FieldErrors& errors) : raw_(raw), errors_(errors) {
    for (const auto& [k, v] : raw_) {
      if (!allowed.count(k)) errors_.add(k, "unknown parameter");
      else if (raw_.count(k) > 1 && seen_.insert(k).second) errors_.add(k, "given more than once");
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value) {
    auto t = text(key);
    if (!t) return fallback;
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
    if (ec != std::errc{} || p != t->data() + t->size() || t->empty()) {
      errors_.add(key, "expected a non-negative integer");
      return fallback;
    }
    if (v < min_value) {
      errors_.add(key, "must be at least " + std::to_string(min_value));
      return fallback;
    }
    return v;
  }

  double real(const std::string& key, double fallback) {
    auto t = text(key);
    if (!t) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(*t, &used);
      if (used != t->size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      errors_.add(key, "expected a number");
      return fallback;
    }
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    auto t = text(key);
    if (!t || t->empty()) return out;
    std::stringstream ss(*t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  }

 private:
  const QueryParams& raw_;
  FieldErrors& errors_;
  std::set<std::string> seen_;
};

const std::set<std::string> kSummaryKeys = {"size", "stride", "offset", "bins", "features", "classes", "count", "brush"};

SummaryParams parse_summary_params(const StreamSchema& schema, Params& p, FieldErrors& errors) {
  SummaryParams s;
  if (!p.text("size")) errors.add("size", "required");
  s.window.size = p.count("size", 1, 1);
  s.window.stride = p.count("stride", s.window.size, 1);
  s.window.offset = p.count("offset", 0, 0);
  s.bins = p.count("bins", kDefaultBins, 1);
  s.count = p.count("count", 0, 0);
  try {
    s.features = resolve_features(schema, p.list("features"));
  } catch (const std::invalid_argument& e) {
    errors.add("features", e.what());
  }
  try {
    s.classes = resolve_classes(schema, p.list("classes"));
  } catch (const std::invalid_argument& e) {
    errors.add("classes", e.what());
  }
  if (auto b = p.list("brush"); !b.empty()) {
    // brush=feature,lo,hi
    try {
      if (b.size() != 3) throw std::invalid_argument("expected feature,lo,hi");
      Brush brush;
      brush.feature = resolve_features(schema, {b[0]}).front();
      std::size_t used = 0;
      brush.lo = std::stod(b[1], &used);
      if (used != b[1].size()) throw std::invalid_argument("bad lo");
      brush.hi = std::stod(b[2], &used);
      if (used != b[2].size()) throw std::invalid_argument("bad hi");
      if (!(brush.lo <= brush.hi)) throw std::invalid_argument("lo must not exceed hi");
      s.brush = brush;
    } catch (const std::exception& e) {
      errors.add("brush", std::string("expected feature,lo,hi: ") + e.what());
    }
  }
  return s;
}

ApiResponse json_response(int status, Json body, const std::string& hash) {
  body["input_hash"] = hash;
  return ApiResponse{status, "application/json", dump(body), hash};
}

ApiResponse error_response(int status, const std::string& message, const std::string& hash, Json fields = nullptr) {
  Json body{{"error", message}};
  if (!fields.is_null()) body["fields"] = std::move(fields);
  return json_response(status, std::move(body), hash);
}

ApiResponse bad_request(const FieldErrors& errors, const std::string& hash) {
  return error_response(400, "invalid parameters", hash, errors.list);
}

}  // namespace

ApiService::ApiService(Dataset dataset) : dataset_(std::make_shared<const Dataset>(std::move(dataset))) {}

std::string ApiService::input_hash() const {
  std::shared_lock lock(mutex_);
  return dataset_->input_hash;
}

std::size_t ApiService::cache_entries() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

ApiResponse ApiService::handle(const std::string& method, const std::string& path, const QueryParams& params,
                               const std::string& body) {
  if (method == "POST" && path == "/session/dataset") return switch_dataset(body);

  std::shared_ptr<const Dataset> dataset;
  {
    std::shared_lock lock(mutex_);
    dataset = dataset_;
  }
  if (method != "GET") return error_response(405, "method not allowed", dataset->input_hash);

  // Canonical key: dataset identity, path and the sorted raw query. Parsing happens in dispatch.
  Json key_json{{"hash", dataset->input_hash}, {"path", path}, {"query", Json::array()}};
  for (const auto& [k, v] : params) key_json["query"].push_back({k, v});
  const std::string key = hash_hex(fnv1a64(key_json.dump()));
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  ApiResponse response;
  try {
    response = dispatch_get(*dataset, path, params);
  } catch (const std::exception& e) {
    response = error_response(500, e.what(), dataset->input_hash);
  }
  if (response.status == 200) {
    std::unique_lock lock(mutex_);
    cache_.emplace(key, response);
  }
  return response;
}

ApiResponse ApiService::switch_dataset(const std::string& body) {
  const std::string current = input_hash();
  Json request;
  try {
    request = Json::parse(body);
  } catch (const std::exception&) {
    FieldErrors errors;
    errors.add("body", "expected a JSON object");
    return bad_request(errors, current);
  }
  Dataset next;
  try {
    next = load_dataset(request);
  } catch (const DatasetNotFound& e) {
    return error_response(404, e.what(), current);
  } catch (const std::exception& e) {
    FieldErrors errors;
    errors.add("dataset", e.what());
    return bad_request(errors, current);
  }
  auto fresh = std::make_shared<const Dataset>(std::move(next));
  std::unique_lock lock(mutex_);
  dataset_ = fresh;
  cache_.clear();
  Json out{{"format_version", kFormatVersion}, {"dataset", fresh->name}, {"n_samples", fresh->stream.size()}};
  out["input_hash"] = fresh->input_hash;
  return ApiResponse{200, "application/json", dump(out), fresh->input_hash};
}

ApiResponse ApiService::dispatch_get(const Dataset& dataset, const std::string& path, const QueryParams& raw) {
  const auto& stream = dataset.stream;
  const auto& hash = dataset.input_hash;
  FieldErrors errors;

  if (path == "/schema") {
    Params p(raw, {}, errors);
    if (!errors.empty()) return bad_request(errors, hash);
    return json_response(200,
                         Json{{"format_version", kFormatVersion},
                              {"dataset", dataset.name},
                              {"n_samples", stream.size()},
                              {"source", dataset.source},
                              {"schema", schema_to_json(stream.schema)}},
                         hash);
  }

  if (path == "/summaries") {
    Params p(raw, kSummaryKeys, errors);
    const auto params = parse_summary_params(stream.schema, p, errors);
    if (!errors.empty()) return bad_request(errors, hash);
    const auto summaries = compute_summaries(stream, params);
    return ApiResponse{200, "application/json", dump(summaries_document(stream.schema, summaries, params, hash)), hash};
  }

  if (path == "/drift") {
    Params p(raw, {"delta", "monitor", "n_min", "max_window"}, errors);
    DetectorConfig config;
    config.delta = p.real("delta", config.delta);
    if (!(config.delta > 0.0 && config.delta < 1.0)) errors.add("delta", "must lie in (0, 1)");
    config.n_min = p.count("n_min", config.n_min, 1);
    config.max_window = p.count("max_window", config.max_window, 2);
    if (auto m = p.text("monitor")) {
      try {
        config.monitor = parse_monitor_mode(*m);
      } catch (const std::exception&) {
        errors.add("monitor", "expected marginal or per_class");
      }
    }
    if (errors.empty()) {
      try {
        config.validate();
      } catch (const std::exception& e) {
        errors.add("max_window", e.what());
      }
    }
    if (!errors.empty()) return bad_request(errors, hash);
    return ApiResponse{200, "application/json", dump(drift_report_to_json(detect_stream(stream, config), hash)), hash};
  }

  if (path == "/analysis") {
    Params p(raw, {"initial_window", "min_window", "delta", "size"}, errors);
    LocalizeOptions options;
    options.initial_window = p.count("initial_window", options.initial_window, 2);
    options.min_window = p.count("min_window", options.min_window, 1);
    options.delta = p.real("delta", options.delta);
    if (!(options.delta > 0.0 && options.delta < 1.0)) errors.add("delta", "must lie in (0, 1)");
    const std::size_t size = p.count("size", options.initial_window, 1);
    if (!errors.empty()) return bad_request(errors, hash);
    const auto summaries = summarize_stream(stream.samples, WindowSpec::disjoint(size), stream.schema);
    if (summaries.size() < 2) {
      errors.add("size", "fewer than two windows fit the stream");
      return bad_request(errors, hash);
    }
    const auto ranking = filter_features(stream.schema, summaries, options.filter);
    const auto loc = localize(stream, options);
    return ApiResponse{200, "application/json", dump(analysis_to_json(ranking, loc, options, hash)), hash};
  }

  if (path == "/figure.svg") {
    auto keys = kSummaryKeys;
    keys.insert({"view", "window", "markers", "width", "height"});
    Params p(raw, keys, errors);
    const auto params = parse_summary_params(stream.schema, p, errors);
    const std::string view = p.text("view").value_or("pht");
    if (view != "pht" && view != "parallel") errors.add("view", "expected pht or parallel");
    const std::size_t window = p.count("window", 0, 0);
    RenderSpec spec;
    spec.width = p.real("width", spec.width);
    spec.height = p.real("height", spec.height);
    if (!(spec.width >= 200 && spec.width <= 10000)) errors.add("width", "must lie in [200, 10000]");
    if (!(spec.height >= 100 && spec.height <= 10000)) errors.add("height", "must lie in [100, 10000]");
    for (const auto& m : p.list("markers")) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), v);
      if (ec != std::errc{} || ptr != m.data() + m.size()) errors.add("markers", "expected sample indices");
      else spec.drift_markers.push_back(v);
    }
    if (!errors.empty()) return bad_request(errors, hash);
    const auto summaries = compute_summaries(stream, params);
    if (summaries.empty()) {
      errors.add("size", "no window fits the stream");
      return bad_request(errors, hash);
    }
    spec.bins = params.bins;
    spec.features = params.features;
    spec.classes = params.classes;
    spec.feature_names = stream.schema.feature_names;
    spec.class_names = stream.schema.class_names;
    try {
      std::string svg;
      if (view == "pht") {
        svg = render_pht(summaries, spec);
      } else {
        if (window >= summaries.size()) {
          errors.add("window", "no such window");
          return bad_request(errors, hash);
        }
        svg = render_parallel_histograms(summaries[window], spec);
      }
      return ApiResponse{200, "image/svg+xml", std::move(svg), hash};
    } catch (const RenderError& e) {
      errors.add(summaries.size() > kMaxWindowsPerFigure ? "count" : "features", e.what());
      return bad_request(errors, hash);
    }
  }

  return error_response(404, "no such endpoint: " + path, hash);
}

HttpServer::HttpServer(ApiService& service) : server_(std::make_unique<httplib::Server>()) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    auto out = service.handle(req.method, req.path, params, req.body);
    res.status = out.status;
    res.set_header("X-Input-Hash", out.input_hash);
    res.set_content(out.body, out.content_type);
  };
  server_->Get(R"(/.*)", handler);
  server_->Post(R"(/.*)", handler);
  server_->Put(R"(/.*)", handler);
  server_->Delete(R"(/.*)", handler);
  server_->Patch(R"(/.*)", handler);
  // httplib's default adds SO_REUSEPORT, which would let a second server share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }

int HttpServer::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace pht
