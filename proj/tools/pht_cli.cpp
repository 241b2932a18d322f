#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pht/http_api.hpp"
#include "pht/render.hpp"
#include "pht/session.hpp"

using namespace pht;

namespace {

struct InputFlags {
  std::string csv;
  std::string dataset;
  std::string label_column;
  std::uint64_t seed = 1;
  std::size_t n_samples = 0;

  void attach(CLI::App* cmd) {
    auto* in = cmd->add_option("--in", csv, "input CSV file");
    auto* ds = cmd->add_option("--dataset", dataset, "built-in generator instead of a CSV")
                   ->check(CLI::IsMember({"sine1", "circles"}));
    in->excludes(ds);
    cmd->add_option("--label-column", label_column, "label column name (default: 'label', else the last column)");
    cmd->add_option("--seed", seed, "generator seed")->needs(ds);
    cmd->add_option("--n-samples", n_samples, "generator stream length")->needs(ds);
  }

  Dataset load() const {
    if (!csv.empty()) {
      CsvSource src;
      src.path = csv;
      src.options.label_column = label_column;
      return load_dataset(src);
    }
    if (dataset.empty()) throw CLI::ValidationError("--in", "an input is required: --in FILE or --dataset NAME");
    Json request{{"dataset", dataset}, {"seed", seed}};
    if (n_samples) request["n_samples"] = n_samples;
    return load_dataset(request);
  }
};

struct SummaryFlags {
  std::size_t size = 0;
  std::size_t stride = 0;
  std::size_t offset = 0;
  std::size_t bins = kDefaultBins;
  std::size_t count = 0;
  std::vector<std::string> features;
  std::vector<std::string> classes;
  std::vector<std::string> brush;

  void attach(CLI::App* cmd, bool required) {
    auto* s = cmd->add_option("--window-size", size, "samples per window")->check(CLI::PositiveNumber);
    if (required) s->required();
    cmd->add_option("--stride", stride, "samples between window starts (default: window size)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--offset", offset, "first window start");
    cmd->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);
    cmd->add_option("--count", count, "maximum number of windows (0 = all)");
    cmd->add_option("--features", features, "feature names or indices")->delimiter(',');
    cmd->add_option("--classes", classes, "class ids")->delimiter(',');
    cmd->add_option("--brush", brush, "feature,lo,hi")->delimiter(',')->expected(3);
  }

  SummaryParams params(const StreamSchema& schema) const {
    SummaryParams p;
    p.window = WindowSpec{size, stride ? stride : size, offset};
    p.bins = bins;
    p.count = count;
    p.features = resolve_features(schema, features);
    p.classes = resolve_classes(schema, classes);
    if (!brush.empty()) {
      Brush b;
      b.feature = resolve_features(schema, {brush[0]}).front();
      b.lo = std::stod(brush[1]);
      b.hi = std::stod(brush[2]);
      p.brush = b;
    }
    return p;
  }
};

void emit(const std::string& out, const std::string& body) {
  if (out.empty() || out == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << body;
}

std::string sidecar_path(const std::string& out) { return out + ".meta.json"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel histograms through time: windowed summaries, drift detection and figures"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic drifting stream as CSV");
  std::string gen_dataset, gen_out;
  Sine1Config sine;
  CirclesConfig circles;
  std::size_t gen_n = 0, gen_period = 0;
  std::uint64_t gen_seed = 1;
  double gen_noise = sine.noise_rate;
  gen->add_option("--dataset", gen_dataset, "generator")->required()->check(CLI::IsMember({"sine1", "circles"}));
  gen->add_option("--out", gen_out, "output CSV")->required();
  gen->add_option("--n-samples", gen_n, "stream length");
  gen->add_option("--drift-period", gen_period, "samples between drifts");
  gen->add_option("--noise", gen_noise, "label noise rate (sine1)");
  gen->add_option("--seed", gen_seed, "seed");

  // summarize
  auto* sum = app.add_subcommand("summarize", "per-window histograms and means as JSON");
  InputFlags sum_in;
  SummaryFlags sum_flags;
  std::string sum_out;
  sum_in.attach(sum);
  sum_flags.attach(sum, true);
  sum->add_option("--out", sum_out, "output JSON (default stdout)");

  // detect
  auto* det = app.add_subcommand("detect", "adaptive-window drift detection");
  InputFlags det_in;
  DetectorConfig det_cfg;
  bool per_class = false;
  std::string det_out;
  det_in.attach(det);
  det->add_flag("--per-class", per_class, "monitor class-conditional means");
  det->add_option("--delta", det_cfg.delta, "confidence parameter");
  det->add_option("--n-min", det_cfg.n_min, "minimum segment length");
  det->add_option("--max-window", det_cfg.max_window, "window length cap");
  det->add_option("--out", det_out, "output JSON (default stdout)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "feature ranking, drift localization and a full artifact");
  InputFlags ana_in;
  LocalizeOptions loc;
  std::size_t ana_window = 0;
  bool ana_per_class = true;
  std::string ana_out, ana_dir;
  ana_in.attach(ana);
  ana->add_option("--initial-window", loc.initial_window, "starting window size");
  ana->add_option("--min-window", loc.min_window, "smallest window tried");
  ana->add_option("--delta", loc.delta, "significance of window-to-window mean jumps");
  ana->add_option("--window-size", ana_window, "window used for feature ranking (default: initial window)");
  ana->add_flag("--per-class,!--marginal", ana_per_class, "detector mode used for the artifact's drift report");
  ana->add_option("--out", ana_out, "analysis JSON (default stdout)");
  ana->add_option("--out-dir", ana_dir, "write the full artifact (schema, summaries, drift, analysis, figure)");

  // render
  auto* ren = app.add_subcommand("render", "draw a PHT or parallel-histogram SVG");
  std::string ren_summaries, ren_out, ren_view = "pht";
  InputFlags ren_in;
  SummaryFlags ren_flags;
  RenderSpec ren_spec;
  std::vector<std::size_t> ren_markers;
  std::size_t ren_window = 0;
  bool ren_samples = false;
  ren->add_option("--summaries", ren_summaries, "summaries JSON written by summarize");
  ren_in.attach(ren);
  ren_flags.attach(ren, false);
  ren->add_option("--view", ren_view, "pht or parallel")->check(CLI::IsMember({"pht", "parallel"}));
  ren->add_option("--window", ren_window, "window drawn in the parallel view");
  ren->add_flag("--draw-samples", ren_samples, "parallel view: draw each sample as a polyline");
  ren->add_option("--markers", ren_markers, "drift markers (sample indices)")->delimiter(',');
  ren->add_option("--width", ren_spec.width, "figure width");
  ren->add_option("--height", ren_spec.height, "figure height");
  ren->add_option("--title", ren_spec.title, "figure title");
  ren->add_option("--out", ren_out, "output SVG (default stdout)");

  // serve
  auto* srv = app.add_subcommand("serve", "HTTP/JSON API over a loaded dataset");
  InputFlags srv_in;
  std::string host = "127.0.0.1";
  int port = 0;
  srv_in.attach(srv);
  srv->add_option("--host", host, "bind address");
  srv->add_option("--port", port, "port (default: $PHT_PORT, else 8080)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      std::ostringstream csv;
      Json sidecar;
      if (gen_dataset == "sine1") {
        if (gen_n) sine.n_samples = gen_n;
        if (gen_period) sine.drift_period = gen_period;
        sine.noise_rate = gen_noise;
        sine.seed = gen_seed;
        write_csv(csv, generate_sine1(sine));
        sidecar = sine1_sidecar(sine);
      } else {
        if (gen_n) circles.n_samples = gen_n;
        if (gen_period) circles.drift_period = gen_period;
        circles.seed = gen_seed;
        write_csv(csv, generate_circles(circles));
        sidecar = circles_sidecar(circles);
      }
      emit(gen_out, csv.str());
      emit(sidecar_path(gen_out), dump(sidecar));
      std::cerr << "wrote " << gen_out << " and " << sidecar_path(gen_out) << "\n";
    } else if (*sum) {
      const auto data = sum_in.load();
      const auto params = sum_flags.params(data.stream.schema);
      const auto summaries = compute_summaries(data.stream, params);
      emit(sum_out, dump(summaries_document(data.stream.schema, summaries, params, data.input_hash)));
      std::cerr << summaries.size() << " summaries\n";
    } else if (*det) {
      const auto data = det_in.load();
      det_cfg.monitor = per_class ? MonitorMode::per_class : MonitorMode::marginal;
      det_cfg.validate();
      const auto report = detect_stream(data.stream, det_cfg);
      emit(det_out, dump(drift_report_to_json(report, data.input_hash)));
      std::cerr << report.events.size() << " drift points\n";
    } else if (*ana) {
      const auto data = ana_in.load();
      SessionConfig cfg;
      if (!ana_in.csv.empty()) {
        cfg.csv = CsvSource{ana_in.csv, {}};
        cfg.csv->options.label_column = ana_in.label_column;
      } else {
        if (ana_in.dataset == "sine1") {
          Sine1Config g;
          g.seed = ana_in.seed;
          if (ana_in.n_samples) g.n_samples = ana_in.n_samples;
          cfg.generator = g;
        } else {
          CirclesConfig g;
          g.seed = ana_in.seed;
          if (ana_in.n_samples) g.n_samples = ana_in.n_samples;
          cfg.generator = g;
        }
      }
      cfg.summary.window = WindowSpec::disjoint(ana_window ? ana_window : loc.initial_window);
      cfg.summary.count = kMaxWindowsPerFigure;
      cfg.detector.monitor = ana_per_class ? MonitorMode::per_class : MonitorMode::marginal;
      cfg.localize = loc;
      const auto artifact = build_artifact(data, cfg);
      if (!ana_dir.empty()) {
        artifact.write(ana_dir);
        std::cerr << "artifact " << artifact.artifact_hash << " written to " << ana_dir << "\n";
      }
      if (ana_dir.empty() || !ana_out.empty()) emit(ana_out, dump(artifact.analysis));
    } else if (*ren) {
      std::vector<WindowSummary> summaries;
      std::vector<Sample> samples;
      if (!ren_summaries.empty()) {
        Json doc;
        const std::string text = read_file(ren_summaries);
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
          throw std::runtime_error(ren_summaries + ": summaries file is empty");
        }
        try {
          doc = Json::parse(text);
        } catch (const Json::exception& e) {
          throw std::runtime_error(ren_summaries + ": not valid JSON (" + e.what() + ")");
        }
        LoadedSummaries loaded;
        try {
          loaded = summaries_from_json(doc);
        } catch (const std::exception& e) {
          throw std::runtime_error(ren_summaries + ": " + e.what());
        }
        summaries = std::move(loaded.summaries);
        ren_spec.feature_names = loaded.schema.feature_names;
        ren_spec.class_names = loaded.schema.class_names;
        // Features are positions in the stored subset here.
        for (const auto& t : ren_flags.features) {
          const auto f = resolve_features(loaded.schema, {t}).front();
          ren_spec.features.push_back(f);
        }
        ren_spec.classes = resolve_classes(loaded.schema, ren_flags.classes);
      } else {
        if (ren_flags.size == 0) throw CLI::ValidationError("--window-size", "required with --in/--dataset");
        const auto data = ren_in.load();
        const auto params = ren_flags.params(data.stream.schema);
        summaries = compute_summaries(data.stream, params);
        if (summaries.empty()) throw std::runtime_error("no window of that size fits " + data.name);
        ren_spec.bins = params.bins;
        ren_spec.features = params.features;
        ren_spec.classes = params.classes;
        ren_spec.feature_names = data.stream.schema.feature_names;
        ren_spec.class_names = data.stream.schema.class_names;
        if (ren_samples && ren_window < summaries.size()) {
          const auto& w = summaries[ren_window];
          samples.assign(data.stream.samples.begin() + static_cast<std::ptrdiff_t>(w.start),
                         data.stream.samples.begin() + static_cast<std::ptrdiff_t>(w.start + w.size));
        }
      }
      ren_spec.drift_markers = ren_markers;
      ren_spec.draw_samples = ren_samples;
      std::string svg;
      if (ren_view == "pht") {
        svg = render_pht(summaries, ren_spec);
      } else {
        if (ren_window >= summaries.size()) throw std::runtime_error("--window is past the last summary");
        svg = render_parallel_histograms(summaries[ren_window], ren_spec, samples);
      }
      emit(ren_out, svg);
    } else if (*srv) {
      if (port == 0) {
        const char* env = std::getenv("PHT_PORT");
        port = env ? std::atoi(env) : 8080;
      }
      ApiService service(srv_in.load());
      HttpServer server(service);
      if (!server.bind(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << " (port in use?)\n";
        return 3;
      }
      std::cerr << "serving " << service.input_hash() << " on http://" << host << ":" << port << "\n";
      server.listen();
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
