#include "pht/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pht {

namespace {

constexpr double kMarginLeft = 110.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 40.0;
constexpr double kBandGap = 14.0;
constexpr double kCellPad = 2.0;
constexpr double kBarFraction = 0.8;
constexpr double kOverlayOpacity = 0.45;

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string name_or(const std::vector<std::string>& names, std::size_t i, const char* prefix) {
  return i < names.size() ? names[i] : prefix + std::to_string(i);
}

std::string class_color(const RenderSpec& spec, ClassId id) {
  if (auto it = spec.class_colors.find(id); it != spec.class_colors.end()) return it->second;
  return default_class_color(id);
}

std::string class_label(const RenderSpec& spec, ClassId id) {
  return name_or(spec.class_names, static_cast<std::size_t>(id), "class ");
}

std::vector<std::size_t> resolve_features(const RenderSpec& spec, std::size_t available) {
  std::vector<std::size_t> features = spec.features;
  if (features.empty()) {
    if (available > spec.feature_cap) {
      throw RenderError("figure would show " + std::to_string(available) + " features; select at most " +
                        std::to_string(spec.feature_cap));
    }
    for (std::size_t f = 0; f < available; ++f) features.push_back(f);
  }
  if (features.size() > spec.feature_cap) {
    throw RenderError(std::to_string(features.size()) + " features requested, cap is " +
                      std::to_string(spec.feature_cap));
  }
  for (auto f : features) {
    if (f >= available) throw RenderError("unknown feature " + std::to_string(f));
  }
  return features;
}

void check_classes(const RenderSpec& spec, const WindowSummary& summary) {
  const std::size_t n_classes = summary.count_per_class.size();
  for (auto c : spec.classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes) throw RenderError("unknown class " + std::to_string(c));
  }
}

void check_bins(const RenderSpec& spec, const WindowSummary& summary) {
  if (spec.bins == 0 || summary.per_feature.empty()) return;
  if (summary.per_feature.front().histogram.bins() != spec.bins) {
    throw RenderError("summaries carry " + std::to_string(summary.per_feature.front().histogram.bins()) +
                      " bins, spec asks for " + std::to_string(spec.bins));
  }
}

// Accumulates SVG text; every coordinate goes through svg_number.
class SvgWriter {
 public:
  SvgWriter(double width, double height) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_number(width) << "\" height=\""
         << svg_number(height) << "\" viewBox=\"0 0 " << svg_number(width) << ' ' << svg_number(height)
         << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  }

  void open(const std::string& tag_and_attrs) {
    indent();
    out_ << '<' << tag_and_attrs << ">\n";
    ++depth_;
  }
  void close(const char* tag) {
    --depth_;
    indent();
    out_ << "</" << tag << ">\n";
  }
  void line(const std::string& element) {
    indent();
    out_ << element << '\n';
  }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  void indent() {
    for (int i = 0; i <= depth_; ++i) out_ << "  ";
  }
  std::ostringstream out_;
  int depth_ = 0;
};

std::string rect(double x, double y, double w, double h, const std::string& fill, double opacity,
                 const std::string& cls) {
  std::string s = "<rect class=\"" + cls + "\" x=\"" + svg_number(x) + "\" y=\"" + svg_number(y) + "\" width=\"" +
                  svg_number(w) + "\" height=\"" + svg_number(h) + "\" fill=\"" + fill + "\"";
  if (opacity < 1.0) s += " fill-opacity=\"" + svg_number(opacity) + "\"";
  return s + "/>";
}

std::string text(double x, double y, const std::string& content, const char* anchor = "start",
                 const char* cls = "label") {
  return "<text class=\"" + std::string(cls) + "\" x=\"" + svg_number(x) + "\" y=\"" + svg_number(y) +
         "\" text-anchor=\"" + anchor + "\">" + escape(content) + "</text>";
}

std::string vline(double x, double y0, double y1, const std::string& stroke, const char* cls, double width = 1.0) {
  return "<line class=\"" + std::string(cls) + "\" x1=\"" + svg_number(x) + "\" y1=\"" + svg_number(y0) +
         "\" x2=\"" + svg_number(x) + "\" y2=\"" + svg_number(y1) + "\" stroke=\"" + stroke +
         "\" stroke-width=\"" + svg_number(width) + "\"/>";
}

// Maps a feature value onto a vertical axis spanning [top, bottom].
struct ValueAxis {
  double lo;
  double hi;
  double top;
  double bottom;

  double y(double v) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return bottom - std::clamp(t, 0.0, 1.0) * (bottom - top);
  }
};

// Draws one histogram along a vertical axis; bars extend to the right of x0.
void draw_histogram(SvgWriter& svg, const Histogram& h, const ValueAxis& axis, double x0, double extent,
                    std::uint64_t norm, const std::string& fill, double opacity, const std::string& layer) {
  svg.open("g class=\"hist\" data-layer=\"" + layer + "\"");
  for (std::size_t b = 0; b < h.bins(); ++b) {
    if (h.counts[b] == 0) continue;
    const double len = norm ? static_cast<double>(h.counts[b]) / static_cast<double>(norm) * extent : 0.0;
    const double y_top = axis.y(h.edges[b + 1]);
    const double y_bottom = axis.y(h.edges[b]);
    svg.line(rect(x0, y_top, len, y_bottom - y_top, fill, opacity, "bar"));
  }
  svg.close("g");
}

std::uint64_t max_count(const Histogram& h) {
  return h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
}

}  // namespace

std::string default_class_color(ClassId id) {
  static constexpr std::array<const char*, 8> kPalette = {"#E69F00", "#56B4E9", "#009E73", "#CC79A7",
                                                          "#0072B2", "#D55E00", "#F0E442", "#000000"};
  const auto i = static_cast<std::size_t>(id < 0 ? -id : id) % kPalette.size();
  return kPalette[i];
}

std::string svg_number(double v) {
  if (!std::isfinite(v)) throw std::logic_error("non-finite SVG coordinate");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

double pht_bar_extent(const RenderSpec& spec, std::size_t windows) {
  const double cell = (spec.width - kMarginLeft - kMarginRight) / static_cast<double>(std::max<std::size_t>(windows, 1));
  return (cell - 2 * kCellPad) * kBarFraction;
}

double parallel_bar_extent(const RenderSpec& spec, std::size_t features) {
  const double spacing = (spec.width - kMarginLeft - kMarginRight) / static_cast<double>(std::max<std::size_t>(features, 1));
  return spacing * 0.7;
}

std::string render_pht(std::span<const WindowSummary> summaries, const RenderSpec& spec) {
  if (summaries.empty()) throw RenderError("no window summaries to render");
  if (summaries.size() > kMaxWindowsPerFigure) {
    throw RenderError(std::to_string(summaries.size()) + " windows exceed the per-figure cap of " +
                      std::to_string(kMaxWindowsPerFigure));
  }
  const auto& first = summaries.front();
  const auto features = resolve_features(spec, first.per_feature.size());
  check_classes(spec, first);
  check_bins(spec, first);

  const std::size_t n_windows = summaries.size();
  const double plot_w = spec.width - kMarginLeft - kMarginRight;
  const double cell_w = plot_w / static_cast<double>(n_windows);
  const double band_h = (spec.height - kMarginTop - kMarginBottom) / static_cast<double>(features.size()) - kBandGap;
  const double extent = pht_bar_extent(spec, n_windows);
  if (!(cell_w > 2 * kCellPad) || !(band_h > 0.0)) throw RenderError("figure too small for the requested layout");

  SvgWriter svg(spec.width, spec.height);
  svg.line("<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + svg_number(spec.width) + "\" height=\"" +
           svg_number(spec.height) + "\" fill=\"#ffffff\"/>");
  if (!spec.title.empty()) svg.line(text(kMarginLeft, 20.0, spec.title, "start", "title"));
  svg.line(text(spec.width - kMarginRight, 20.0, "bar lengths normalized per feature band; not comparable across bands",
                "end", "legend-note"));

  auto cell_x = [&](std::size_t k) { return kMarginLeft + cell_w * static_cast<double>(k); };

  for (std::size_t bi = 0; bi < features.size(); ++bi) {
    const std::size_t f = features[bi];
    const double top = kMarginTop + static_cast<double>(bi) * (band_h + kBandGap);
    const auto& edges = first.per_feature[f].histogram.edges;
    const ValueAxis axis{edges.front(), edges.back(), top, top + band_h};

    std::uint64_t norm = 0;
    for (const auto& s : summaries) norm = std::max(norm, max_count(s.per_feature[f].histogram));
    if (!spec.show_overall) {
      for (const auto& s : summaries) {
        for (auto c : spec.classes) norm = std::max(norm, max_count(s.per_feature[f].per_class[static_cast<std::size_t>(c)].histogram));
      }
    }

    svg.open("g class=\"band\" data-feature=\"" + std::to_string(f) + "\"");
    svg.line(text(kMarginLeft - 8.0, top + band_h / 2.0, name_or(spec.feature_names, f, "feature "), "end", "feature-name"));
    svg.line(text(kMarginLeft - 8.0, top + 10.0, svg_number(axis.hi), "end", "axis-tick"));
    svg.line(text(kMarginLeft - 8.0, top + band_h, svg_number(axis.lo), "end", "axis-tick"));

    for (std::size_t k = 0; k < n_windows; ++k) {
      const auto& fs = summaries[k].per_feature[f];
      const double x0 = cell_x(k) + kCellPad;
      svg.open("g class=\"cell\" data-window=\"" + std::to_string(summaries[k].window_index) + "\" data-start=\"" +
               std::to_string(summaries[k].start) + "\"");
      svg.line(vline(x0, top, top + band_h, "#999999", "axis", 0.5));
      if (spec.show_overall) draw_histogram(svg, fs.histogram, axis, x0, extent, norm, "#888888", 1.0, "all");
      for (auto c : spec.classes) {
        draw_histogram(svg, fs.per_class[static_cast<std::size_t>(c)].histogram, axis, x0, extent, norm,
                       class_color(spec, c), kOverlayOpacity, std::to_string(c));
      }
      svg.close("g");
    }

    if (spec.show_means) {
      auto draw_series = [&](const MeanSeries& series, const std::string& color, const std::string& layer) {
        std::string points;
        std::vector<std::pair<double, double>> xy;
        for (std::size_t i = 0; i < series.values.size(); ++i) {
          const auto window = series.values[i].first;
          const auto pos = static_cast<std::size_t>(
              std::find_if(summaries.begin(), summaries.end(), [&](const WindowSummary& s) { return s.window_index == window; }) -
              summaries.begin());
          const double x = cell_x(pos) + cell_w / 2.0;
          const double y = axis.y(series.values[i].second);
          xy.emplace_back(x, y);
          if (!points.empty()) points += ' ';
          points += svg_number(x) + ',' + svg_number(y);
        }
        svg.open("g class=\"means\" data-layer=\"" + layer + "\"");
        svg.line("<polyline class=\"mean-line\" points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
                 "\" stroke-width=\"1.5\"/>");
        for (const auto& [x, y] : xy) {
          svg.line("<circle class=\"mean-marker\" cx=\"" + svg_number(x) + "\" cy=\"" + svg_number(y) +
                   "\" r=\"2.5\" fill=\"" + color + "\"/>");
        }
        svg.close("g");
      };
      if (spec.show_overall) draw_series(mean_series(summaries, f), "#333333", "all");
      for (auto c : spec.classes) draw_series(mean_series(summaries, f, c), class_color(spec, c), std::to_string(c));
    }
    svg.close("g");
  }

  // Drift markers snap to the nearest window boundary inside the figure.
  const std::size_t span_start = summaries.front().start;
  const std::size_t span_end = summaries.back().start + summaries.back().size;
  const double y0 = kMarginTop - 6.0;
  const double y1 = spec.height - kMarginBottom + 6.0;
  for (auto marker : spec.drift_markers) {
    if (marker < span_start || marker > span_end) continue;
    std::size_t best = 0;
    std::size_t best_dist = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k <= n_windows; ++k) {
      const std::size_t boundary = k < n_windows ? summaries[k].start : span_end;
      const std::size_t dist = boundary > marker ? boundary - marker : marker - boundary;
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    svg.line("<line class=\"drift-marker\" data-sample=\"" + std::to_string(marker) + "\" x1=\"" +
             svg_number(cell_x(best)) + "\" y1=\"" + svg_number(y0) + "\" x2=\"" + svg_number(cell_x(best)) +
             "\" y2=\"" + svg_number(y1) + "\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>");
  }

  for (std::size_t k = 0; k < n_windows; ++k) {
    svg.line(text(cell_x(k) + cell_w / 2.0, spec.height - kMarginBottom + 18.0, std::to_string(summaries[k].window_index),
                  "middle", "window-index"));
  }
  if (!spec.classes.empty()) {
    double x = kMarginLeft;
    for (auto c : spec.classes) {
      svg.line(rect(x, spec.height - 14.0, 10.0, 10.0, class_color(spec, c), kOverlayOpacity, "legend-swatch"));
      svg.line(text(x + 14.0, spec.height - 5.0, class_label(spec, c), "start", "legend"));
      x += 90.0;
    }
  }
  return svg.finish();
}

std::string render_parallel_histograms(const WindowSummary& summary, const RenderSpec& spec,
                                       std::span<const Sample> samples) {
  const auto features = resolve_features(spec, summary.per_feature.size());
  check_classes(spec, summary);
  check_bins(spec, summary);

  const double plot_w = spec.width - kMarginLeft - kMarginRight;
  const double spacing = plot_w / static_cast<double>(features.size());
  const double extent = parallel_bar_extent(spec, features.size());
  const double top = kMarginTop;
  const double bottom = spec.height - kMarginBottom;
  auto axis_x = [&](std::size_t i) { return kMarginLeft + spacing * static_cast<double>(i) + spacing * 0.1; };

  SvgWriter svg(spec.width, spec.height);
  svg.line("<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + svg_number(spec.width) + "\" height=\"" +
           svg_number(spec.height) + "\" fill=\"#ffffff\"/>");
  if (!spec.title.empty()) svg.line(text(kMarginLeft, 20.0, spec.title, "start", "title"));

  std::vector<ValueAxis> axes;
  for (auto f : features) {
    const auto& edges = summary.per_feature[f].histogram.edges;
    axes.push_back(ValueAxis{edges.front(), edges.back(), top, bottom});
  }

  if (spec.draw_samples && !samples.empty()) {
    svg.open("g class=\"samples\"");
    for (const auto& s : samples) {
      std::string points;
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (!points.empty()) points += ' ';
        points += svg_number(axis_x(i)) + ',' + svg_number(axes[i].y(s.features[features[i]]));
      }
      const std::string color = spec.classes.empty() ? "#bbbbbb" : class_color(spec, s.label);
      svg.line("<polyline class=\"sample-line\" points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-opacity=\"0.15\"/>");
    }
    svg.close("g");
  }

  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t f = features[i];
    const auto& fs = summary.per_feature[f];
    const double x = axis_x(i);
    const auto norm = max_count(fs.histogram);
    svg.open("g class=\"axis-group\" data-feature=\"" + std::to_string(f) + "\"");
    svg.line(vline(x, top, bottom, "#333333", "axis"));
    if (spec.show_overall) draw_histogram(svg, fs.histogram, axes[i], x, extent, norm, "#888888", 1.0, "all");
    for (auto c : spec.classes) {
      draw_histogram(svg, fs.per_class[static_cast<std::size_t>(c)].histogram, axes[i], x, extent, norm,
                     class_color(spec, c), kOverlayOpacity, std::to_string(c));
    }
    if (!fs.brushed_counts.empty()) {
      const Histogram brushed{fs.histogram.edges, fs.brushed_counts};
      draw_histogram(svg, brushed, axes[i], x, extent, norm, "#d62728", 0.7, "brushed");
    }
    svg.line(text(x, bottom + 16.0, name_or(spec.feature_names, f, "feature "), "middle", "feature-name"));
    svg.line(text(x - 4.0, top + 4.0, svg_number(axes[i].hi), "end", "axis-tick"));
    svg.line(text(x - 4.0, bottom, svg_number(axes[i].lo), "end", "axis-tick"));
    svg.close("g");
  }
  return svg.finish();
}

}  // namespace pht
