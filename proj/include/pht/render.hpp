#ifndef PHT_RENDER_HPP_
#define PHT_RENDER_HPP_

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pht/histogram.hpp"

namespace pht {

inline constexpr std::size_t kFeatureCap = 12;
inline constexpr std::size_t kMaxWindowsPerFigure = 40;

class RenderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RenderSpec {
  double width = 1200.0;
  double height = 600.0;
  // 0 accepts whatever bin count the summaries carry; otherwise they must match.
  std::size_t bins = 0;
  // Features to draw, in band order; empty means every feature (subject to the cap).
  std::vector<std::size_t> features;
  // Classes drawn as translucent overlays with their own mean polylines. Empty = overall layer only.
  std::vector<ClassId> classes;
  std::map<ClassId, std::string> class_colors;
  bool show_overall = true;
  bool show_means = true;
  // Sample indices; each is drawn as a vertical rule at the nearest window boundary.
  std::vector<std::size_t> drift_markers;
  std::size_t feature_cap = kFeatureCap;
  // Parallel-histogram view only: draw each sample as a polyline behind the histograms.
  bool draw_samples = false;

  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::string title;
};

// Colorblind-safe categorical palette (Okabe-Ito), by class id.
std::string default_class_color(ClassId id);

// Horizontal length given to the tallest bin of a band for a figure with `windows` cells.
double pht_bar_extent(const RenderSpec& spec, std::size_t windows);
double parallel_bar_extent(const RenderSpec& spec, std::size_t features);

// Numeric attribute formatting used throughout the SVG: fixed two decimals, trailing zeros trimmed.
std::string svg_number(double v);

std::string render_pht(std::span<const WindowSummary> summaries, const RenderSpec& spec);

std::string render_parallel_histograms(const WindowSummary& summary, const RenderSpec& spec,
                                       std::span<const Sample> samples = {});

}  // namespace pht

#endif  // PHT_RENDER_HPP_
