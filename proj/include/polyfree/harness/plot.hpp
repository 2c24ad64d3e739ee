#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace polyfree::harness {

inline constexpr double kPlotFloor = 1e-16;

struct PlotLine {
  std::string legend;
  /// Best-so-far gap per iteration, already floored at kPlotFloor.
  std::vector<double> gap;
};

struct PlotPanel {
  std::string title;
  std::string y_label;
  std::vector<PlotLine> lines;
};

/// Groups the report's runs into one panel per rule kind (fixed order: gd,
/// clipped_gd, polyak, naive_lower_bound, decsps, adasps, inexact_polyak)
/// and loads each trace from `report_dir`. The y value is f_best - f*,
/// floored at kPlotFloor. Lines are labelled "L1=<v>" for quartic
/// objectives, otherwise by run label.
///
/// Throws std::runtime_error if the report has no run that took a step.
std::vector<PlotPanel> build_panels(const nlohmann::json& report,
                                    const std::filesystem::path& report_dir);

/// Deterministic SVG: panels on a 3-column grid, log-scale y axes.
std::string render_svg(const std::vector<PlotPanel>& panels);

/// build_panels + render_svg, written to `out`.
void emit_plot(const std::filesystem::path& report_path, const std::filesystem::path& out);

}  // namespace polyfree::harness
