#include "polyfree/harness/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "polyfree/harness/io.hpp"

namespace polyfree::harness {

using nlohmann::json;

namespace {

struct PanelKind {
  std::string_view rule;
  std::string_view title;
};

constexpr std::array<PanelKind, 7> kPanelOrder{{
    {"gd", "Gradient Descent"},
    {"clipped_gd", "Clipped Gradient Descent"},
    {"polyak", "Polyak Stepsize"},
    {"naive_lower_bound", "Naive Lower-Bound Stepsize"},
    {"decsps", "DecSPS"},
    {"adasps", "AdaSPS"},
    {"inexact_polyak", "Inexact Polyak Stepsize"},
}};

constexpr std::array<std::string_view, 8> kPalette{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

constexpr double kPanelW = 380, kPanelH = 270;
constexpr double kLeft = 62, kRight = 96, kTop = 30, kBottom = 42;
constexpr std::size_t kMaxPoints = 1000;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string legend_for(const json& run) {
  const json& obj = run.at("objective");
  if (obj.at("kind") == "quartic") return "L1=" + format_double(obj.at("L1").get<double>());
  return run.at("label").get<std::string>();
}

void render_panel(std::string& svg, const PlotPanel& panel, double ox, double oy) {
  const double w = kPanelW - kLeft - kRight;
  const double h = kPanelH - kTop - kBottom;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t max_t = 1;
  for (const PlotLine& line : panel.lines) {
    max_t = std::max(max_t, line.gap.size() - 1);
    for (double v : line.gap) {
      lo = std::min(lo, std::log10(v));
      hi = std::max(hi, std::log10(v));
    }
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1;

  auto px = [&](double t) { return kLeft + w * t / static_cast<double>(max_t); };
  auto py = [&](double v) { return kTop + h * (hi - std::log10(v)) / (hi - lo); };

  svg += fmt::format("<g class=\"panel\" transform=\"translate({:.0f},{:.0f})\">\n", ox, oy);
  svg += fmt::format(
      "<text x=\"{:.1f}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
      kLeft + w / 2, escape(panel.title));
  svg += fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
      "stroke=\"#333\"/>\n",
      kLeft, kTop, w, h);

  const int span = static_cast<int>(hi - lo);
  const int step = std::max(1, (span + 5) / 6);
  for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += step) {
    const double y = py(std::pow(10.0, e));
    svg += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", kLeft,
        y, kLeft + w, y);
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"10\">1e{}</text>\n",
        kLeft - 4, y + 3, e);
  }
  for (int k = 0; k <= 4; ++k) {
    const std::size_t t = max_t * static_cast<std::size_t>(k) / 4;
    const double x = px(static_cast<double>(t));
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n", x,
        kTop + h + 14, t);
  }
  svg += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"11\">iteration</text>\n",
      kLeft + w / 2, kTop + h + 32);
  svg += fmt::format(
      "<text x=\"14\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"11\" "
      "transform=\"rotate(-90 14 {:.1f})\">{}</text>\n",
      kTop + h / 2, kTop + h / 2, escape(panel.y_label));

  for (std::size_t i = 0; i < panel.lines.size(); ++i) {
    const PlotLine& line = panel.lines[i];
    const std::string_view color = kPalette[i % kPalette.size()];
    const std::size_t n = line.gap.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + kMaxPoints - 1) / kMaxPoints);
    std::string points;
    for (std::size_t t = 0; t < n; t += stride) {
      points += fmt::format("{:.2f},{:.2f} ", px(static_cast<double>(t)), py(line.gap[t]));
    }
    if ((n - 1) % stride != 0) {
      points += fmt::format("{:.2f},{:.2f} ", px(static_cast<double>(n - 1)), py(line.gap[n - 1]));
    }
    if (!points.empty()) points.pop_back();
    svg += fmt::format(
        "<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" "
        "points=\"{}\"/>\n",
        color, points);

    const double ly = kTop + 10 + 16 * static_cast<double>(i);
    svg += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n",
        kLeft + w + 8, ly, kLeft + w + 24, ly, color);
    svg += fmt::format(
        "<text class=\"legend\" x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\">{}</text>\n",
        kLeft + w + 28, ly + 3, escape(line.legend));
  }
  svg += "</g>\n";
}

}  // namespace

std::vector<PlotPanel> build_panels(const json& report, const std::filesystem::path& report_dir) {
  const json& runs = report.at("runs");
  std::vector<PlotPanel> panels;
  bool any_progress = false;
  for (const PanelKind& kind : kPanelOrder) {
    PlotPanel panel;
    panel.title = std::string(kind.title);
    panel.y_label = "best f - f*";
    for (const json& run : runs) {
      if (run.at("rule").at("kind") != kind.rule) continue;
      const auto trace = read_trace_csv(report_dir / run.at("trace_csv").get<std::string>());
      if (trace.empty()) continue;
      if (trace.size() > 1) any_progress = true;
      const double f_star = run.at("f_star").get<double>();
      PlotLine line;
      line.legend = legend_for(run);
      double best = std::numeric_limits<double>::infinity();
      for (const IterateRecord& r : trace) {
        best = std::min(best, r.f_val);
        line.gap.push_back(std::max(best - f_star, kPlotFloor));
      }
      panel.lines.push_back(std::move(line));
    }
    if (!panel.lines.empty()) panels.push_back(std::move(panel));
  }
  if (!any_progress) {
    throw std::runtime_error("nothing to plot: every run stopped at t = 0");
  }
  return panels;
}

std::string render_svg(const std::vector<PlotPanel>& panels) {
  const std::size_t cols = std::min<std::size_t>(3, std::max<std::size_t>(1, panels.size()));
  const std::size_t rows = (panels.size() + cols - 1) / cols;
  const double width = kPanelW * static_cast<double>(cols);
  const double height = kPanelH * static_cast<double>(std::max<std::size_t>(rows, 1));
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width, height);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(svg, panels[i], kPanelW * static_cast<double>(i % cols),
                 kPanelH * static_cast<double>(i / cols));
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::filesystem::path& report_path, const std::filesystem::path& out) {
  const json report = json::parse(read_text_file(report_path));
  const auto panels = build_panels(report, report_path.parent_path());
  write_text_file(out, render_svg(panels));
}

}  // namespace polyfree::harness
