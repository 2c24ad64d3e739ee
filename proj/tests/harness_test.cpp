#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "oracle.hpp"
#include "polyfree/core.hpp"
#include "polyfree/harness/config.hpp"
#include "polyfree/harness/experiment.hpp"
#include "polyfree/harness/grid.hpp"
#include "polyfree/harness/io.hpp"
#include "polyfree/harness/plot.hpp"
#include "polyfree/objectives.hpp"

namespace polyfree::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("polyfree_harness_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json quartic_run(const std::string& label, double L1, json rule) {
  return json{{"label", label},
              {"objective", {{"kind", "quartic"}, {"L0", 1}, {"L1", L1}, {"f_star", 1}}},
              {"x0", 5},
              {"rule", std::move(rule)}};
}

std::string config_error_field(const json& doc) {
  try {
    parse_experiment(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

// ---- number formatting and traces

TEST(Io, FormatDoubleIsShortest) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(25.0), "25");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
  EXPECT_THROW(parse_double(""), std::invalid_argument);
}

TEST(IoProperty, FormatParseRoundTripsEveryBitPattern) {
  auto g = oracle::rng(30);
  for (int trial = 0; trial < 20000; ++trial) {
    std::uint64_t bits = g();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (std::isnan(v)) continue;
    const double back = parse_double(format_double(v));
    EXPECT_EQ(std::memcmp(&v, &back, sizeof v), 0) << format_double(v);
  }
}

TEST(Io, TraceCsvRoundTrip) {
  const std::vector<IterateRecord> trace{
      {0, 15.930555555555555, 9.444444444444443, 0.1673875432525952, 25.0},
      {1, 1.0000000000000002, 1e-300, 0.0, std::nullopt},
      {2, 1.0, 0.0, std::numeric_limits<double>::infinity(), 0.0}};
  std::stringstream ss;
  write_trace_csv(ss, trace);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kTraceHeader);
  EXPECT_NE(text.find("\n0,15.930555555555555,9.444444444444443,0.1673875432525952,25\n"),
            std::string::npos);
  EXPECT_NE(text.find("\n1,1.0000000000000002,1e-300,0,\n"), std::string::npos);

  std::stringstream in(text);
  const auto back = read_trace_csv(in);
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(back[i].t, trace[i].t);
    EXPECT_EQ(back[i].f_val, trace[i].f_val);
    EXPECT_EQ(back[i].grad_norm, trace[i].grad_norm);
    EXPECT_EQ(back[i].stepsize, trace[i].stepsize);
    EXPECT_EQ(back[i].dist_to_opt_sq, trace[i].dist_to_opt_sq);
  }
}

TEST(Io, MalformedTraceNamesTheLine) {
  std::stringstream bad_header("t,f\n0,1\n");
  EXPECT_THROW(read_trace_csv(bad_header), std::runtime_error);
  std::stringstream short_row(std::string(kTraceHeader) + "\n0,1,1,1,1\n1,2,3\n");
  try {
    read_trace_csv(short_row);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

// ---- config validation

TEST(Config, ParsesRunsAndDefaults) {
  json doc{{"T", 50},
           {"runs",
            {quartic_run("a", 10, {{"kind", "clipped_gd"}, {"lr", 0.1}, {"clip", "inf"}}),
             quartic_run("b", 1, {{"kind", "inexact_polyak"}, {"l_star", 0}})}}};
  doc["runs"][1]["T"] = 7;
  const ExperimentConfig cfg = parse_experiment(doc);
  ASSERT_EQ(cfg.runs.size(), 2u);
  EXPECT_EQ(cfg.runs[0].iterations, 50u);
  EXPECT_EQ(cfg.runs[0].x0, (Vector{5.0}));
  EXPECT_EQ(cfg.runs[0].objective.box_radius.value_or(5.0), 5.0);
  const auto& clip = std::get<ClippedGradientDescent>(cfg.runs[0].rule);
  EXPECT_TRUE(std::isinf(clip.clip));
  EXPECT_EQ(std::get<InexactPolyak>(cfg.runs[1].rule).horizon, 7u);
}

TEST(Config, BroadcastsScalarStartingPoint) {
  json run = quartic_run("a", 1, {{"kind", "polyak"}});
  run["objective"]["dim"] = 3;
  run["x0"] = 2;
  const ExperimentConfig cfg = parse_experiment(json{{"runs", {run}}});
  EXPECT_EQ(cfg.runs[0].x0, (Vector{2, 2, 2}));
  run["x0"] = json::array({1, 2});
  EXPECT_EQ(config_error_field(json{{"runs", {run}}}), "runs[0].x0");
}

TEST(Config, RejectsInvalidFields) {
  EXPECT_EQ(config_error_field(json{{"runs", {quartic_run("a", 0, {{"kind", "polyak"}})}}}),
            "runs[0].objective.L1");
  EXPECT_EQ(config_error_field(json{{"runs",
                                     {quartic_run("a", 1, {{"kind", "polyak"}}),
                                      quartic_run("a", 2, {{"kind", "polyak"}})}}}),
            "runs[1].label");
  EXPECT_EQ(config_error_field(json{{"runs", {quartic_run("a", 1, {{"kind", "gd"}, {"lr", -1}})}}}),
            "runs[0].rule.lr");
  EXPECT_EQ(config_error_field(
                json{{"runs", {quartic_run("a", 1, {{"kind", "naive_lower_bound"}, {"l_star", 2}})}}}),
            "runs[0].rule.l_star");
  EXPECT_EQ(config_error_field(json{{"runs", {quartic_run("a", 1, {{"kind", "sgd"}})}}}),
            "runs[0].rule.kind");
  json extra = quartic_run("a", 1, {{"kind", "polyak"}});
  extra["typo"] = 1;
  EXPECT_EQ(config_error_field(json{{"runs", {extra}}}), "runs[0].typo");
  json bad_label = quartic_run("a/b", 1, {{"kind", "polyak"}});
  EXPECT_EQ(config_error_field(json{{"runs", {bad_label}}}), "runs[0].label");
  json wrong_check = quartic_run("a", 1, {{"kind", "gd"}, {"lr", 0.1}});
  wrong_check["verify"] = {"prop_3_1"};
  EXPECT_EQ(config_error_field(json{{"runs", {wrong_check}}}), "runs[0].verify[0]");
}

TEST(Config, EmptyRunListIsValidAndProducesAnEmptyReport) {
  const ExperimentConfig cfg = parse_experiment(json{{"runs", json::array()}});
  EXPECT_TRUE(cfg.runs.empty());
  const fs::path dir = fresh_dir("empty");
  const json report = run_experiment(cfg, dir);
  EXPECT_TRUE(report["runs"].empty());
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

// ---- experiment execution

TEST(Experiment, WritesTracesAndReport) {
  json polyak = quartic_run("polyak_L1_1", 1, {{"kind", "polyak"}});
  polyak["verify"] = {"lemma_a1", "lemma_a2", "hessian_certificate", "prop_3_1",
                      "distance_monotone"};
  json ips = quartic_run("ips_L1_10", 10, {{"kind", "inexact_polyak"}, {"l_star", 0}});
  ips["verify"] = {"distance_monotone", "envelope"};
  const ExperimentConfig cfg = parse_experiment(json{{"T", 200}, {"runs", {polyak, ips}}});
  const fs::path dir = fresh_dir("experiment");
  const json report = run_experiment(cfg, dir);

  EXPECT_EQ(report["schema"], kReportSchema);
  ASSERT_EQ(report["runs"].size(), 2u);
  const json& r0 = report["runs"][0];
  for (const char* key : {"label", "objective", "rule", "x0", "T", "status", "steps", "best_f",
                          "best_index", "final_f", "f_star", "floor", "trace_csv", "checks"}) {
    EXPECT_TRUE(r0.contains(key)) << key;
  }
  EXPECT_EQ(r0["label"], "polyak_L1_1");
  EXPECT_EQ(r0["checks"].size(), 5u);
  for (const json& c : r0["checks"]) EXPECT_EQ(c["n_violations"], 0) << c.dump();
  for (const json& c : report["runs"][1]["checks"]) EXPECT_EQ(c["n_violations"], 0) << c.dump();

  const auto trace = read_trace_csv(dir / r0["trace_csv"].get<std::string>());
  const RunResult direct = run(QuarticSynthetic(1, 1, 1), PolyakStep{1.0}, Vector{5.0}, 200);
  ASSERT_EQ(trace.size(), direct.trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) EXPECT_EQ(trace[i].f_val, direct.trace[i].f_val);
  EXPECT_EQ(r0["best_f"].get<double>(), direct.best_f);
  EXPECT_EQ(json::parse(read_text_file(dir / "report.json")), report);
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  json runs = json::array();
  for (int L1 : {1, 10, 100, 1000}) {
    runs.push_back(quartic_run("adasps_" + std::to_string(L1), L1, {{"kind", "adasps"}, {"l_star", 0}}));
    runs.push_back(quartic_run("decsps_" + std::to_string(L1), L1, {{"kind", "decsps"}, {"l_star", 0}}));
  }
  ExperimentConfig cfg = parse_experiment(json{{"T", 300}, {"runs", runs}});
  const fs::path a = fresh_dir("workers_1");
  const fs::path b = fresh_dir("workers_4");
  cfg.workers = 1;
  run_experiment(cfg, a);
  cfg.workers = 4;
  run_experiment(cfg, b);
  EXPECT_EQ(read_text_file(a / "report.json"), read_text_file(b / "report.json"));
  for (const auto& entry : fs::directory_iterator(a / "traces")) {
    EXPECT_EQ(read_text_file(entry.path()),
              read_text_file(b / "traces" / entry.path().filename()));
  }
}

TEST(Parallel, ForCoversEveryIndexOnceAndRethrows) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_EQ(worker_count(3), 3u);
  EXPECT_GE(worker_count(), 1u);
}

// ---- grid search

GridCell cell(std::vector<double> values, double best_f, RunStatus status = RunStatus::Completed) {
  GridCell c;
  c.values = std::move(values);
  c.indices.assign(c.values.size(), 0);
  c.best_f = best_f;
  c.status = status;
  return c;
}

TEST(Grid, SelectionPrefersLowestValueThenSmallerAxisValues) {
  std::vector<GridCell> cells{cell({1.0, 5.0}, 2.0), cell({0.1, 20.0}, 1.0), cell({0.1, 10.0}, 1.0),
                              cell({0.01, 1.0}, 0.5, RunStatus::DivergedBound)};
  EXPECT_EQ(select_cell(cells), 2u);
  cells.push_back(cell({0.01, 99.0}, 1.0));
  EXPECT_EQ(select_cell(cells), 4u);
}

TEST(Grid, AllDivergedIsReported) {
  std::vector<GridCell> cells{cell({1.0}, 1.0, RunStatus::DivergedBound),
                              cell({2.0}, 1.0, RunStatus::DivergedNonFinite)};
  EXPECT_THROW(select_cell(cells), AllDiverged);

  json doc{{"T", 20},
           {"base", quartic_run("cell", 1, {{"kind", "gd"}, {"lr", 1}})},
           {"axes", {{{"name", "lr"}, {"values", {1e6, 1e8}}}}}};
  const fs::path dir = fresh_dir("all_diverged");
  EXPECT_THROW(run_grid(parse_grid(doc), dir), AllDiverged);
  EXPECT_TRUE(fs::exists(dir / "grid_table.csv"));
  EXPECT_FALSE(fs::exists(dir / "grid_selection.json"));
}

TEST(Grid, TableIsRowMajorAndIndependentOfWorkers) {
  json doc{{"T", 200},
           {"base", quartic_run("cell", 10, {{"kind", "clipped_gd"}, {"lr", 1}, {"clip", 1}})},
           {"axes",
            {{{"name", "lr"}, {"values", {1, 0.1, 0.01}}},
             {{"name", "clip"}, {"values", json::array({0.1, 1, "inf"})}}}}};
  const GridSpec spec = parse_grid(doc);
  EXPECT_EQ(spec.cell_count(), 9u);
  const GridResult one = grid_search(spec, 1);
  const GridResult four = grid_search(spec, 4);
  EXPECT_EQ(grid_table_csv(one), grid_table_csv(four));
  EXPECT_EQ(one.selected, four.selected);
  ASSERT_EQ(one.cells.size(), 9u);
  EXPECT_EQ(one.cells[5].indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(std::isinf(one.cells[5].values[1]));
  const std::string table = grid_table_csv(one);
  EXPECT_EQ(table.substr(0, table.find('\n')), "lr,clip,status,best_f,best_index,final_f");

  const json sel = grid_selection_json(one);
  EXPECT_EQ(sel["n_cells"], 9);
  EXPECT_EQ(sel["cell_index"], one.selected);
}

TEST(Grid, RejectsAxisThatIsNotARuleField) {
  json doc{{"base", quartic_run("cell", 1, {{"kind", "gd"}, {"lr", 1}})},
           {"axes", {{{"name", "clip"}, {"values", {1, 2}}}}}};
  EXPECT_THROW(evaluate_grid(parse_grid(doc), 1), ConfigError);
}

// ---- plots

json plot_config(std::vector<json> runs, std::size_t T = 100) {
  return json{{"T", T}, {"runs", std::move(runs)}};
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(Plot, OnePanelPerRuleKindAndOneLinePerRun) {
  std::vector<json> runs;
  for (double L1 : {1.0, 10.0}) {
    const std::string s = L1 == 1.0 ? "1" : "10";
    runs.push_back(quartic_run("gd_" + s, L1, {{"kind", "gd"}, {"lr", 1e-3}}));
    runs.push_back(quartic_run("polyak_" + s, L1, {{"kind", "polyak"}}));
    runs.push_back(quartic_run("ips_" + s, L1, {{"kind", "inexact_polyak"}, {"l_star", 0}}));
  }
  const fs::path dir = fresh_dir("plot");
  const json report = run_experiment(parse_experiment(plot_config(runs)), dir);
  const auto panels = build_panels(report, dir);
  ASSERT_EQ(panels.size(), 3u);
  EXPECT_EQ(panels[0].lines.size(), 2u);
  EXPECT_EQ(panels[0].lines[1].legend, "L1=10");
  const std::string svg = render_svg(panels);
  EXPECT_EQ(count(svg, "class=\"panel\""), 3u);
  EXPECT_EQ(count(svg, "class=\"series\""), 6u);
  EXPECT_EQ(svg, render_svg(build_panels(report, dir)));
}

TEST(Plot, SingleRunAndFloorAtTheOptimum) {
  json at_opt = quartic_run("at_opt", 1, {{"kind", "polyak"}});
  json one = quartic_run("one", 1, {{"kind", "gd"}, {"lr", 0.1}});
  const fs::path dir = fresh_dir("plot_single");
  const json report = run_experiment(parse_experiment(plot_config({one}, 10)), dir);
  const auto panels = build_panels(report, dir);
  ASSERT_EQ(panels.size(), 1u);
  ASSERT_EQ(panels[0].lines.size(), 1u);
  EXPECT_EQ(panels[0].lines[0].gap.size(), 11u);

  at_opt["x0"] = 0;
  at_opt["objective"]["box_radius"] = 1;
  const fs::path dir2 = fresh_dir("plot_floor");
  const json report2 = run_experiment(parse_experiment(plot_config({at_opt, one}, 10)), dir2);
  const auto floored = build_panels(report2, dir2);
  ASSERT_EQ(floored.size(), 2u);
  for (double v : floored[1].lines[0].gap) EXPECT_EQ(v, kPlotFloor);
}

TEST(Plot, RejectsReportWithoutProgress) {
  json div = quartic_run("div", 1, {{"kind", "gd"}, {"lr", 1e9}});
  const fs::path dir = fresh_dir("plot_none");
  const json report = run_experiment(parse_experiment(plot_config({div}, 10)), dir);
  EXPECT_THROW(build_panels(report, dir), std::runtime_error);
}

}  // namespace
}  // namespace polyfree::harness
