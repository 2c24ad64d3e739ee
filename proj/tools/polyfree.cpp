// polyfree: run configured optimization experiments, hyperparameter grids,
// trace certificates, and convergence plots.
//
//   polyfree run <config.json> --out <dir>
//   polyfree grid <grid.json> --out <dir>
//   polyfree verify <trace.csv> --check <name> --params <json>
//   polyfree plot <report.json> --out <file.svg>
//
// Exit codes: 0 success, 1 validation error, 2 every grid cell diverged.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "polyfree/harness/config.hpp"
#include "polyfree/harness/experiment.hpp"
#include "polyfree/harness/grid.hpp"
#include "polyfree/harness/io.hpp"
#include "polyfree/harness/plot.hpp"
#include "polyfree/verify.hpp"

namespace {

using nlohmann::json;
using namespace polyfree;
using namespace polyfree::harness;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAllDiverged = 2;

json parse_params(const std::string& text) {
  if (!text.empty() && text.front() == '@') return load_json_file(text.substr(1));
  try {
    return json::parse(text.empty() ? "{}" : text);
  } catch (const json::parse_error& e) {
    throw ConfigError("--params", fmt::format("invalid JSON: {}", e.what()));
  }
}

double param(const json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end() || !it->is_number()) {
    throw ConfigError(fmt::format("--params.{}", key), "missing or not a number");
  }
  return it->get<double>();
}

RuleKind param_rule(const json& params, RuleKind fallback) {
  auto it = params.find("rule");
  if (it == params.end()) return fallback;
  if (auto kind = it->is_string() ? parse_rule_kind(it->get<std::string>()) : std::nullopt) {
    return *kind;
  }
  throw ConfigError("--params.rule", "unknown rule kind");
}

int cmd_verify(const std::string& trace_path, const std::string& check, const std::string& raw) {
  const json params = parse_params(raw);
  const auto trace = read_trace_csv(trace_path);
  json out;
  if (check == "prop_3_1") {
    out = to_json(check_prop_3_1(trace, param_rule(params, RuleKind::Polyak), param(params, "L0"),
                                 param(params, "L1"), param(params, "f_star")));
  } else if (check == "distance_monotone") {
    DistanceCheckParams p{param_rule(params, RuleKind::Polyak), param(params, "f_star")};
    if (p.rule == RuleKind::InexactPolyak) {
      p.l_star = param(params, "l_star");
      p.horizon = static_cast<std::size_t>(param(params, "T"));
    }
    out = to_json(check_distance_monotone(trace, p));
  } else if (check == "rate_slope") {
    const double slope = fit_rate_slope(trace, param(params, "f_star"),
                                        static_cast<std::size_t>(param(params, "t_begin")),
                                        static_cast<std::size_t>(param(params, "t_end")));
    out["check_name"] = "rate_slope";
    out["slope"] = slope;
  } else {
    throw ConfigError("--check", "expected prop_3_1, distance_monotone or rate_slope");
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyak-family and clipped gradient methods: experiments, grids, certificates"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  auto* run_cmd = app.add_subcommand("run", "Run every configured experiment");
  run_cmd->add_option("config", run_config, "Experiment JSON")->required();
  run_cmd->add_option("--out", run_out, "Output directory")->required();

  std::string grid_config, grid_out;
  auto* grid_cmd = app.add_subcommand("grid", "Grid-search rule hyperparameters");
  grid_cmd->add_option("grid", grid_config, "Grid JSON")->required();
  grid_cmd->add_option("--out", grid_out, "Output directory")->required();

  std::string verify_trace, verify_check, verify_params;
  auto* verify_cmd = app.add_subcommand("verify", "Check a proof inequality on a trace CSV");
  verify_cmd->add_option("trace", verify_trace, "Trace CSV")->required();
  verify_cmd->add_option("--check", verify_check, "prop_3_1 | distance_monotone | rate_slope")
      ->required();
  verify_cmd->add_option("--params", verify_params, "Check parameters as JSON, or @file");

  std::string plot_report, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render convergence curves from a report");
  plot_cmd->add_option("report", plot_report, "report.json")->required();
  plot_cmd->add_option("--out", plot_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run_cmd) {
      const json report = run_experiment(load_experiment(run_config), run_out);
      std::size_t n_diverged = 0;
      for (const json& r : report["runs"]) {
        const auto status = parse_run_status(r["status"].get<std::string>());
        if (status && diverged(*status)) ++n_diverged;
      }
      std::cerr << fmt::format("{} runs, {} diverged; report at {}/report.json\n",
                               report["runs"].size(), n_diverged, run_out);
    } else if (*grid_cmd) {
      const GridResult result = run_grid(load_grid(grid_config), grid_out);
      std::cout << grid_selection_json(result).dump(2) << '\n';
    } else if (*verify_cmd) {
      return cmd_verify(verify_trace, verify_check, verify_params);
    } else if (*plot_cmd) {
      emit_plot(plot_report, plot_out);
    }
  } catch (const AllDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAllDiverged;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
