#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "polyfree/core.hpp"
#include "polyfree/harness/config.hpp"
#include "polyfree/verify.hpp"

namespace polyfree::harness {

inline constexpr std::string_view kReportSchema = "polyfree-report/1";

/// Worker count: `requested` if set, else $POLYFREE_WORKERS, else the number
/// of hardware threads (at least 1).
std::size_t worker_count(std::optional<std::size_t> requested = std::nullopt);

/// Calls body(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

struct RunOutcome {
  RunResult result;
  std::vector<CheckReport> checks;
};

/// Executes one configured run and the checks it lists.
RunOutcome execute_run(const RunConfig& config);

/// Runs every configured run (in parallel, results ordered by config index),
/// writes <out_dir>/traces/<label>.csv and <out_dir>/report.json, and
/// returns the report.
nlohmann::json run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// The report entry for one run; `trace_csv` is the trace path relative to
/// the report.
nlohmann::json report_entry(const RunConfig& config, const RunOutcome& outcome,
                            const std::string& trace_csv);

}  // namespace polyfree::harness
