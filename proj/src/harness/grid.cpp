#include "polyfree/harness/grid.hpp"

#include <sstream>

#include <fmt/format.h>

#include "polyfree/harness/experiment.hpp"
#include "polyfree/harness/io.hpp"

namespace polyfree::harness {

using nlohmann::json;

namespace {

std::vector<std::size_t> unravel(std::size_t flat, const std::vector<GridAxis>& axes) {
  std::vector<std::size_t> idx(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    idx[a] = flat % axes[a].values.size();
    flat /= axes[a].values.size();
  }
  return idx;
}

}  // namespace

GridResult evaluate_grid(const GridSpec& grid, std::size_t workers) {
  GridResult result;
  for (const GridAxis& a : grid.axes) result.axis_names.push_back(a.name);
  const std::size_t n = grid.cell_count();
  result.cells.resize(n);

  // Patch and validate every cell up front so config errors surface before
  // any run starts.
  std::vector<RunConfig> configs;
  configs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    GridCell& cell = result.cells[i];
    cell.indices = unravel(i, grid.axes);
    json node = grid.base_json;
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const double v = grid.axes[a].values[cell.indices[a]];
      cell.values.push_back(v);
      node["rule"][grid.axes[a].name] = number_to_json(v);
    }
    configs.push_back(parse_run(node, grid.default_iterations, fmt::format("cell[{}]", i)));
  }

  parallel_for(n, workers, [&](std::size_t i) {
    const RunResult r = execute_run(configs[i]).result;
    GridCell& cell = result.cells[i];
    cell.status = r.status;
    cell.best_f = r.best_f;
    cell.best_index = r.best_index;
    cell.final_f = r.final_f();
  });
  return result;
}

std::size_t select_cell(const std::vector<GridCell>& cells) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (diverged(cells[i].status)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const GridCell& a = cells[i];
    const GridCell& b = cells[*best];
    if (a.best_f < b.best_f || (a.best_f == b.best_f && a.values < b.values)) best = i;
  }
  if (!best) throw AllDiverged();
  return *best;
}

GridResult grid_search(const GridSpec& grid, std::size_t workers) {
  GridResult result = evaluate_grid(grid, workers);
  result.selected = select_cell(result.cells);
  return result;
}

std::string grid_table_csv(const GridResult& result) {
  std::ostringstream out;
  for (const std::string& name : result.axis_names) out << name << ',';
  out << "status,best_f,best_index,final_f\n";
  for (const GridCell& cell : result.cells) {
    for (double v : cell.values) out << format_double(v) << ',';
    out << to_string(cell.status) << ',' << format_double(cell.best_f) << ',' << cell.best_index
        << ',' << format_double(cell.final_f) << '\n';
  }
  return out.str();
}

json grid_selection_json(const GridResult& result) {
  const GridCell& cell = result.selected_cell();
  json selected = json::object();
  for (std::size_t a = 0; a < result.axis_names.size(); ++a) {
    selected[result.axis_names[a]] = number_to_json(cell.values[a]);
  }
  std::size_t n_diverged = 0;
  for (const GridCell& c : result.cells) n_diverged += diverged(c.status) ? 1 : 0;
  json j;
  j["selected"] = selected;
  j["cell_index"] = result.selected;
  j["best_f"] = cell.best_f;
  j["best_index"] = cell.best_index;
  j["status"] = std::string(to_string(cell.status));
  j["n_cells"] = result.cells.size();
  j["n_diverged"] = n_diverged;
  return j;
}

GridResult run_grid(const GridSpec& grid, const std::filesystem::path& out_dir) {
  GridResult result = evaluate_grid(grid, worker_count(grid.workers));
  write_text_file(out_dir / "grid_table.csv", grid_table_csv(result));
  result.selected = select_cell(result.cells);
  write_text_file(out_dir / "grid_selection.json", grid_selection_json(result).dump(2) + "\n");
  return result;
}

}  // namespace polyfree::harness
