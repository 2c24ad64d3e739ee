#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyfree/core.hpp"
#include "polyfree/harness/config.hpp"

namespace polyfree::harness {

class AllDiverged : public std::runtime_error {
 public:
  AllDiverged() : std::runtime_error("every grid cell diverged") {}
};

struct GridCell {
  /// One index per axis, into GridAxis::values.
  std::vector<std::size_t> indices;
  std::vector<double> values;
  RunStatus status = RunStatus::Completed;
  double best_f = 0.0;
  std::size_t best_index = 0;
  double final_f = 0.0;
};

struct GridResult {
  std::vector<std::string> axis_names;
  /// Row-major over the axes (last axis fastest), independent of the order
  /// cells finished in.
  std::vector<GridCell> cells;
  std::size_t selected = 0;

  const GridCell& selected_cell() const { return cells[selected]; }
};

/// Runs every cell; `selected` is left at 0.
GridResult evaluate_grid(const GridSpec& grid, std::size_t workers);

/// evaluate_grid followed by select_cell.
GridResult grid_search(const GridSpec& grid, std::size_t workers);

/// Index of the cell with the lowest best_f among non-diverged cells. Ties go
/// to the smaller value on the first axis, then the second, and so on.
/// Throws AllDiverged when every cell diverged.
std::size_t select_cell(const std::vector<GridCell>& cells);

std::string grid_table_csv(const GridResult& result);
nlohmann::json grid_selection_json(const GridResult& result);

/// Runs the search and writes <out_dir>/grid_table.csv and
/// <out_dir>/grid_selection.json. On AllDiverged the table is written
/// before the exception propagates.
GridResult run_grid(const GridSpec& grid, const std::filesystem::path& out_dir);

}  // namespace polyfree::harness
