#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace polyfree {

using Vector = std::vector<double>;

struct Optimum {
  Vector x;
  double f;
};

/// Smoothness constants of an objective. `L` is the global gradient-Lipschitz
/// constant (or the constant over a stated box when none exists globally);
/// `L0`, `L1` are the (L0, L1)-smoothness constants.
struct Smoothness {
  double L;
  double L0;
  double L1;
};

/// A convex, lower-bounded function with a gradient oracle.
///
/// Implementations must be pure: bitwise-equal inputs give bitwise-equal
/// outputs, and evaluation is safe from several threads at once.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  /// Writes the gradient into `out`, which must have length dim().
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;

  virtual std::optional<Optimum> optimum() const { return std::nullopt; }
  virtual std::optional<Smoothness> smoothness() const { return std::nullopt; }

  Vector gradient(std::span<const double> x) const {
    Vector g(dim());
    gradient(x, g);
    return g;
  }
};

double squared_norm(std::span<const double> v);
double norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);

struct IterateRecord {
  std::size_t t = 0;
  double f_val = 0.0;
  double grad_norm = 0.0;
  double stepsize = 0.0;
  std::optional<double> dist_to_opt_sq;
};

enum class RunStatus { Completed, DivergedNonFinite, DivergedBound, StationaryStop };

std::string_view to_string(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view name);

inline bool diverged(RunStatus status) {
  return status == RunStatus::DivergedNonFinite || status == RunStatus::DivergedBound;
}

struct RunResult {
  std::vector<IterateRecord> trace;
  std::size_t best_index = 0;
  double best_f = 0.0;
  Vector best_x;
  RunStatus status = RunStatus::Completed;

  double final_f() const { return trace.back().f_val; }
};

inline constexpr double kDefaultDivergenceBound = 1e30;
inline constexpr double kDefaultStationarityThreshold = 1e-14;

struct RunOptions {
  double divergence_bound = kDefaultDivergenceBound;
  double stationarity_threshold = kDefaultStationarityThreshold;
};

class StepsizeRule;

/// Runs `iterations` steps of x_{t+1} = x_t - eta_t * grad f(x_t), with eta_t
/// from `rule`, starting at `x0`.
///
/// The rule is taken by value: stateful rules start fresh for every run.
/// Throws std::invalid_argument if `x0` has the wrong length or
/// `iterations` is zero.
RunResult run(const Objective& objective, StepsizeRule rule, std::span<const double> x0,
              std::size_t iterations, const RunOptions& options = {});

}  // namespace polyfree
