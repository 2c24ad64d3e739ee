#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyfree/core.hpp"
#include "polyfree/optimizers.hpp"

namespace polyfree::harness {

/// A config file failed validation. `field` is a JSON path such as
/// "runs[3].objective.L1".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline constexpr std::size_t kDefaultHorizon = 1000;

enum class ObjectiveKind { Quartic, Quadratic };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Quartic;
  std::size_t dim = 1;
  double f_star = 0.0;
  // quartic
  double L0 = 1.0;
  double L1 = 1.0;
  /// Defaults to max |x0_i| of the run.
  std::optional<double> box_radius;
  // quadratic (isotropic)
  double curvature = 1.0;
};

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec);

enum class VerifyCheck {
  LemmaA1,
  LemmaA2,
  HessianCertificate,
  Prop31,
  DistanceMonotone,
  Envelope,
};

std::string_view to_string(VerifyCheck check);

struct RunConfig {
  std::string label;
  ObjectiveSpec objective;
  Vector x0;
  /// For inexact_polyak the horizon always equals `iterations`.
  RuleParams rule;
  std::size_t iterations = kDefaultHorizon;
  RunOptions options;
  std::vector<VerifyCheck> verify;
};

struct ExperimentConfig {
  std::vector<RunConfig> runs;
  std::optional<std::size_t> workers;
};

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

struct GridSpec {
  /// The base run as written; axes overwrite fields of base_json["rule"].
  nlohmann::json base_json;
  std::size_t default_iterations = kDefaultHorizon;
  std::vector<GridAxis> axes;
  std::optional<std::size_t> workers;

  std::size_t cell_count() const;
};

/// Parse and validate an experiment file. Throws ConfigError.
ExperimentConfig parse_experiment(const nlohmann::json& doc);
ExperimentConfig load_experiment(const std::string& path);

/// Parse one entry of "runs". `path` prefixes field names in errors.
RunConfig parse_run(const nlohmann::json& node, std::size_t default_iterations,
                    const std::string& path);

GridSpec parse_grid(const nlohmann::json& doc);
GridSpec load_grid(const std::string& path);

nlohmann::json load_json_file(const std::string& path);

/// Canonical JSON echo of a spec, as written into reports.
nlohmann::json to_json(const ObjectiveSpec& spec);
nlohmann::json to_json(const RuleParams& rule);

/// Config numbers accept the string "inf" for +infinity.
nlohmann::json number_to_json(double v);

}  // namespace polyfree::harness
