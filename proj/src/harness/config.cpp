#include "polyfree/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "polyfree/objectives.hpp"

namespace polyfree::harness {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

void reject_unknown(const json& node, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& item : node.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(join(path, item.key()), "unknown field");
    }
  }
}

const json& require(const json& node, std::string_view key, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(field, "expected a number");
}

double number_or(const json& node, std::string_view key, double fallback,
                 const std::string& path) {
  auto it = node.find(key);
  return it == node.end() ? fallback : as_number(*it, join(path, key));
}

std::size_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(field, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

void require_finite(double v, const std::string& field) {
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
}

void require_positive_finite(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(field, fmt::format("must be a finite value > 0, got {}", v));
  }
}

ObjectiveSpec parse_objective(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  ObjectiveSpec spec;
  const json& kind = require(node, "kind", path);
  const std::string kind_name = kind.is_string() ? kind.get<std::string>() : "";
  if (node.contains("dim")) spec.dim = as_count(node["dim"], join(path, "dim"));
  if (spec.dim == 0) throw ConfigError(join(path, "dim"), "must be >= 1");
  spec.f_star = number_or(node, "f_star", 0.0, path);
  require_finite(spec.f_star, join(path, "f_star"));

  if (kind_name == "quartic") {
    reject_unknown(node, path, {"kind", "dim", "f_star", "L0", "L1", "box_radius"});
    spec.kind = ObjectiveKind::Quartic;
    spec.L0 = as_number(require(node, "L0", path), join(path, "L0"));
    spec.L1 = as_number(require(node, "L1", path), join(path, "L1"));
    require_positive_finite(spec.L0, join(path, "L0"));
    // L1 = 0 degenerates to a quadratic and voids the (L0, L1) certificates.
    require_positive_finite(spec.L1, join(path, "L1"));
    if (node.contains("box_radius")) {
      spec.box_radius = as_number(node["box_radius"], join(path, "box_radius"));
      require_positive_finite(*spec.box_radius, join(path, "box_radius"));
    }
  } else if (kind_name == "quadratic") {
    reject_unknown(node, path, {"kind", "dim", "f_star", "curvature"});
    spec.kind = ObjectiveKind::Quadratic;
    spec.curvature = as_number(require(node, "curvature", path), join(path, "curvature"));
    require_positive_finite(spec.curvature, join(path, "curvature"));
  } else {
    throw ConfigError(join(path, "kind"), "expected \"quartic\" or \"quadratic\"");
  }
  return spec;
}

RuleParams parse_rule(const json& node, const ObjectiveSpec& objective, std::size_t iterations,
                      const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  const json& kind = require(node, "kind", path);
  const auto rule_kind = kind.is_string() ? parse_rule_kind(kind.get<std::string>()) : std::nullopt;
  if (!rule_kind) throw ConfigError(join(path, "kind"), "unknown rule kind");

  auto l_star = [&] {
    const double v = as_number(require(node, "l_star", path), join(path, "l_star"));
    require_finite(v, join(path, "l_star"));
    if (v > objective.f_star) {
      throw ConfigError(join(path, "l_star"),
                        fmt::format("lower bound {} exceeds the objective's f_star {}", v,
                                    objective.f_star));
    }
    return v;
  };

  switch (*rule_kind) {
    case RuleKind::GradientDescent: {
      reject_unknown(node, path, {"kind", "lr"});
      const double lr = as_number(require(node, "lr", path), join(path, "lr"));
      require_positive_finite(lr, join(path, "lr"));
      return GradientDescent{lr};
    }
    case RuleKind::ClippedGradientDescent: {
      reject_unknown(node, path, {"kind", "lr", "clip"});
      const double lr = as_number(require(node, "lr", path), join(path, "lr"));
      require_positive_finite(lr, join(path, "lr"));
      const double clip = as_number(require(node, "clip", path), join(path, "clip"));
      if (!(clip > 0.0)) throw ConfigError(join(path, "clip"), "must be > 0 or \"inf\"");
      return ClippedGradientDescent{lr, clip};
    }
    case RuleKind::Polyak: {
      reject_unknown(node, path, {"kind", "f_star"});
      const double f_star = number_or(node, "f_star", objective.f_star, path);
      require_finite(f_star, join(path, "f_star"));
      return PolyakStep{f_star};
    }
    case RuleKind::NaiveLowerBound:
      reject_unknown(node, path, {"kind", "l_star"});
      return NaiveLowerBound{l_star()};
    case RuleKind::DecSps: {
      reject_unknown(node, path, {"kind", "l_star", "c0", "eta_max"});
      DecSps p{l_star()};
      p.c0 = number_or(node, "c0", p.c0, path);
      p.eta_max = number_or(node, "eta_max", p.eta_max, path);
      require_positive_finite(p.c0, join(path, "c0"));
      require_positive_finite(p.eta_max, join(path, "eta_max"));
      return p;
    }
    case RuleKind::AdaSps:
      reject_unknown(node, path, {"kind", "l_star"});
      return AdaSps{l_star()};
    case RuleKind::InexactPolyak:
      reject_unknown(node, path, {"kind", "l_star"});
      return InexactPolyak{l_star(), iterations};
  }
  throw ConfigError(join(path, "kind"), "unknown rule kind");
}

VerifyCheck parse_check(const json& v, const std::string& field) {
  static constexpr VerifyCheck kAll[] = {VerifyCheck::LemmaA1, VerifyCheck::LemmaA2,
                                         VerifyCheck::HessianCertificate, VerifyCheck::Prop31,
                                         VerifyCheck::DistanceMonotone, VerifyCheck::Envelope};
  if (v.is_string()) {
    for (VerifyCheck c : kAll) {
      if (to_string(c) == v.get<std::string>()) return c;
    }
  }
  throw ConfigError(field, "unknown check name");
}

bool label_is_safe(const std::string& label) {
  return !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }) && label != "." && label != "..";
}

}  // namespace

std::string_view to_string(VerifyCheck check) {
  switch (check) {
    case VerifyCheck::LemmaA1:
      return "lemma_a1";
    case VerifyCheck::LemmaA2:
      return "lemma_a2";
    case VerifyCheck::HessianCertificate:
      return "hessian_certificate";
    case VerifyCheck::Prop31:
      return "prop_3_1";
    case VerifyCheck::DistanceMonotone:
      return "distance_monotone";
    case VerifyCheck::Envelope:
      return "envelope";
  }
  return "unknown";
}

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::Quartic:
      return std::make_unique<QuarticSynthetic>(spec.L0, spec.L1, spec.f_star, spec.dim,
                                                spec.box_radius.value_or(1.0));
    case ObjectiveKind::Quadratic:
      return std::make_unique<Quadratic>(Quadratic::isotropic(spec.dim, spec.curvature, spec.f_star));
  }
  throw std::logic_error("unhandled objective kind");
}

RunConfig parse_run(const json& node, std::size_t default_iterations, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown(node, path,
                 {"label", "objective", "x0", "rule", "T", "divergence_bound",
                  "stationarity_threshold", "verify"});
  RunConfig run;
  const json& label = require(node, "label", path);
  if (!label.is_string() || !label_is_safe(label.get<std::string>())) {
    throw ConfigError(join(path, "label"), "must be a non-empty string of [A-Za-z0-9_.-]");
  }
  run.label = label.get<std::string>();

  run.objective = parse_objective(require(node, "objective", path), join(path, "objective"));

  const json& x0 = require(node, "x0", path);
  const std::string x0_path = join(path, "x0");
  if (x0.is_number()) {
    run.x0.assign(run.objective.dim, x0.get<double>());
  } else if (x0.is_array()) {
    for (std::size_t i = 0; i < x0.size(); ++i) {
      run.x0.push_back(as_number(x0[i], fmt::format("{}[{}]", x0_path, i)));
    }
  } else {
    throw ConfigError(x0_path, "expected a number or an array");
  }
  if (run.x0.size() != run.objective.dim) {
    throw ConfigError(x0_path, fmt::format("has length {}, objective dim is {}", run.x0.size(),
                                           run.objective.dim));
  }
  for (double v : run.x0) require_finite(v, x0_path);
  if (run.objective.kind == ObjectiveKind::Quartic && !run.objective.box_radius) {
    double r = 0.0;
    for (double v : run.x0) r = std::max(r, std::abs(v));
    run.objective.box_radius = r > 0.0 ? r : 1.0;
  }

  run.iterations = default_iterations;
  if (node.contains("T")) run.iterations = as_count(node["T"], join(path, "T"));
  if (run.iterations == 0) throw ConfigError(join(path, "T"), "must be >= 1");

  run.rule = parse_rule(require(node, "rule", path), run.objective, run.iterations,
                        join(path, "rule"));

  run.options.divergence_bound =
      number_or(node, "divergence_bound", kDefaultDivergenceBound, path);
  run.options.stationarity_threshold =
      number_or(node, "stationarity_threshold", kDefaultStationarityThreshold, path);
  require_positive_finite(run.options.divergence_bound, join(path, "divergence_bound"));
  if (!(run.options.stationarity_threshold >= 0.0) ||
      !std::isfinite(run.options.stationarity_threshold)) {
    throw ConfigError(join(path, "stationarity_threshold"), "must be a finite value >= 0");
  }

  if (node.contains("verify")) {
    const json& checks = node["verify"];
    const std::string vpath = join(path, "verify");
    if (!checks.is_array()) throw ConfigError(vpath, "expected an array of check names");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const std::string field = fmt::format("{}[{}]", vpath, i);
      const VerifyCheck c = parse_check(checks[i], field);
      const RuleKind kind = StepsizeRule(run.rule).kind();
      if (c == VerifyCheck::HessianCertificate && run.objective.kind != ObjectiveKind::Quartic) {
        throw ConfigError(field, "hessian_certificate needs a quartic objective");
      }
      if (c == VerifyCheck::Prop31 && kind != RuleKind::Polyak) {
        throw ConfigError(field, "prop_3_1 applies to polyak runs only");
      }
      if (c == VerifyCheck::Envelope && kind != RuleKind::InexactPolyak) {
        throw ConfigError(field, "envelope applies to inexact_polyak runs only");
      }
      if (c == VerifyCheck::Envelope && run.objective.kind != ObjectiveKind::Quartic) {
        throw ConfigError(field, "envelope needs a quartic objective");
      }
      run.verify.push_back(c);
    }
  }
  return run;
}

ExperimentConfig parse_experiment(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "experiment file must be a JSON object");
  reject_unknown(doc, "", {"T", "workers", "runs", "description"});
  ExperimentConfig config;
  std::size_t horizon = kDefaultHorizon;
  if (doc.contains("T")) horizon = as_count(doc["T"], "T");
  if (horizon == 0) throw ConfigError("T", "must be >= 1");
  if (doc.contains("workers")) config.workers = as_count(doc["workers"], "workers");

  const json& runs = require(doc, "runs", "");
  if (!runs.is_array()) throw ConfigError("runs", "expected an array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = fmt::format("runs[{}]", i);
    RunConfig run = parse_run(runs[i], horizon, path);
    if (!labels.insert(run.label).second) {
      throw ConfigError(path + ".label", fmt::format("duplicate label \"{}\"", run.label));
    }
    config.runs.push_back(std::move(run));
  }
  return config;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, fmt::format("invalid JSON: {}", e.what()));
  }
}

ExperimentConfig load_experiment(const std::string& path) {
  return parse_experiment(load_json_file(path));
}

std::size_t GridSpec::cell_count() const {
  std::size_t n = 1;
  for (const GridAxis& a : axes) n *= a.values.size();
  return n;
}

GridSpec parse_grid(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "grid file must be a JSON object");
  reject_unknown(doc, "", {"T", "workers", "base", "axes", "description"});
  GridSpec grid;
  if (doc.contains("T")) grid.default_iterations = as_count(doc["T"], "T");
  if (grid.default_iterations == 0) throw ConfigError("T", "must be >= 1");
  if (doc.contains("workers")) grid.workers = as_count(doc["workers"], "workers");
  grid.base_json = require(doc, "base", "");
  // Validates the base on its own; each cell is re-validated after patching.
  parse_run(grid.base_json, grid.default_iterations, "base");

  const json& axes = require(doc, "axes", "");
  if (!axes.is_array() || axes.empty()) throw ConfigError("axes", "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const std::string path = fmt::format("axes[{}]", i);
    if (!axes[i].is_object()) throw ConfigError(path, "expected an object");
    reject_unknown(axes[i], path, {"name", "values"});
    const json& name = require(axes[i], "name", path);
    if (!name.is_string() || name.get<std::string>() == "kind") {
      throw ConfigError(path + ".name", "expected a rule hyperparameter name");
    }
    GridAxis axis;
    axis.name = name.get<std::string>();
    if (!names.insert(axis.name).second) throw ConfigError(path + ".name", "duplicate axis");
    const json& values = require(axes[i], "values", path);
    if (!values.is_array() || values.empty()) {
      throw ConfigError(path + ".values", "expected a non-empty array");
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
      axis.values.push_back(as_number(values[j], fmt::format("{}.values[{}]", path, j)));
    }
    grid.axes.push_back(std::move(axis));
  }
  return grid;
}

GridSpec load_grid(const std::string& path) { return parse_grid(load_json_file(path)); }

json number_to_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

json to_json(const ObjectiveSpec& spec) {
  json j;
  if (spec.kind == ObjectiveKind::Quartic) {
    j["kind"] = "quartic";
    j["L0"] = spec.L0;
    j["L1"] = spec.L1;
    j["box_radius"] = spec.box_radius.value_or(1.0);
  } else {
    j["kind"] = "quadratic";
    j["curvature"] = spec.curvature;
  }
  j["f_star"] = spec.f_star;
  j["dim"] = spec.dim;
  return j;
}

json to_json(const RuleParams& rule) {
  json j;
  j["kind"] = std::string(to_string(StepsizeRule(rule).kind()));
  if (auto* p = std::get_if<GradientDescent>(&rule)) {
    j["lr"] = p->lr;
  } else if (auto* p = std::get_if<ClippedGradientDescent>(&rule)) {
    j["lr"] = p->lr;
    j["clip"] = number_to_json(p->clip);
  } else if (auto* p = std::get_if<PolyakStep>(&rule)) {
    j["f_star"] = p->f_star;
  } else if (auto* p = std::get_if<NaiveLowerBound>(&rule)) {
    j["l_star"] = p->l_star;
  } else if (auto* p = std::get_if<DecSps>(&rule)) {
    j["l_star"] = p->l_star;
    j["c0"] = p->c0;
    j["eta_max"] = p->eta_max;
  } else if (auto* p = std::get_if<AdaSps>(&rule)) {
    j["l_star"] = p->l_star;
  } else if (auto* p = std::get_if<InexactPolyak>(&rule)) {
    j["l_star"] = p->l_star;
    j["horizon"] = p->horizon;
  }
  return j;
}

}  // namespace polyfree::harness
