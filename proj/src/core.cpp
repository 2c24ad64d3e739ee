#include "polyfree/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "polyfree/optimizers.hpp"

namespace polyfree {

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed:
      return "Completed";
    case RunStatus::DivergedNonFinite:
      return "DivergedNonFinite";
    case RunStatus::DivergedBound:
      return "DivergedBound";
    case RunStatus::StationaryStop:
      return "StationaryStop";
  }
  return "Unknown";
}

std::optional<RunStatus> parse_run_status(std::string_view name) {
  for (auto s : {RunStatus::Completed, RunStatus::DivergedNonFinite, RunStatus::DivergedBound,
                 RunStatus::StationaryStop}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

}  // namespace

RunResult run(const Objective& objective, StepsizeRule rule, std::span<const double> x0,
              std::size_t iterations, const RunOptions& options) {
  if (x0.size() != objective.dim()) {
    throw std::invalid_argument(
        fmt::format("x0 has length {}, objective dimension is {}", x0.size(), objective.dim()));
  }
  if (iterations == 0) throw std::invalid_argument("iteration count must be >= 1");
  if (!all_finite(x0)) throw std::invalid_argument("x0 must be finite");

  rule.reset();
  const std::optional<Optimum> opt = objective.optimum();

  Vector x(x0.begin(), x0.end());
  Vector g(objective.dim());
  double f = objective.value(x);
  objective.gradient(x, g);
  if (!std::isfinite(f) || !all_finite(g)) {
    throw std::domain_error("objective is not finite at x0");
  }

  RunResult result;
  result.trace.reserve(iterations + 1);
  result.best_f = f;
  result.best_index = 0;
  result.best_x = x;

  auto make_record = [&](std::size_t t, double grad_norm, double stepsize) {
    IterateRecord r;
    r.t = t;
    r.f_val = f;
    r.grad_norm = grad_norm;
    r.stepsize = stepsize;
    if (opt) r.dist_to_opt_sq = squared_distance(x, opt->x);
    return r;
  };

  // x is a fixed point from step t on: replicate its record through t = T.
  auto stop_at_fixed_point = [&](std::size_t t, double grad_norm) {
    const IterateRecord rec = make_record(t, grad_norm, 0.0);
    for (std::size_t s = t; s <= iterations; ++s) {
      result.trace.push_back(rec);
      result.trace.back().t = s;
    }
    result.status = RunStatus::StationaryStop;
  };

  for (std::size_t t = 0; t < iterations; ++t) {
    const double grad_norm_sq = squared_norm(g);
    const double grad_norm = std::sqrt(grad_norm_sq);
    if (grad_norm < options.stationarity_threshold) {
      stop_at_fixed_point(t, grad_norm);
      return result;
    }
    const double eta = rule.next(f, grad_norm_sq, t);
    if (eta == 0.0) {
      stop_at_fixed_point(t, grad_norm);
      return result;
    }
    result.trace.push_back(make_record(t, grad_norm, eta));

    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * g[i];
    f = objective.value(x);
    objective.gradient(x, g);

    if (!std::isfinite(f) || !all_finite(g) || !all_finite(x)) {
      result.status = RunStatus::DivergedNonFinite;
      return result;
    }
    if (f > options.divergence_bound) {
      result.status = RunStatus::DivergedBound;
      return result;
    }
    if (f < result.best_f) {
      result.best_f = f;
      result.best_index = t + 1;
      result.best_x = x;
    }
  }

  // Final iterate: no step is taken, but record the stepsize the rule would
  // use next so every record carries one.
  const double grad_norm_sq = squared_norm(g);
  const double grad_norm = std::sqrt(grad_norm_sq);
  double eta = 0.0;
  if (grad_norm >= options.stationarity_threshold) {
    try {
      eta = rule.next(f, grad_norm_sq, iterations);
    } catch (const std::exception&) {
      eta = 0.0;
    }
  }
  result.trace.push_back(make_record(iterations, grad_norm, eta));
  result.status = RunStatus::Completed;
  return result;
}

}  // namespace polyfree
