#include "polyfree/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "polyfree/objectives.hpp"

namespace polyfree {
namespace {

constexpr double kRelTol = 1e-10;

// Accumulates slacks; a point violates when slack < -allowed.
class Tally {
 public:
  explicit Tally(std::string name) { report_.check_name = std::move(name); }

  void add(double slack, double allowed, Witness where) {
    ++report_.n_points;
    if (report_.n_points == 1 || slack < report_.worst_margin) {
      report_.worst_margin = slack;
      worst_ = std::move(where);
    }
    if (slack < -allowed) ++report_.n_violations;
  }

  CheckReport finish() && {
    if (report_.n_violations > 0) report_.witness = std::move(worst_);
    return std::move(report_);
  }

 private:
  CheckReport report_;
  Witness worst_;
};

Witness at_point(const Vector& x) { return Witness{std::nullopt, x}; }
Witness at_step(std::size_t t) { return Witness{t, {}}; }

std::pair<Optimum, Smoothness> require_constants(const Objective& objective,
                                                 std::string_view check) {
  auto opt = objective.optimum();
  auto smooth = objective.smoothness();
  if (!opt || !smooth) {
    throw std::invalid_argument(
        fmt::format("{} needs an objective with known optimum and smoothness", check));
  }
  return {*opt, *smooth};
}

// f - f* is only resolved to a few ulp of max(|f|, |f*|).
bool at_floor(double f_val, double f_star) {
  const double scale = std::max(1.0, std::max(std::abs(f_val), std::abs(f_star)));
  return f_val - f_star <= 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

CheckReport check_lemma_a1(const Objective& objective, std::span<const Vector> samples) {
  const auto [opt, smooth] = require_constants(objective, "lemma_a1");
  Tally tally("lemma_a1");
  for (const Vector& x : samples) {
    const double gap = objective.value(x) - opt.f;
    const double g2 = squared_norm(objective.gradient(x));
    tally.add(gap - g2 / (2.0 * smooth.L), kRelTol * std::max(1.0, std::abs(gap)), at_point(x));
  }
  return std::move(tally).finish();
}

CheckReport check_lemma_a2(const Objective& objective, std::span<const Vector> samples) {
  const auto [opt, smooth] = require_constants(objective, "lemma_a2");
  Tally tally("lemma_a2");
  for (const Vector& x : samples) {
    const double gap = objective.value(x) - opt.f;
    const Vector g = objective.gradient(x);
    const double gn = norm(g);
    const double lhs = gn * gn / (2.0 * (smooth.L0 + smooth.L1 * gn));
    tally.add(gap - lhs, kRelTol * std::max(1.0, std::abs(gap)), at_point(x));
  }
  return std::move(tally).finish();
}

CheckReport check_hessian_certificate(double L0, double L1, std::span<const double> xs) {
  Tally tally("hessian_certificate");
  for (double x : xs) {
    const double lhs = std::abs(quartic_second_derivative(L0, L1, x));
    const double rhs = (L1 / 2.0) * std::abs(quartic_gradient(L0, L1, x)) + L0 / 2.0;
    tally.add(rhs - lhs, 1e-12 * std::max(1.0, rhs), at_point(Vector{x}));
  }
  return std::move(tally).finish();
}

CheckReport check_prop_3_1(std::span<const IterateRecord> trace, RuleKind rule, double L0,
                           double L1, double f_star) {
  if (rule != RuleKind::Polyak) {
    throw std::invalid_argument(
        fmt::format("prop_3_1 applies to Polyak traces, not {}", to_string(rule)));
  }
  Tally tally("prop_3_1");
  for (const IterateRecord& r : trace) {
    if (r.grad_norm < kDefaultStationarityThreshold || at_floor(r.f_val, f_star)) continue;
    const double bound = std::min(1.0 / (4.0 * L0), 1.0 / (4.0 * L1 * r.grad_norm));
    tally.add(r.stepsize - bound, 1e-12, at_step(r.t));
  }
  return std::move(tally).finish();
}

CheckReport check_distance_monotone(std::span<const IterateRecord> trace,
                                    const DistanceCheckParams& params) {
  Tally tally("distance_monotone");
  double threshold = -std::numeric_limits<double>::infinity();
  if (params.rule == RuleKind::InexactPolyak) {
    if (params.horizon == 0) throw std::invalid_argument("horizon must be >= 1");
    threshold = (params.f_star - params.l_star) / std::sqrt(static_cast<double>(params.horizon));
  }
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const IterateRecord& cur = trace[i];
    const IterateRecord& nxt = trace[i + 1];
    if (!cur.dist_to_opt_sq || !nxt.dist_to_opt_sq) {
      throw std::invalid_argument("distance_monotone needs dist_to_opt_sq on every record");
    }
    if (cur.f_val - params.f_star < threshold) continue;
    const double d0 = *cur.dist_to_opt_sq;
    const double d1 = *nxt.dist_to_opt_sq;
    tally.add(d0 - d1, kRelTol * d0, at_step(cur.t));
  }
  return std::move(tally).finish();
}

double fit_rate_slope(std::span<const double> gaps, std::size_t t_begin, std::size_t t_end) {
  if (t_begin == 0 || t_end <= t_begin || t_end >= gaps.size()) {
    throw std::invalid_argument(fmt::format(
        "rate window [{}, {}] is invalid for {} points", t_begin, t_end, gaps.size()));
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(t_end - t_begin + 1);
  for (std::size_t t = t_begin; t <= t_end; ++t) {
    if (!(gaps[t] > 0.0)) {
      throw std::domain_error(fmt::format("f_best - f* = {} at t = {}; log undefined", gaps[t], t));
    }
    const double lx = std::log(static_cast<double>(t));
    const double ly = std::log(gaps[t]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double mx = sx / n;
  const double my = sy / n;
  return (sxy - n * mx * my) / (sxx - n * mx * mx);
}

double fit_rate_slope(std::span<const IterateRecord> trace, double f_star, std::size_t t_begin,
                      std::size_t t_end) {
  std::vector<double> gaps;
  gaps.reserve(trace.size());
  double best = std::numeric_limits<double>::infinity();
  for (const IterateRecord& r : trace) {
    best = std::min(best, r.f_val);
    gaps.push_back(best - f_star);
  }
  return fit_rate_slope(gaps, t_begin, t_end);
}

double inexact_polyak_envelope(const EnvelopeParams& p) {
  if (p.horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  const double T = static_cast<double>(p.horizon);
  const double d4 = p.dist0_sq * p.dist0_sq;
  const double s4 = p.sigma_sq * p.sigma_sq;
  return (8.0 * p.L0 * p.dist0_sq + 2.0 * p.sigma_sq) / std::sqrt(T) +
         128.0 * p.L1 * p.L1 * p.L * d4 / T + 8.0 * p.L1 * p.L1 * s4 * p.L / (p.L0 * p.L0 * T);
}

CheckReport check_inexact_polyak_envelope(const RunResult& result, double f_star,
                                          const EnvelopeParams& p) {
  Tally tally("inexact_polyak_envelope");
  const double bound = inexact_polyak_envelope(p);
  tally.add(bound - (result.best_f - f_star), kRelTol * std::max(1.0, bound),
            at_step(result.best_index));
  return std::move(tally).finish();
}

}  // namespace polyfree
