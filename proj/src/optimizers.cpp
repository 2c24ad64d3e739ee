#include "polyfree/optimizers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

namespace polyfree {
namespace {

constexpr std::array<std::pair<RuleKind, std::string_view>, 7> kRuleNames{{
    {RuleKind::GradientDescent, "gd"},
    {RuleKind::ClippedGradientDescent, "clipped_gd"},
    {RuleKind::Polyak, "polyak"},
    {RuleKind::NaiveLowerBound, "naive_lower_bound"},
    {RuleKind::DecSps, "decsps"},
    {RuleKind::AdaSps, "adasps"},
    {RuleKind::InexactPolyak, "inexact_polyak"},
}};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Numerator f - floor of the Polyak-family rules. Values a few ulp under the
// floor are rounding noise and count as zero.
double excess_over_floor(double f_val, double floor) {
  const double excess = f_val - floor;
  if (excess >= 0.0) return excess;
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(floor));
  if (excess >= -slack) return 0.0;
  throw std::invalid_argument(
      fmt::format("loss {} lies below the rule's floor {}", f_val, floor));
}

double ratio_or_throw(double excess, double grad_norm_sq) {
  if (grad_norm_sq > 0.0) return excess / grad_norm_sq;
  if (excess > 0.0) throw StationaryGradient();
  return 0.0;
}

void require_positive(double v, std::string_view name) {
  if (!(v > 0.0) || std::isnan(v)) {
    throw std::invalid_argument(fmt::format("{} must be > 0, got {}", name, v));
  }
}

void require_positive_finite(double v, std::string_view name) {
  require_positive(v, name);
  if (!std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be finite", name));
}

void require_finite(double v, std::string_view name) {
  if (!std::isfinite(v)) throw std::invalid_argument(fmt::format("{} must be finite, got {}", name, v));
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  for (const auto& [k, name] : kRuleNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<RuleKind> parse_rule_kind(std::string_view name) {
  for (const auto& [k, n] : kRuleNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

double gd_step(double lr) { return lr; }

double clipped_step(double lr, double clip, double grad_norm) {
  if (grad_norm <= clip) return lr;
  return lr * (clip / grad_norm);
}

double polyak_step(double f_val, double f_star, double grad_norm_sq) {
  return ratio_or_throw(excess_over_floor(f_val, f_star), grad_norm_sq);
}

double naive_lower_bound_step(double f_val, double l_star, double grad_norm_sq) {
  return ratio_or_throw(excess_over_floor(f_val, l_star), grad_norm_sq);
}

double decsps_step(double f_val, double l_star, double grad_norm_sq, std::size_t t, double c0,
                   double eta_max, DecSpsState& state) {
  const double ratio = ratio_or_throw(excess_over_floor(f_val, l_star), grad_norm_sq);
  const double c_prev = t == 0 ? c0 : c0 * std::sqrt(static_cast<double>(t));
  const double c_t = c0 * std::sqrt(static_cast<double>(t) + 1.0);
  const double carried = c_prev * state.prev_eta.value_or(eta_max);
  const double eta = std::min(ratio, carried) / c_t;
  state.prev_eta = eta;
  return eta;
}

double adasps_step(double f_val, double l_star, double grad_norm_sq, AdaSpsState& state) {
  const double excess = excess_over_floor(f_val, l_star);
  state.loss_sum += excess;
  if (grad_norm_sq == 0.0) return ratio_or_throw(excess, grad_norm_sq);
  if (state.loss_sum == 0.0) {
    throw std::domain_error("AdaSPS accumulator is zero with a nonzero gradient");
  }
  return excess / (grad_norm_sq * std::sqrt(state.loss_sum));
}

double inexact_polyak_step(double f_val, double l_star, double grad_norm_sq, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("inexact Polyak horizon must be >= 1");
  const double excess = excess_over_floor(f_val, l_star);
  if (grad_norm_sq == 0.0) return ratio_or_throw(excess, grad_norm_sq);
  return excess / (std::sqrt(static_cast<double>(horizon)) * grad_norm_sq);
}

StepsizeRule::StepsizeRule(RuleParams params) : params_(std::move(params)) {
  std::visit(Overloaded{
                 [](const GradientDescent& p) { require_positive_finite(p.lr, "lr"); },
                 [](const ClippedGradientDescent& p) {
                   require_positive_finite(p.lr, "lr");
                   require_positive(p.clip, "clip");
                 },
                 [](const PolyakStep& p) { require_finite(p.f_star, "f_star"); },
                 [](const NaiveLowerBound& p) { require_finite(p.l_star, "l_star"); },
                 [](const DecSps& p) {
                   require_finite(p.l_star, "l_star");
                   require_positive_finite(p.c0, "c0");
                   require_positive_finite(p.eta_max, "eta_max");
                 },
                 [](const AdaSps& p) { require_finite(p.l_star, "l_star"); },
                 [](const InexactPolyak& p) {
                   require_finite(p.l_star, "l_star");
                   if (p.horizon == 0) throw std::invalid_argument("horizon must be >= 1");
                 },
             },
             params_);
}

RuleKind StepsizeRule::kind() const {
  return std::visit(Overloaded{
                        [](const GradientDescent&) { return RuleKind::GradientDescent; },
                        [](const ClippedGradientDescent&) { return RuleKind::ClippedGradientDescent; },
                        [](const PolyakStep&) { return RuleKind::Polyak; },
                        [](const NaiveLowerBound&) { return RuleKind::NaiveLowerBound; },
                        [](const DecSps&) { return RuleKind::DecSps; },
                        [](const AdaSps&) { return RuleKind::AdaSps; },
                        [](const InexactPolyak&) { return RuleKind::InexactPolyak; },
                    },
                    params_);
}

std::optional<double> StepsizeRule::floor() const {
  return std::visit(Overloaded{
                        [](const GradientDescent&) -> std::optional<double> { return std::nullopt; },
                        [](const ClippedGradientDescent&) -> std::optional<double> {
                          return std::nullopt;
                        },
                        [](const PolyakStep& p) -> std::optional<double> { return p.f_star; },
                        [](const auto& p) -> std::optional<double> { return p.l_star; },
                    },
                    params_);
}

double StepsizeRule::next(double f_val, double grad_norm_sq, std::size_t t) {
  return std::visit(
      Overloaded{
          [](const GradientDescent& p) { return gd_step(p.lr); },
          [&](const ClippedGradientDescent& p) {
            return clipped_step(p.lr, p.clip, std::sqrt(grad_norm_sq));
          },
          [&](const PolyakStep& p) { return polyak_step(f_val, p.f_star, grad_norm_sq); },
          [&](const NaiveLowerBound& p) {
            return naive_lower_bound_step(f_val, p.l_star, grad_norm_sq);
          },
          [&](const DecSps& p) {
            return decsps_step(f_val, p.l_star, grad_norm_sq, t, p.c0, p.eta_max, decsps_);
          },
          [&](const AdaSps& p) { return adasps_step(f_val, p.l_star, grad_norm_sq, adasps_); },
          [&](const InexactPolyak& p) {
            return inexact_polyak_step(f_val, p.l_star, grad_norm_sq, p.horizon);
          },
      },
      params_);
}

void StepsizeRule::reset() {
  decsps_ = {};
  adasps_ = {};
}

std::string StepsizeRule::describe() const {
  return std::visit(
      Overloaded{
          [](const GradientDescent& p) { return fmt::format("gd(lr={})", p.lr); },
          [](const ClippedGradientDescent& p) {
            return fmt::format("clipped_gd(lr={}, clip={})", p.lr, p.clip);
          },
          [](const PolyakStep& p) { return fmt::format("polyak(f_star={})", p.f_star); },
          [](const NaiveLowerBound& p) {
            return fmt::format("naive_lower_bound(l_star={})", p.l_star);
          },
          [](const DecSps& p) {
            return fmt::format("decsps(l_star={}, c0={}, eta_max={})", p.l_star, p.c0, p.eta_max);
          },
          [](const AdaSps& p) { return fmt::format("adasps(l_star={})", p.l_star); },
          [](const InexactPolyak& p) {
            return fmt::format("inexact_polyak(l_star={}, T={})", p.l_star, p.horizon);
          },
      },
      params_);
}

}  // namespace polyfree
