#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

namespace polyfree {

/// Raised by the Polyak-family rules when the gradient vanishes while the
/// loss is still above its floor; the stepsize is undefined there.
class StationaryGradient : public std::domain_error {
 public:
  StationaryGradient() : std::domain_error("gradient is zero above the loss floor") {}
};

struct GradientDescent {
  double lr;
};

/// `clip` may be +infinity, which disables clipping.
struct ClippedGradientDescent {
  double lr;
  double clip;
};

struct PolyakStep {
  double f_star;
};

struct NaiveLowerBound {
  double l_star;
};

struct DecSps {
  double l_star;
  double c0 = 1.0;
  double eta_max = 10.0;
};

struct AdaSps {
  double l_star;
};

/// The horizon enters the stepsize as 1/sqrt(horizon); it should equal the
/// number of iterations the rule is run for.
struct InexactPolyak {
  double l_star;
  std::size_t horizon;
};

using RuleParams = std::variant<GradientDescent, ClippedGradientDescent, PolyakStep,
                                NaiveLowerBound, DecSps, AdaSps, InexactPolyak>;

enum class RuleKind {
  GradientDescent,
  ClippedGradientDescent,
  Polyak,
  NaiveLowerBound,
  DecSps,
  AdaSps,
  InexactPolyak,
};

std::string_view to_string(RuleKind kind);
std::optional<RuleKind> parse_rule_kind(std::string_view name);

// Per-step coefficients. Each returns eta_t >= 0; the iterate moves by
// -eta_t * grad f(x_t).

double gd_step(double lr);

/// lr * min{1, clip / grad_norm}; a zero gradient counts as unclipped.
double clipped_step(double lr, double clip, double grad_norm);

/// (f_val - f_star) / grad_norm_sq.
double polyak_step(double f_val, double f_star, double grad_norm_sq);

double naive_lower_bound_step(double f_val, double l_star, double grad_norm_sq);

struct DecSpsState {
  std::optional<double> prev_eta;
};

/// eta_t = min{(f - l*)/|g|^2, c_{t-1} eta_{t-1}} / c_t with c_t = c0 sqrt(t+1),
/// seeded by c_{-1} eta_{-1} = c0 * eta_max.
double decsps_step(double f_val, double l_star, double grad_norm_sq, std::size_t t, double c0,
                   double eta_max, DecSpsState& state);

struct AdaSpsState {
  double loss_sum = 0.0;
};

/// eta_t = (f - l*) / (|g|^2 sqrt(S_t)), S_t the running sum of f(x_s) - l*.
double adasps_step(double f_val, double l_star, double grad_norm_sq, AdaSpsState& state);

/// (f - l*) / (sqrt(horizon) |g|^2).
double inexact_polyak_step(double f_val, double l_star, double grad_norm_sq, std::size_t horizon);

/// A stepsize policy together with its per-run state.
class StepsizeRule {
 public:
  /// Throws std::invalid_argument on out-of-range hyperparameters.
  StepsizeRule(RuleParams params);  // NOLINT(google-explicit-constructor)

  /// Lets a single alternative (e.g. PolyakStep{f*}) convert in one step.
  template <class P>
    requires(!std::is_same_v<std::remove_cvref_t<P>, RuleParams> &&
             !std::is_same_v<std::remove_cvref_t<P>, StepsizeRule> &&
             std::is_constructible_v<RuleParams, P>)
  StepsizeRule(P&& params)  // NOLINT(google-explicit-constructor)
      : StepsizeRule(RuleParams(std::forward<P>(params))) {}

  RuleKind kind() const;
  const RuleParams& params() const { return params_; }

  /// The value the rule treats as the bottom of the loss: f* for Polyak, l*
  /// for the lower-bound rules, nothing for GD and clipped GD.
  std::optional<double> floor() const;

  /// Stepsize for iteration t. Advances internal state; call once per step,
  /// in order.
  double next(double f_val, double grad_norm_sq, std::size_t t);

  void reset();

  std::string describe() const;

 private:
  RuleParams params_;
  DecSpsState decsps_;
  AdaSpsState adasps_;
};

}  // namespace polyfree
