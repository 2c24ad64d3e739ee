#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyfree/core.hpp"
#include "polyfree/optimizers.hpp"

namespace polyfree {

/// Where a check found its worst slack: an iteration index or a sample point.
struct Witness {
  std::optional<std::size_t> t;
  Vector x;
};

/// Outcome of checking one inequality over a set of points or trace records.
/// `worst_margin` is the smallest slack seen (negative means the inequality
/// failed there); `witness` is set iff n_violations > 0.
struct CheckReport {
  std::string check_name;
  std::size_t n_points = 0;
  std::size_t n_violations = 0;
  double worst_margin = 0.0;
  std::optional<Witness> witness;

  bool passed() const { return n_violations == 0; }
};

// Point-wise certificates. `samples` holds points of the objective's dimension.

/// |grad f|^2 / (2L) <= f - f*, for an L-smooth objective with known optimum.
CheckReport check_lemma_a1(const Objective& objective, std::span<const Vector> samples);

/// |grad f|^2 / (2 (L0 + L1 |grad f|)) <= f - f*, for an (L0, L1)-smooth
/// objective with known optimum.
CheckReport check_lemma_a2(const Objective& objective, std::span<const Vector> samples);

/// |f''(x)| <= (L1/2) |f'(x)| + L0/2 for the 1-D quartic at each x.
CheckReport check_hessian_certificate(double L0, double L1, std::span<const double> xs);

// Trace certificates.

/// Polyak stepsize lower bound eta_t >= min{1/(4 L0), 1/(4 L1 |grad f(x_t)|)}.
/// Throws std::invalid_argument unless `rule` is Polyak. Records at a
/// stationary point, or whose loss is indistinguishable from f*, carry no
/// defined stepsize and are skipped.
CheckReport check_prop_3_1(std::span<const IterateRecord> trace, RuleKind rule, double L0,
                           double L1, double f_star);

struct DistanceCheckParams {
  RuleKind rule;
  double f_star;
  /// Only used for InexactPolyak: sigma^2 = f* - l*.
  double l_star = 0.0;
  /// Only used for InexactPolyak: the horizon T of the run.
  std::size_t horizon = 1;
};

/// |x_{t+1} - x*|^2 <= |x_t - x*|^2 between consecutive records. For
/// InexactPolyak only records with f(x_t) - f* >= sigma^2 / sqrt(T) are
/// checked; every other rule is checked on all records. Throws
/// std::invalid_argument if a record lacks dist_to_opt_sq.
CheckReport check_distance_monotone(std::span<const IterateRecord> trace,
                                    const DistanceCheckParams& params);

/// Least-squares slope of log(f_best(t) - f*) against log t over
/// t in [t_begin, t_end], where f_best is the running minimum of f_val.
/// Throws std::domain_error if f_best(t) <= f* inside the window and
/// std::invalid_argument for an empty or out-of-range window (t_begin >= 1).
double fit_rate_slope(std::span<const IterateRecord> trace, double f_star, std::size_t t_begin,
                      std::size_t t_end);

/// Same fit for a sequence of gaps, gaps[t] = f_best(t) - f*.
double fit_rate_slope(std::span<const double> gaps, std::size_t t_begin, std::size_t t_end);

struct EnvelopeParams {
  double L0;
  double L1;
  double L;
  double dist0_sq;
  double sigma_sq;
  std::size_t horizon;
};

/// Upper bound on f(x_best) - f* after T inexact-Polyak steps:
/// (8 L0 D^2 + 2 s^2)/sqrt(T) + 128 L1^2 L D^4 / T + 8 L1^2 s^4 L / (L0^2 T),
/// with D^2 = |x0 - x*|^2 and s^2 = f* - l*.
double inexact_polyak_envelope(const EnvelopeParams& p);

/// f_best - f* <= inexact_polyak_envelope(p) for a finished run.
CheckReport check_inexact_polyak_envelope(const RunResult& result, double f_star,
                                          const EnvelopeParams& p);

}  // namespace polyfree
