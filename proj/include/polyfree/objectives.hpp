#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "polyfree/core.hpp"

namespace polyfree {

// The separable quartic  f(x) = sum_i (L0 L1^2 / 72) x_i^4 + (L0 / 4) x_i^2 + f*.
// It is convex and (L0, L1)-smooth with minimiser 0, but has no global L.

double quartic_value(double L0, double L1, double f_star, double x);
double quartic_gradient(double L0, double L1, double x);
double quartic_second_derivative(double L0, double L1, double x);

/// Gradient-Lipschitz constant of the quartic on [-R, R]^d:
/// L0/2 + (L0 L1^2 / 6) R^2.
double quartic_box_smoothness(double L0, double L1, double radius);

class QuarticSynthetic final : public Objective {
 public:
  /// `box_radius` fixes the region used to report a finite L. Throws
  /// std::invalid_argument unless L0 > 0, L1 > 0, dim >= 1, box_radius > 0.
  QuarticSynthetic(double L0, double L1, double f_star, std::size_t dim = 1,
                   double box_radius = 5.0);

  std::size_t dim() const override { return dim_; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  using Objective::gradient;
  std::optional<Optimum> optimum() const override;
  std::optional<Smoothness> smoothness() const override;

  double L0() const { return L0_; }
  double L1() const { return L1_; }
  double f_star() const { return f_star_; }
  double box_radius() const { return box_radius_; }

 private:
  double L0_;
  double L1_;
  double f_star_;
  std::size_t dim_;
  double box_radius_;
};

/// f(x) = 1/2 x^T A x - b^T x + c with A symmetric PSD, stored row-major.
/// The optimum and L are supplied by the caller, not computed.
class Quadratic final : public Objective {
 public:
  Quadratic(Vector a_row_major, Vector b, double constant, double L,
            std::optional<Optimum> optimum);

  /// (a/2) |x|^2 + f_star: minimiser 0, L = a.
  static Quadratic isotropic(std::size_t dim, double curvature, double f_star = 0.0);

  std::size_t dim() const override { return b_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  using Objective::gradient;
  std::optional<Optimum> optimum() const override { return optimum_; }
  std::optional<Smoothness> smoothness() const override;

 private:
  Vector a_;
  Vector b_;
  double constant_;
  double L_;
  std::optional<Optimum> optimum_;
};

/// Largest observed ratio |grad f(x) - grad f(y)| / |x - y| over the probes
/// y = x + r d, with d in {+-e_i, +-1/sqrt(d)} and r = radius k / n_probes,
/// k = 1..n_probes. A lower bound on the local gradient-Lipschitz constant.
///
/// Throws std::invalid_argument if radius <= 0, n_probes == 0, or radius
/// exceeds 1/L1 for an objective reporting L1 > 0.
double estimate_local_smoothness(const Objective& objective, std::span<const double> x,
                                 double radius, std::size_t n_probes);

}  // namespace polyfree
