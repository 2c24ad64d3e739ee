#include "polyfree/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace polyfree {

double quartic_value(double L0, double L1, double f_star, double x) {
  const double x2 = x * x;
  return (L0 * L1 * L1 / 72.0) * (x2 * x2) + (L0 / 4.0) * x2 + f_star;
}

double quartic_gradient(double L0, double L1, double x) {
  return (L0 * L1 * L1 / 18.0) * (x * x * x) + (L0 / 2.0) * x;
}

double quartic_second_derivative(double L0, double L1, double x) {
  return (L0 * L1 * L1 / 6.0) * (x * x) + L0 / 2.0;
}

double quartic_box_smoothness(double L0, double L1, double radius) {
  return L0 / 2.0 + (L0 * L1 * L1 / 6.0) * radius * radius;
}

QuarticSynthetic::QuarticSynthetic(double L0, double L1, double f_star, std::size_t dim,
                                   double box_radius)
    : L0_(L0), L1_(L1), f_star_(f_star), dim_(dim), box_radius_(box_radius) {
  if (!(L0 > 0.0) || !std::isfinite(L0)) throw std::invalid_argument("quartic L0 must be > 0");
  if (!(L1 > 0.0) || !std::isfinite(L1)) throw std::invalid_argument("quartic L1 must be > 0");
  if (!std::isfinite(f_star)) throw std::invalid_argument("quartic f_star must be finite");
  if (dim == 0) throw std::invalid_argument("quartic dimension must be >= 1");
  if (!(box_radius > 0.0) || !std::isfinite(box_radius)) {
    throw std::invalid_argument("quartic box radius must be > 0");
  }
}

double QuarticSynthetic::value(std::span<const double> x) const {
  const double quartic = L0_ * L1_ * L1_ / 72.0;
  const double quadratic = L0_ / 4.0;
  double s = 0.0;
  for (double xi : x) {
    const double x2 = xi * xi;
    s += quartic * (x2 * x2) + quadratic * x2;
  }
  return s + f_star_;
}

void QuarticSynthetic::gradient(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = quartic_gradient(L0_, L1_, x[i]);
}

std::optional<Optimum> QuarticSynthetic::optimum() const {
  return Optimum{Vector(dim_, 0.0), f_star_};
}

std::optional<Smoothness> QuarticSynthetic::smoothness() const {
  return Smoothness{quartic_box_smoothness(L0_, L1_, box_radius_), L0_, L1_};
}

Quadratic::Quadratic(Vector a_row_major, Vector b, double constant, double L,
                     std::optional<Optimum> optimum)
    : a_(std::move(a_row_major)),
      b_(std::move(b)),
      constant_(constant),
      L_(L),
      optimum_(std::move(optimum)) {
  const std::size_t n = b_.size();
  if (n == 0) throw std::invalid_argument("quadratic dimension must be >= 1");
  if (a_.size() != n * n) {
    throw std::invalid_argument(fmt::format("quadratic matrix must be {0}x{0}", n));
  }
  if (!(L > 0.0)) throw std::invalid_argument("quadratic L must be > 0");
  if (optimum_ && optimum_->x.size() != n) {
    throw std::invalid_argument("quadratic optimum has the wrong dimension");
  }
}

Quadratic Quadratic::isotropic(std::size_t dim, double curvature, double f_star) {
  Vector a(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = curvature;
  return Quadratic(std::move(a), Vector(dim, 0.0), f_star, curvature,
                   Optimum{Vector(dim, 0.0), f_star});
}

double Quadratic::value(std::span<const double> x) const {
  const std::size_t n = dim();
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += a_[i * n + j] * x[j];
    quad += x[i] * row;
    lin += b_[i] * x[i];
  }
  return 0.5 * quad - lin + constant_;
}

void Quadratic::gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += a_[i * n + j] * x[j];
    out[i] = row - b_[i];
  }
}

std::optional<Smoothness> Quadratic::smoothness() const {
  // L-smooth implies (L, 0)-smooth.
  return Smoothness{L_, L_, 0.0};
}

double estimate_local_smoothness(const Objective& objective, std::span<const double> x,
                                 double radius, std::size_t n_probes) {
  if (!(radius > 0.0)) throw std::invalid_argument("probe radius must be > 0");
  if (n_probes == 0) throw std::invalid_argument("n_probes must be >= 1");
  const std::size_t n = objective.dim();
  if (x.size() != n) throw std::invalid_argument("probe point has the wrong dimension");
  if (auto s = objective.smoothness(); s && s->L1 > 0.0 && radius > 1.0 / s->L1) {
    throw std::invalid_argument(
        fmt::format("probe radius {} exceeds 1/L1 = {}", radius, 1.0 / s->L1));
  }

  std::vector<Vector> directions;
  for (std::size_t i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector d(n, 0.0);
      d[i] = sign;
      directions.push_back(std::move(d));
    }
  }
  if (n > 1) {
    const double c = 1.0 / std::sqrt(static_cast<double>(n));
    directions.emplace_back(n, c);
    directions.emplace_back(n, -c);
  }

  const Vector gx = objective.gradient(x);
  Vector y(n);
  Vector gy(n);
  Vector diff(n);
  double worst = 0.0;
  for (std::size_t k = 1; k <= n_probes; ++k) {
    const double r = radius * static_cast<double>(k) / static_cast<double>(n_probes);
    for (const Vector& d : directions) {
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + r * d[i];
      objective.gradient(y, gy);
      for (std::size_t i = 0; i < n; ++i) diff[i] = gy[i] - gx[i];
      const double step = std::sqrt(squared_distance(y, x));
      if (step == 0.0) continue;
      worst = std::max(worst, norm(diff) / step);
    }
  }
  return worst;
}

}  // namespace polyfree
