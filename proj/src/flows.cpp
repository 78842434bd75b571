#include "podgeq/flows.hpp"

#include <cmath>

namespace podgeq {

namespace {
constexpr double kTwoPi = 2.0 * EIGEN_PI;

double wrap01(double x) { return x - std::floor(x); }
}  // namespace

Eigen::Vector2d velocity(const FlowSpec& spec, double x, double y, double t) {
  x = wrap01(x);
  y = wrap01(y);
  const double A = spec.amplitude;
  if (spec.variant == FlowVariant::Steady) {
    return {-A * std::sin(kTwoPi * x) * std::cos(kTwoPi * y),
            A * std::cos(kTwoPi * x) * std::sin(kTwoPi * y)};
  }
  const double f = time_factor(spec, t);
  return {A * std::cos(kTwoPi * y) + f * (A * spec.theta * std::sin(kTwoPi * y)),
          A * std::cos(kTwoPi * x) + f * (A * spec.theta * std::sin(kTwoPi * x))};
}

void sample_on_grid(const FlowSpec& spec, const GridSpec& grid, double t,
                    ScalarField& v1, ScalarField& v2) {
  v1 = make_field(grid);
  v2 = make_field(grid);
  const double h = grid.spacing;
  for (int j = 0; j < grid.n_cells; ++j)
    for (int i = 0; i < grid.n_cells; ++i) {
      const Eigen::Vector2d v = velocity(spec, i * h, j * h, t);
      v1.values(i, j) = v[0];
      v2.values(i, j) = v[1];
    }
}

FlowSplit velocity_split(const FlowSpec& spec, const GridSpec& grid) {
  FlowSplit s{make_field(grid), make_field(grid), make_field(grid), make_field(grid)};
  const double h = grid.spacing;
  const double A = spec.amplitude;
  for (int j = 0; j < grid.n_cells; ++j)
    for (int i = 0; i < grid.n_cells; ++i) {
      const double x = wrap01(i * h), y = wrap01(j * h);
      if (spec.variant == FlowVariant::Steady) {
        s.v1_base.values(i, j) = -A * std::sin(kTwoPi * x) * std::cos(kTwoPi * y);
        s.v2_base.values(i, j) = A * std::cos(kTwoPi * x) * std::sin(kTwoPi * y);
      } else {
        s.v1_base.values(i, j) = A * std::cos(kTwoPi * y);
        s.v2_base.values(i, j) = A * std::cos(kTwoPi * x);
        s.v1_pert.values(i, j) = A * spec.theta * std::sin(kTwoPi * y);
        s.v2_pert.values(i, j) = A * spec.theta * std::sin(kTwoPi * x);
      }
    }
  return s;
}

double time_factor(const FlowSpec& spec, double t) {
  if (spec.variant == FlowVariant::Steady) return 0.0;
  return std::cos(kTwoPi * t);
}

double max_abs_velocity(const FlowSpec& spec) {
  if (spec.variant == FlowVariant::Steady) return spec.amplitude;
  return spec.amplitude * (1.0 + spec.theta);
}

}  // namespace podgeq
