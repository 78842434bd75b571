#pragma once

#include <Eigen/Core>

#include "podgeq/grid.hpp"

namespace podgeq {

enum class FlowVariant { Steady, TimePeriodic };

/// Incompressible cellular velocity field. Steady: V = (-A sin(2pi x)cos(2pi y),
/// A cos(2pi x)sin(2pi y)). TimePeriodic: V = A(cos(2pi y), cos(2pi x)) +
/// A theta cos(2pi t) (sin(2pi y), sin(2pi x)).
struct FlowSpec {
  FlowVariant variant = FlowVariant::Steady;
  double amplitude = 0.0;  // A
  double theta = 0.0;      // perturbation ratio, TimePeriodic only
};

/// Pointwise velocity; coordinates are wrapped into [0,1) first.
Eigen::Vector2d velocity(const FlowSpec& spec, double x, double y, double t);

/// Node samples of both components at time t.
void sample_on_grid(const FlowSpec& spec, const GridSpec& grid, double t,
                    ScalarField& v1, ScalarField& v2);

/// Affine-in-time split V(t) = base + time_factor(t) * pert, exact for both
/// variants (the steady perturbation is zero).
struct FlowSplit {
  ScalarField v1_base, v2_base;
  ScalarField v1_pert, v2_pert;
};
FlowSplit velocity_split(const FlowSpec& spec, const GridSpec& grid);
double time_factor(const FlowSpec& spec, double t);

/// Analytic sup bound per component: A for Steady, A(1+theta) for TimePeriodic.
double max_abs_velocity(const FlowSpec& spec);

}  // namespace podgeq
