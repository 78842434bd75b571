#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "podgeq/flows.hpp"
#include "podgeq/grid.hpp"

#include "helpers.hpp"

using namespace podgeq;
using testutil::kTau;

namespace {

FlowSpec steady(double a) { return FlowSpec{FlowVariant::Steady, a, 0.0}; }
FlowSpec periodic(double a, double theta) {
  return FlowSpec{FlowVariant::TimePeriodic, a, theta};
}

}  // namespace

TEST_CASE("steady cellular velocity values") {
  const FlowSpec f = steady(4.0);
  const Eigen::Vector2d va = velocity(f, 0.25, 0.0, 0.0);
  CHECK(va[0] == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(std::abs(va[1]) <= 1e-14);

  const Eigen::Vector2d vb = velocity(f, 0.125, 0.125, 3.0);
  CHECK(vb[0] == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(vb[1] == doctest::Approx(2.0).epsilon(1e-13));

  // coordinates wrap into the unit cell
  const Eigen::Vector2d vw = velocity(f, 1.25, -1.0, 0.0);
  CHECK(vw[0] == va[0]);
  CHECK(vw[1] == va[1]);
}

TEST_CASE("time periodic velocity values") {
  const FlowSpec f = periodic(4.0, 1.0);
  // the perturbation factor cos(2 pi t) is 1 at t=0
  const Eigen::Vector2d v = velocity(f, 0.0, 0.25, 0.0);
  CHECK(v[0] == doctest::Approx(4.0).epsilon(1e-13));  // 4 cos(pi/2) + 4 sin(pi/2)
  CHECK(v[1] == doctest::Approx(4.0).epsilon(1e-13));  // 4 cos(0) + 4 sin(0)
  // at t=0.5 the perturbation flips sign
  const Eigen::Vector2d w = velocity(f, 0.0, 0.25, 0.5);
  CHECK(w[0] == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(w[1] == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("time factor") {
  CHECK(time_factor(steady(4.0), 0.37) == 0.0);
  const FlowSpec f = periodic(4.0, 1.0);
  CHECK(time_factor(f, 0.0) == 1.0);
  CHECK(time_factor(f, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(time_factor(f, 0.25)) <= 1e-15);
}

TEST_CASE("split reproduces the sampled field to rounding") {
  // base + factor * pert may fuse differently than the pointwise formula,
  // so equality holds to a few ulp of the velocity scale, not bitwise
  const GridSpec g = GridSpec::of(24);
  for (const FlowSpec f : {steady(2.5), periodic(4.0, 1.0), periodic(3.0, 0.5)}) {
    const FlowSplit s = velocity_split(f, g);
    for (double t : {0.0, 0.25, 0.37}) {
      ScalarField v1, v2;
      sample_on_grid(f, g, t, v1, v2);
      const double factor = time_factor(f, t);
      const Eigen::ArrayXXd r1 = s.v1_base.values + factor * s.v1_pert.values;
      const Eigen::ArrayXXd r2 = s.v2_base.values + factor * s.v2_pert.values;
      CHECK((v1.values - r1).abs().maxCoeff() <= 4e-15);
      CHECK((v2.values - r2).abs().maxCoeff() <= 4e-15);
    }
  }
}

TEST_CASE("sampled fields are discretely divergence free") {
  const GridSpec g = GridSpec::of(32);
  for (const FlowSpec f : {steady(4.0), periodic(4.0, 1.0)}) {
    for (double t : {0.0, 0.13}) {
      ScalarField v1, v2, ax, ay, bx, by;
      sample_on_grid(f, g, t, v1, v2);
      gradient_c4(v1, ax, ay);
      gradient_c4(v2, bx, by);
      CHECK((ax.values + by.values).abs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("velocity bound") {
  CHECK(max_abs_velocity(steady(4.0)) == 4.0);
  CHECK(max_abs_velocity(periodic(4.0, 1.0)) == 8.0);
  const GridSpec g = GridSpec::of(16);
  for (const FlowSpec f : {steady(4.0), periodic(4.0, 1.0)}) {
    for (double t : {0.0, 0.1, 0.6}) {
      ScalarField v1, v2;
      sample_on_grid(f, g, t, v1, v2);
      const double bound = max_abs_velocity(f) + 1e-12;
      CHECK(v1.values.abs().maxCoeff() <= bound);
      CHECK(v2.values.abs().maxCoeff() <= bound);
    }
  }
}
