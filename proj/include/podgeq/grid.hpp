#pragma once

#include <Eigen/Core>

#include "podgeq/errors.hpp"

namespace podgeq {

/// Uniform periodic grid on the unit square. Stores the n_cells x n_cells
/// unique nodes; node n_cells coincides with node 0 by periodicity.
struct GridSpec {
  int n_cells = 0;
  double spacing = 0.0;

  static GridSpec of(int n_cells);
  bool operator==(const GridSpec&) const = default;
};

/// Node samples of a periodic scalar: values(i, j) = f(i*h, j*h).
struct ScalarField {
  GridSpec grid;
  Eigen::ArrayXXd values;
};

enum class InnerProductKind { L2, H1 };

/// Zero field on the given grid.
ScalarField make_field(const GridSpec& grid);

/// Periodic index shifts: result(i, j) = a(wrap(i+k), j) for shift_x,
/// result(i, j) = a(i, wrap(j+k)) for shift_y. The x coordinate indexes rows.
Eigen::ArrayXXd shift_x(const Eigen::ArrayXXd& a, int k);
Eigen::ArrayXXd shift_y(const Eigen::ArrayXXd& a, int k);
ScalarField shift(const ScalarField& f, int dx, int dy);

/// Composite-trapezoid integral over [0,1]^2; degenerates to the node mean
/// on a fully periodic grid.
double integrate(const ScalarField& f);

double mean(const ScalarField& f);
ScalarField subtract_mean(const ScalarField& f);

/// Fourth-order central differences with periodic wrap.
void gradient_c4(const ScalarField& f, ScalarField& fx, ScalarField& fy);

/// Standard 5-point second-order Laplacian with periodic wrap.
ScalarField laplacian_c2(const ScalarField& f);

/// L2 is integrate(a*b); H1 adds integrate(grad a . grad b) with gradient_c4.
double inner(const ScalarField& a, const ScalarField& b, InnerProductKind kind);

}  // namespace podgeq
