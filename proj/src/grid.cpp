#include "podgeq/grid.hpp"

namespace podgeq {

GridSpec GridSpec::of(int n_cells) {
  if (n_cells < 8) throw ConfigError("grid: n_cells must be at least 8");
  return GridSpec{n_cells, 1.0 / n_cells};
}

ScalarField make_field(const GridSpec& grid) {
  return ScalarField{grid, Eigen::ArrayXXd::Zero(grid.n_cells, grid.n_cells)};
}

Eigen::ArrayXXd shift_x(const Eigen::ArrayXXd& a, int k) {
  const Eigen::Index n = a.rows();
  k = static_cast<int>(((k % n) + n) % n);
  if (k == 0) return a;
  Eigen::ArrayXXd out(n, a.cols());
  out.topRows(n - k) = a.bottomRows(n - k);
  out.bottomRows(k) = a.topRows(k);
  return out;
}

Eigen::ArrayXXd shift_y(const Eigen::ArrayXXd& a, int k) {
  const Eigen::Index n = a.cols();
  k = static_cast<int>(((k % n) + n) % n);
  if (k == 0) return a;
  Eigen::ArrayXXd out(a.rows(), n);
  out.leftCols(n - k) = a.rightCols(n - k);
  out.rightCols(k) = a.leftCols(k);
  return out;
}

ScalarField shift(const ScalarField& f, int dx, int dy) {
  return ScalarField{f.grid, shift_y(shift_x(f.values, dx), dy)};
}

double integrate(const ScalarField& f) {
  if (!f.values.isFinite().all()) throw NumericalError("non-finite field");
  return f.values.mean();
}

double mean(const ScalarField& f) { return integrate(f); }

ScalarField subtract_mean(const ScalarField& f) {
  return ScalarField{f.grid, f.values - mean(f)};
}

void gradient_c4(const ScalarField& f, ScalarField& fx, ScalarField& fy) {
  const double w = 1.0 / (12.0 * f.grid.spacing);
  fx.grid = f.grid;
  fy.grid = f.grid;
  fx.values = w * (-shift_x(f.values, 2) + 8.0 * shift_x(f.values, 1) -
                   8.0 * shift_x(f.values, -1) + shift_x(f.values, -2));
  fy.values = w * (-shift_y(f.values, 2) + 8.0 * shift_y(f.values, 1) -
                   8.0 * shift_y(f.values, -1) + shift_y(f.values, -2));
}

ScalarField laplacian_c2(const ScalarField& f) {
  const double w = 1.0 / (f.grid.spacing * f.grid.spacing);
  return ScalarField{f.grid,
                     w * (shift_x(f.values, 1) + shift_x(f.values, -1) +
                          shift_y(f.values, 1) + shift_y(f.values, -1) -
                          4.0 * f.values)};
}

double inner(const ScalarField& a, const ScalarField& b, InnerProductKind kind) {
  if (!(a.grid == b.grid)) throw ConfigError("inner: grid mismatch");
  double v = (a.values * b.values).mean();
  if (kind == InnerProductKind::H1) {
    ScalarField ax, ay, bx, by;
    gradient_c4(a, ax, ay);
    gradient_c4(b, bx, by);
    v += (ax.values * bx.values).mean() + (ay.values * by.values).mean();
  }
  return v;
}

}  // namespace podgeq
