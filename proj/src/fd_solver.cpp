#include "podgeq/fd_solver.hpp"

#include <cmath>
#include <string>

#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

namespace podgeq {

namespace {

constexpr double kWenoEps = 1e-6;
constexpr double kCurvGuard = 1e-12;
constexpr double kLinTol = 1e-10;
constexpr int kLinMaxIter = 10000;

using Arr = Eigen::ArrayXXd;

double cfl_advective(const FDConfig& cfg) {
  const double vmax = max_abs_velocity(cfg.flow);
  return cfg.dt * (2.0 * (cfg.s_l + vmax) / cfg.grid.spacing);
}

// Jiang-Peng weighted combination of the five divided differences.
Arr weno_combine(const Arr& v1, const Arr& v2, const Arr& v3, const Arr& v4,
                 const Arr& v5) {
  const Arr phi1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
  const Arr phi2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
  const Arr phi3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
  const Arr s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).square() +
                 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).square();
  const Arr s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).square() +
                 0.25 * (v2 - v4).square();
  const Arr s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).square() +
                 0.25 * (3.0 * v3 - 4.0 * v4 + v5).square();
  const Arr a1 = 0.1 / (s1 + kWenoEps).square();
  const Arr a2 = 0.6 / (s2 + kWenoEps).square();
  const Arr a3 = 0.3 / (s3 + kWenoEps).square();
  return (a1 * phi1 + a2 * phi2 + a3 * phi3) / (a1 + a2 + a3);
}

Arr upwind_select(const Arr& gm, const Arr& gp, const Arr& v) {
  return (v >= 0.0).select(gm, gp);
}

// Godunov selection for the squared one-sided derivative of the normal term.
Arr normal_sq_select(const Arr& gm, const Arr& gp, const Arr& v, double s_l) {
  return (v > s_l).select(
      gm.square(),
      (v < -s_l).select(gp.square(),
                        gm.max(0.0).square().max(gp.min(0.0).square())));
}

// One-sided full-G derivatives at time t and the Godunov normal magnitude
// s_l sqrt((Gx_nor)^2 + (Gy_nor)^2).
Arr godunov_normal(const ScalarField& u, const FDConfig& cfg,
                   const ScalarField& v1, const ScalarField& v2,
                   Arr* gxm_out = nullptr, Arr* gxp_out = nullptr,
                   Arr* gym_out = nullptr, Arr* gyp_out = nullptr) {
  ScalarField uxm, uxp, uym, uyp;
  weno5_pair(u, 0, uxm, uxp);
  weno5_pair(u, 1, uym, uyp);
  const Arr gxm = uxm.values + cfg.p[0];
  const Arr gxp = uxp.values + cfg.p[0];
  const Arr gym = uym.values + cfg.p[1];
  const Arr gyp = uyp.values + cfg.p[1];
  if (gxm_out) *gxm_out = gxm;
  if (gxp_out) *gxp_out = gxp;
  if (gym_out) *gym_out = gym;
  if (gyp_out) *gyp_out = gyp;
  return cfg.s_l * (normal_sq_select(gxm, gxp, v1.values, cfg.s_l) +
                    normal_sq_select(gym, gyp, v2.values, cfg.s_l))
                       .sqrt();
}

// Central second-order derivatives of G = P.x + u used by the curvature terms.
struct CurvDerivs {
  Arr gx, gy, gxx, gyy, gxy, denom;
};

CurvDerivs curvature_derivs(const ScalarField& u, const Eigen::Vector2d& p) {
  const double h = u.grid.spacing;
  const Arr& a = u.values;
  const Arr xp = shift_x(a, 1), xm = shift_x(a, -1);
  const Arr yp = shift_y(a, 1), ym = shift_y(a, -1);
  CurvDerivs d;
  d.gx = (xp - xm) / (2.0 * h) + p[0];
  d.gy = (yp - ym) / (2.0 * h) + p[1];
  d.gxx = (xp - 2.0 * a + xm) / (h * h);
  d.gyy = (yp - 2.0 * a + ym) / (h * h);
  d.gxy = (shift_y(xp, 1) - shift_y(xp, -1) - shift_y(xm, 1) + shift_y(xm, -1)) /
          (4.0 * h * h);
  d.denom = d.gx.square() + d.gy.square() + kCurvGuard;
  return d;
}

// |grad G| div(grad G / |grad G|), expanded with a single gxy cross term.
Arr curvature_term(const ScalarField& u, const Eigen::Vector2d& p) {
  const CurvDerivs d = curvature_derivs(u, p);
  return (d.gy.square() * d.gxx - d.gx * d.gy * d.gxy + d.gx.square() * d.gyy) /
         d.denom;
}

// Infinity-laplacian part of the split curvature term.
Arr inf_laplacian_term(const ScalarField& u, const Eigen::Vector2d& p) {
  const CurvDerivs d = curvature_derivs(u, p);
  return (d.gx.square() * d.gxx + d.gx * d.gy * d.gxy + d.gy.square() * d.gyy) /
         d.denom;
}

ScalarField rhs_for(const ScalarField& u, double t, const FDConfig& cfg) {
  return cfg.equation == Equation::Viscous ? rhs_explicit_viscous(u, t, cfg)
                                           : curvature_rhs(u, t, cfg);
}

}  // namespace

void validate(const FDConfig& cfg) {
  if (cfg.grid.n_cells < 8) throw ConfigError("grid: n_cells must be at least 8");
  if (std::abs(cfg.p.norm() - 1.0) > 1e-12)
    throw ConfigError("propagation direction p must be a unit vector");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.s_l > 0.0)) throw ConfigError("s_l must be positive");
  if (cfg.d < 0.0) throw ConfigError("d must be nonnegative");
  const double h = cfg.grid.spacing;
  if (cfg.scheme == Scheme::ExplicitRK3) {
    if (cfg.equation == Equation::Viscous) {
      if (const double b = cfl_advective(cfg); b >= 1.0)
        throw ConfigError("CFL violated: dt*((s_l+|V1|)/h + (s_l+|V2|)/h) = " +
                          std::to_string(b) + " >= 1 at dt = " +
                          std::to_string(cfg.dt));
      if (cfg.d > 0.0 && cfg.dt > h * h / (8.0 * cfg.d * cfg.s_l))
        throw ConfigError(
            "diffusive stability violated: dt = " + std::to_string(cfg.dt) +
            " exceeds h^2/(8 d s_l) = " +
            std::to_string(h * h / (8.0 * cfg.d * cfg.s_l)));
    } else {
      const double b = cfl_advective(cfg) +
                       cfg.dt * 4.0 * cfg.s_l * cfg.d / (h * h);
      if (b >= 1.0)
        throw ConfigError(
            "CFL violated: dt*((s_l+|V1|)/h + (s_l+|V2|)/h + 4 s_l d/h^2) = " +
            std::to_string(b) + " >= 1 at dt = " + std::to_string(cfg.dt));
    }
  } else {
    if (cfg.equation == Equation::Viscous) {
      const double b = cfg.dt * 2.0 * cfg.s_l / h;
      if (b >= 1.0)
        throw ConfigError("CFL violated: dt*(2 s_l/h) = " + std::to_string(b) +
                          " >= 1 at dt = " + std::to_string(cfg.dt));
    } else {
      if (const double b = cfl_advective(cfg); b >= 1.0)
        throw ConfigError("CFL violated: dt*((s_l+|V1|)/h + (s_l+|V2|)/h) = " +
                          std::to_string(b) + " >= 1 at dt = " +
                          std::to_string(cfg.dt));
    }
  }
}

ScalarField full_u(const SnapshotSet& s, int k) {
  return ScalarField{s.grid, s.u_hat.at(k).values + s.u_bar.at(k)};
}

SnapshotSet truncate_after(const SnapshotSet& s, double t_max) {
  SnapshotSet out;
  out.grid = s.grid;
  const double eps = 1e-12 * std::max(1.0, std::abs(t_max));
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (s.times[i] > t_max + eps) break;
    out.times.push_back(s.times[i]);
    out.u_hat.push_back(s.u_hat[i]);
    out.u_bar.push_back(s.u_bar[i]);
    if (i > 0) out.dq.push_back(s.dq[i - 1]);
  }
  return out;
}

void weno5_pair(const ScalarField& u, int axis, ScalarField& left, ScalarField& right) {
  const auto sh = (axis == 0) ? shift_x : shift_y;
  const Arr d = (sh(u.values, 1) - u.values) / u.grid.spacing;
  left.grid = right.grid = u.grid;
  left.values = weno_combine(sh(d, -3), sh(d, -2), sh(d, -1), d, sh(d, 1));
  right.values = weno_combine(sh(d, 2), sh(d, 1), d, sh(d, -1), sh(d, -2));
}

double godunov_hamiltonian(double gx_m, double gx_p, double gy_m, double gy_p,
                           double v1, double v2, double s_l) {
  const double gx_vel = (v1 >= 0.0) ? gx_m : gx_p;
  const double gy_vel = (v2 >= 0.0) ? gy_m : gy_p;
  const auto nor_sq = [s_l](double gm, double gp, double v) {
    if (v > s_l) return gm * gm;
    if (v < -s_l) return gp * gp;
    const double m = std::max(gm, 0.0);
    const double q = std::min(gp, 0.0);
    return std::max(m * m, q * q);
  };
  return v1 * gx_vel + v2 * gy_vel +
         s_l * std::sqrt(nor_sq(gx_m, gx_p, v1) + nor_sq(gy_m, gy_p, v2));
}

ScalarField rhs_explicit_viscous(const ScalarField& u, double t, const FDConfig& cfg) {
  ScalarField v1, v2;
  sample_on_grid(cfg.flow, u.grid, t, v1, v2);
  Arr gxm, gxp, gym, gyp;
  const Arr normal = godunov_normal(u, cfg, v1, v2, &gxm, &gxp, &gym, &gyp);
  const Arr ham = v1.values * upwind_select(gxm, gxp, v1.values) +
                  v2.values * upwind_select(gym, gyp, v2.values) + normal;
  ScalarField rhs{u.grid, -ham};
  if (cfg.d > 0.0) rhs.values += cfg.d * cfg.s_l * laplacian_c2(u).values;
  return rhs;
}

ScalarField curvature_production(const ScalarField& u, const Eigen::Vector2d& p) {
  return ScalarField{u.grid, curvature_term(u, p)};
}

ScalarField curvature_rhs(const ScalarField& u, double t, const FDConfig& cfg) {
  ScalarField v1, v2;
  sample_on_grid(cfg.flow, u.grid, t, v1, v2);
  Arr gxm, gxp, gym, gyp;
  const Arr normal = godunov_normal(u, cfg, v1, v2, &gxm, &gxp, &gym, &gyp);
  const Arr ham = v1.values * upwind_select(gxm, gxp, v1.values) +
                  v2.values * upwind_select(gym, gyp, v2.values) + normal;
  return ScalarField{u.grid,
                     -ham + cfg.d * cfg.s_l * curvature_term(u, cfg.p)};
}

ScalarField step_rk3(const ScalarField& u, double t, const FDConfig& cfg) {
  validate(cfg);
  const double dt = cfg.dt;
  ScalarField u1{u.grid, u.values + dt * rhs_for(u, t, cfg).values};
  ScalarField u2{u.grid, 0.75 * u.values +
                             0.25 * (u1.values + dt * rhs_for(u1, t + dt, cfg).values)};
  return ScalarField{u.grid,
                     u.values / 3.0 +
                         2.0 / 3.0 * (u2.values +
                                      dt * rhs_for(u2, t + 0.5 * dt, cfg).values)};
}

namespace detail {

SemiImplicitSolver::SemiImplicitSolver(const FDConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
}

void SemiImplicitSolver::assemble(double t_new) {
  const int n = cfg_.grid.n_cells;
  const double h = cfg_.grid.spacing;
  const double dt = cfg_.dt;
  sample_on_grid(cfg_.flow, cfg_.grid, t_new, v1_new_, v2_new_);
  const double diff = dt * cfg_.d * cfg_.s_l / (h * h);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(5) * n * n);
  const auto idx = [n](int i, int j) { return i + j * n; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n;
      const int jp = (j + 1) % n, jm = (j + n - 1) % n;
      const double cx = dt * v1_new_.values(i, j) / (2.0 * h);
      const double cy = dt * v2_new_.values(i, j) / (2.0 * h);
      const int row = idx(i, j);
      trips.emplace_back(row, row, 1.0 + 4.0 * diff);
      trips.emplace_back(row, idx(ip, j), cx - diff);
      trips.emplace_back(row, idx(im, j), -cx - diff);
      trips.emplace_back(row, idx(i, jp), cy - diff);
      trips.emplace_back(row, idx(i, jm), -cy - diff);
    }
  lhs_.resize(n * n, n * n);
  lhs_.setFromTriplets(trips.begin(), trips.end());
  lhs_.makeCompressed();
  t_assembled_ = t_new;
  assembled_ = true;
}

ScalarField SemiImplicitSolver::step(const ScalarField& u, double t) {
  const double dt = cfg_.dt;
  const double t_new = t + dt;
  const bool steady = cfg_.flow.variant == FlowVariant::Steady ||
                      cfg_.flow.theta == 0.0;
  if (!assembled_ || (!steady && t_assembled_ != t_new)) assemble(t_new);

  ScalarField v1_old = v1_new_, v2_old = v2_new_;
  if (!steady) sample_on_grid(cfg_.flow, cfg_.grid, t, v1_old, v2_old);
  Arr explicit_part = godunov_normal(u, cfg_, v1_old, v2_old) +
                      (v1_new_.values * cfg_.p[0] + v2_new_.values * cfg_.p[1]);
  if (cfg_.equation == Equation::Curvature)
    explicit_part += cfg_.d * cfg_.s_l * inf_laplacian_term(u, cfg_.p);
  const Arr rhs = u.values - dt * explicit_part;

  Eigen::GMRES<Eigen::SparseMatrix<double>> solver;
  solver.setTolerance(kLinTol);
  solver.setMaxIterations(kLinMaxIter);
  solver.compute(lhs_);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
  const Eigen::VectorXd x = solver.solve(b);
  if (solver.info() != Eigen::Success)
    throw NumericalError("semi-implicit linear solve did not converge: relative residual " +
                         std::to_string(solver.error()) + " after " +
                         std::to_string(solver.iterations()) + " iterations");
  ScalarField out = make_field(cfg_.grid);
  Eigen::Map<Eigen::VectorXd>(out.values.data(), out.values.size()) = x;
  return out;
}

}  // namespace detail

ScalarField step_semi_implicit(const ScalarField& u, double t, const FDConfig& cfg) {
  if (cfg.equation != Equation::Viscous)
    throw ConfigError("step_semi_implicit handles the viscous equation");
  detail::SemiImplicitSolver s(cfg);
  return s.step(u, t);
}

ScalarField step_curvature_semi_implicit(const ScalarField& u, double t,
                                         const FDConfig& cfg) {
  if (cfg.equation != Equation::Curvature)
    throw ConfigError("step_curvature_semi_implicit handles the curvature equation");
  detail::SemiImplicitSolver s(cfg);
  return s.step(u, t);
}

SnapshotSet solve_reference(const FDConfig& cfg, double t_final, int record_stride) {
  validate(cfg);
  if (cfg.d <= 0.0) throw ConfigError("inviscid case unsupported (d = 0)");
  if (record_stride < 1) throw ConfigError("record_stride must be at least 1");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  const long n_steps = std::llround(t_final / cfg.dt);
  if (std::abs(n_steps * cfg.dt - t_final) > 1e-9 * std::max(1.0, t_final))
    throw ConfigError("t_final must be an integer multiple of dt");

  SnapshotSet out;
  out.grid = cfg.grid;
  ScalarField u = make_field(cfg.grid);
  out.times.push_back(0.0);
  out.u_hat.push_back(u);
  out.u_bar.push_back(0.0);

  detail::SemiImplicitSolver engine(cfg);
  for (long k = 1; k <= n_steps; ++k) {
    const double t_prev = (k - 1) * cfg.dt;
    u = (cfg.scheme == Scheme::SemiImplicit) ? engine.step(u, t_prev)
                                             : step_rk3(u, t_prev, cfg);
    if (!u.values.isFinite().all())
      throw NumericalError("non-finite field at step " + std::to_string(k));
    if (k % record_stride == 0) {
      const double t_k = k * cfg.dt;
      const double ub = mean(u);
      ScalarField uh = subtract_mean(u);
      const double dt_rec = t_k - out.times.back();
      out.dq.push_back(
          ScalarField{cfg.grid, (uh.values - out.u_hat.back().values) / dt_rec});
      out.times.push_back(t_k);
      out.u_hat.push_back(std::move(uh));
      out.u_bar.push_back(ub);
    }
  }
  return out;
}

}  // namespace podgeq
