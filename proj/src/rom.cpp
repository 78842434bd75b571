#include "podgeq/rom.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "podgeq/errors.hpp"
#include "podgeq/fd_solver.hpp"

namespace podgeq {

namespace {

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonCap = 50;
constexpr double kFdStep = 1e-7;
constexpr double kPivotTol = 1e-14;
// corrections allowed on a stale factorization before it is rebuilt
constexpr int kStaleRetry = 8;

void mode_stacks(const PodBasis& basis, Eigen::MatrixXd& p, Eigen::MatrixXd& px,
                 Eigen::MatrixXd& py) {
  const int r = basis.rank();
  if (r < 1) throw ConfigError("reduced model needs a nonempty basis");
  const Eigen::Index nn =
      static_cast<Eigen::Index>(basis.grid.n_cells) * basis.grid.n_cells;
  p.resize(nn, r);
  px.resize(nn, r);
  py.resize(nn, r);
  ScalarField fx, fy;
  for (int j = 0; j < r; ++j) {
    p.col(j) = Eigen::Map<const Eigen::VectorXd>(basis.modes[j].values.data(), nn);
    gradient_c4(basis.modes[j], fx, fy);
    px.col(j) = Eigen::Map<const Eigen::VectorXd>(fx.values.data(), nn);
    py.col(j) = Eigen::Map<const Eigen::VectorXd>(fy.values.data(), nn);
  }
}

void check_rom_config(const RomConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.s_l > 0.0)) throw ConfigError("s_l must be positive");
  if (cfg.d < 0.0) throw ConfigError("d must be nonnegative");
  if (std::abs(cfg.p.norm() - 1.0) > 1e-12)
    throw ConfigError("propagation direction p must be a unit vector");
}

}  // namespace

RomOperators assemble_operators(const PodBasis& basis, const RomConfig& cfg) {
  check_rom_config(cfg);
  Eigen::MatrixXd p, px, py;
  mode_stacks(basis, p, px, py);
  const double nn = static_cast<double>(p.rows());
  const FlowSplit split = velocity_split(cfg.flow, basis.grid);

  const auto as_array = [&](const ScalarField& f) {
    return Eigen::Map<const Eigen::ArrayXd>(f.values.data(), p.rows());
  };
  // C_ij = integral (V . grad psi_j) psi_i: trial index on the gradient.
  const auto convection = [&](const ScalarField& v1, const ScalarField& v2) {
    Eigen::MatrixXd w = (px.array().colwise() * as_array(v1)).matrix();
    w += (py.array().colwise() * as_array(v2)).matrix();
    return Eigen::MatrixXd((p.transpose() * w) / nn);
  };
  const auto load = [&](const ScalarField& v1, const ScalarField& v2) {
    const Eigen::VectorXd w =
        (as_array(v1) * cfg.p[0] + as_array(v2) * cfg.p[1]).matrix();
    return Eigen::VectorXd(-cfg.dt * (p.transpose() * w) / nn);
  };

  RomOperators ops;
  ops.flow = cfg.flow;
  ops.m2.noalias() = p.transpose() * p / nn;
  ops.m1_base = ops.m2 + cfg.dt * convection(split.v1_base, split.v2_base);
  if (cfg.equation == Equation::Viscous) {
    Eigen::MatrixXd stiff = px.transpose() * px;
    stiff.noalias() += py.transpose() * py;
    ops.m1_base += (cfg.dt * cfg.d * cfg.s_l / nn) * stiff;
  }
  ops.m1_pert = cfg.dt * convection(split.v1_pert, split.v2_pert);
  ops.c_base = load(split.v1_base, split.v2_base);
  ops.c_pert = load(split.v1_pert, split.v2_pert);
  return ops;
}

Eigen::VectorXd nonlinear_rhs(const Eigen::VectorXd& a, const PodBasis& basis,
                              const RomConfig& cfg) {
  check_rom_config(cfg);
  const ScalarField u_hat = reconstruct_mean_free(basis, a);
  ScalarField fx, fy;
  gradient_c4(u_hat, fx, fy);
  ScalarField w{basis.grid,
                cfg.s_l * ((fx.values + cfg.p[0]).square() +
                           (fy.values + cfg.p[1]).square())
                              .sqrt()};
  if (cfg.equation == Equation::Curvature)
    w.values -= cfg.d * cfg.s_l * curvature_production(u_hat, cfg.p).values;
  const ScalarField f_field = subtract_mean(w);
  Eigen::VectorXd f(basis.rank());
  for (int i = 0; i < basis.rank(); ++i)
    f(i) = -cfg.dt * inner(f_field, basis.modes[i], InnerProductKind::L2);
  return f;
}

Eigen::VectorXd newton_solve(const Eigen::MatrixXd& m1, const Eigen::VectorXd& rhs0,
                             const RhsFn& f, const JacFn& dfda,
                             const Eigen::VectorXd& a0, NewtonReport* rep) {
  const Eigen::Index r = a0.size();
  Eigen::VectorXd a = a0;
  Eigen::VectorXd fa = f ? f(a) : Eigen::VectorXd::Zero(r);
  Eigen::VectorXd g = m1 * a - rhs0 - fa;
  double gn = g.norm();
  const auto converged = [&](int it) {
    if (gn > kNewtonTol * (1.0 + a.norm())) return false;
    if (rep) {
      rep->iterations = it;
      rep->residual = gn;
    }
    return true;
  };
  if (converged(0)) return a;

  // The Jacobian at the warm start is reused for every correction; the
  // nonlinear part is dt-scaled here, so the lost quadratic convergence costs
  // at most an extra iteration while saving the dominant rebuild work.
  Eigen::MatrixXd jac = m1;
  if (f) {
    if (dfda) {
      jac -= dfda(a, fa);
    } else {
      for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::VectorXd ap = a;
        ap(j) += kFdStep;
        jac.col(j) -= (f(ap) - fa) / kFdStep;
      }
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < kPivotTol)
    throw NumericalError("newton: singular jacobian");

  for (int it = 1; it <= kNewtonCap; ++it) {
    a += lu.solve(-g);
    fa = f ? f(a) : Eigen::VectorXd::Zero(r);
    g = m1 * a - rhs0 - fa;
    gn = g.norm();
    if (converged(it)) return a;
  }
  throw NumericalError("newton did not converge in " + std::to_string(kNewtonCap) +
                       " iterations, residual " + std::to_string(gn));
}

ReducedModel::ReducedModel(const PodBasis& basis, const RomConfig& cfg)
    : basis_(&basis), cfg_(cfg), ops_(assemble_operators(basis, cfg)) {
  mode_stacks(basis, psi_, psix_, psiy_);
}

void ReducedModel::fill_w(Eigen::ArrayXd& w, const Eigen::ArrayXd& ux,
                          const Eigen::ArrayXd& uy, const Eigen::VectorXd& uvals) const {
  w = cfg_.s_l * ((ux + cfg_.p[0]).square() + (uy + cfg_.p[1]).square()).sqrt();
  if (cfg_.equation == Equation::Curvature) {
    ScalarField uf = make_field(basis_->grid);
    Eigen::Map<Eigen::VectorXd>(uf.values.data(), uvals.size()) = uvals;
    const ScalarField curv = curvature_production(uf, cfg_.p);
    w -= cfg_.d * cfg_.s_l *
         Eigen::Map<const Eigen::ArrayXd>(curv.values.data(), uvals.size());
  }
}

void ReducedModel::reconstruct_gradients(const Eigen::VectorXd& a) const {
  ux_.matrix().noalias() = psix_ * a;
  uy_.matrix().noalias() = psiy_ * a;
  if (cfg_.equation == Equation::Curvature) uvals_.noalias() = psi_ * a;
}

Eigen::VectorXd ReducedModel::nonlinear_rhs(const Eigen::VectorXd& a) const {
  if (a.size() != basis_->rank())
    throw ConfigError("nonlinear_rhs: coefficient size mismatch");
  if (memo_valid_ && memo_a_.size() == a.size() && memo_a_ == a) {
    last_q_ = memo_q_;
    return memo_f_;
  }
  reconstruct_gradients(a);
  fill_w(w_, ux_, uy_, uvals_);
  last_q_ = w_.mean();
  w_ -= last_q_;
  memo_a_ = a;
  memo_f_ = -cfg_.dt / static_cast<double>(psi_.rows()) * (psi_.transpose() * w_.matrix());
  memo_q_ = last_q_;
  memo_valid_ = true;
  return memo_f_;
}

double ReducedModel::mean_decay_rate(const Eigen::VectorXd& a) const {
  reconstruct_gradients(a);
  fill_w(w_, ux_, uy_, uvals_);
  return w_.mean();
}

Eigen::MatrixXd ReducedModel::jacobian_f(const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& fa) const {
  const int r = basis_->rank();
  const Eigen::Index nn = psi_.rows();
  reconstruct_gradients(a);
  wcols_.resize(nn, r);
  for (int j = 0; j < r; ++j) {
    if (cfg_.equation == Equation::Curvature) {
      fill_w(wj_, ux_ + kFdStep * psix_.col(j).array(),
             uy_ + kFdStep * psiy_.col(j).array(),
             Eigen::VectorXd(uvals_ + kFdStep * psi_.col(j)));
    } else {
      wj_ = cfg_.s_l * ((ux_ + kFdStep * psix_.col(j).array() + cfg_.p[0]).square() +
                        (uy_ + kFdStep * psiy_.col(j).array() + cfg_.p[1]).square())
                           .sqrt();
    }
    wcols_.col(j) = wj_ - wj_.mean();
  }
  Eigen::MatrixXd fmat(r, r);
  fmat.noalias() = psi_.transpose() * wcols_;
  fmat *= -cfg_.dt / static_cast<double>(nn);
  return (fmat.colwise() - fa) / kFdStep;
}

Eigen::VectorXd ReducedModel::step(const Eigen::VectorXd& a_prev, double t_new,
                                   NewtonReport* rep) const {
  if (a_prev.size() != basis_->rank())
    throw ConfigError("step: coefficient size mismatch");
  const Eigen::MatrixXd m1 = ops_.m1_at(t_new);
  const Eigen::VectorXd rhs0 = ops_.m2 * a_prev + ops_.c_at(t_new);

  Eigen::VectorXd a = a_prev;
  Eigen::VectorXd fa = nonlinear_rhs(a);
  Eigen::VectorXd g = m1 * a - rhs0 - fa;
  double gn = g.norm();
  const auto rebuild = [&] {
    lu_.compute(m1 - jacobian_f(a, fa));
    if (lu_.matrixLU().diagonal().cwiseAbs().minCoeff() < kPivotTol)
      throw NumericalError("newton: singular jacobian");
    lu_valid_ = true;
  };
  int since_rebuild = 0;
  for (int it = 0; it <= kNewtonCap; ++it) {
    if (gn <= kNewtonTol * (1.0 + a.norm())) {
      if (rep) {
        rep->iterations = it;
        rep->residual = gn;
      }
      return a;
    }
    if (it == kNewtonCap) break;
    if (!lu_valid_ || since_rebuild >= kStaleRetry) {
      rebuild();
      since_rebuild = 0;
    }
    a += lu_.solve(-g);
    ++since_rebuild;
    fa = nonlinear_rhs(a);
    g = m1 * a - rhs0 - fa;
    gn = g.norm();
  }
  throw NumericalError("newton did not converge in " + std::to_string(kNewtonCap) +
                       " iterations, residual " + std::to_string(gn));
}

ScalarField reconstruct_full(const PodBasis& basis, const Eigen::VectorXd& a,
                             double u_bar) {
  ScalarField out = reconstruct_mean_free(basis, a);
  out.values += u_bar;
  return out;
}

std::vector<double> recover_mean(const Eigen::MatrixXd& coeffs, const PodBasis& basis,
                                 const RomConfig& cfg) {
  const ReducedModel model(basis, cfg);
  std::vector<double> u_bar(static_cast<std::size_t>(coeffs.cols()));
  if (coeffs.cols() == 0) return u_bar;
  u_bar[0] = 0.0;
  double q_prev = model.mean_decay_rate(coeffs.col(0));
  for (Eigen::Index k = 1; k < coeffs.cols(); ++k) {
    const double q = model.mean_decay_rate(coeffs.col(k));
    u_bar[k] = u_bar[k - 1] - 0.5 * cfg.dt * (q_prev + q);
    q_prev = q;
  }
  return u_bar;
}

RomTrajectory rom_solve(const PodBasis& basis, const RomConfig& cfg, double t0,
                        double t_final, const Eigen::VectorXd& a0, double ubar0) {
  if (a0.size() != basis.rank()) throw ConfigError("rom_solve: initial coefficient size");
  const double span = t_final - t0;
  if (span < 0.0) throw ConfigError("rom_solve: t_final before t0");
  const long n = std::llround(span / cfg.dt);
  if (std::abs(n * cfg.dt - span) > 1e-9 * std::max(1.0, span))
    throw ConfigError("rom_solve: time span must be an integer multiple of dt");

  const ReducedModel model(basis, cfg);
  RomTrajectory traj;
  traj.coeffs.resize(basis.rank(), n + 1);
  traj.times.reserve(static_cast<std::size_t>(n) + 1);
  traj.u_bar.reserve(static_cast<std::size_t>(n) + 1);
  traj.newton_iters.reserve(static_cast<std::size_t>(n));

  Eigen::VectorXd a = a0;
  traj.coeffs.col(0) = a;
  traj.times.push_back(t0);
  traj.u_bar.push_back(ubar0);
  double q_prev = model.mean_decay_rate(a);
  for (long k = 1; k <= n; ++k) {
    const double t_new = t0 + k * cfg.dt;
    NewtonReport rep;
    a = model.step(a, t_new, &rep);
    const double q = model.last_mean_decay_rate();
    traj.coeffs.col(k) = a;
    traj.times.push_back(t_new);
    traj.u_bar.push_back(traj.u_bar.back() - 0.5 * cfg.dt * (q_prev + q));
    traj.newton_iters.push_back(rep.iterations);
    q_prev = q;
  }
  return traj;
}

RomTrajectory rom_solve(const PodBasis& basis, const RomConfig& cfg, double t_final) {
  return rom_solve(basis, cfg, 0.0, t_final, Eigen::VectorXd::Zero(basis.rank()), 0.0);
}

}  // namespace podgeq
