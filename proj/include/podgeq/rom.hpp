#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "podgeq/flows.hpp"
#include "podgeq/pod.hpp"

namespace podgeq {

struct RomConfig {
  Equation equation = Equation::Viscous;
  double d = 0.1;
  double s_l = 1.0;
  Eigen::Vector2d p{1.0, 0.0};
  double dt = 1e-3;
  FlowSpec flow;
};

// Galerkin matrices with the time-periodic part split off, so per-step
// assembly is a scaled matrix add.
struct RomOperators {
  FlowSpec flow;
  Eigen::MatrixXd m2;
  Eigen::MatrixXd m1_base, m1_pert;
  Eigen::VectorXd c_base, c_pert;

  Eigen::MatrixXd m1_at(double t) const {
    return m1_base + time_factor(flow, t) * m1_pert;
  }
  Eigen::VectorXd c_at(double t) const {
    return c_base + time_factor(flow, t) * c_pert;
  }
};

struct RomState {
  Eigen::VectorXd a;
  double u_bar = 0.0;
  double t = 0.0;
};

struct NewtonReport {
  int iterations = 0;
  double residual = 0.0;
};

struct RomTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd coeffs;
  std::vector<double> u_bar;
  std::vector<int> newton_iters;
};

RomOperators assemble_operators(const PodBasis& basis, const RomConfig& cfg);

// f(a)_i = -dt <F(sum a psi), psi_i>_L2 with F mean-free by construction.
// Reference implementation built on grid-level primitives; the solver class
// below computes the same values through cached stacks.
Eigen::VectorXd nonlinear_rhs(const Eigen::VectorXd& a, const PodBasis& basis,
                              const RomConfig& cfg);

// Newton iteration for m1 a = rhs0 + f(a), warm-started at a0: forward
// difference Jacobian (or a caller-supplied one) built at the warm start and
// reused across iterations, partial-pivot LU, converged when
// ||residual|| <= 1e-10 (1 + ||a||), capped at 50 iterations.
using RhsFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
Eigen::VectorXd newton_solve(const Eigen::MatrixXd& m1, const Eigen::VectorXd& rhs0,
                             const RhsFn& f, const JacFn& dfda,
                             const Eigen::VectorXd& a0, NewtonReport* rep = nullptr);

// Backward-Euler reduced solver with cached mode stacks for the nonlinear
// term; shared by the fixed-basis driver and the adaptive loop.
class ReducedModel {
 public:
  ReducedModel(const PodBasis& basis, const RomConfig& cfg);

  const PodBasis& basis() const { return *basis_; }
  const RomConfig& config() const { return cfg_; }
  const RomOperators& ops() const { return ops_; }

  // Fast path of the free function above.
  Eigen::VectorXd nonlinear_rhs(const Eigen::VectorXd& a) const;

  // Q(a): the space integral whose running time integral gives -u_bar.
  double mean_decay_rate(const Eigen::VectorXd& a) const;

  // Q at the argument of the most recent nonlinear_rhs evaluation; after
  // step() returns this is Q at the converged state.
  double last_mean_decay_rate() const { return last_q_; }

  // One backward-Euler step ending at time t_new.  The Newton Jacobian is
  // dt-scaled away from m1, so its factorization is kept across steps and
  // rebuilt only when an iteration stalls.
  Eigen::VectorXd step(const Eigen::VectorXd& a_prev, double t_new,
                       NewtonReport* rep = nullptr) const;

 private:
  void fill_w(Eigen::ArrayXd& w, const Eigen::ArrayXd& ux, const Eigen::ArrayXd& uy,
              const Eigen::VectorXd& uvals) const;
  void reconstruct_gradients(const Eigen::VectorXd& a) const;
  Eigen::MatrixXd jacobian_f(const Eigen::VectorXd& a, const Eigen::VectorXd& fa) const;

  const PodBasis* basis_;
  RomConfig cfg_;
  RomOperators ops_;
  Eigen::MatrixXd psi_, psix_, psiy_;
  mutable double last_q_ = 0.0;
  // grid-sized scratch and the cached factorization, reused across calls; one
  // instance is not safe for concurrent stepping.
  mutable Eigen::ArrayXd ux_, uy_, w_, wj_;
  mutable Eigen::VectorXd uvals_;
  mutable Eigen::MatrixXd wcols_;
  mutable Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  mutable bool lu_valid_ = false;
  // nonlinear_rhs memo: a step's converged evaluation doubles as the next
  // step's warm-start evaluation.
  mutable Eigen::VectorXd memo_a_, memo_f_;
  mutable double memo_q_ = 0.0;
  mutable bool memo_valid_ = false;
};

ScalarField reconstruct_full(const PodBasis& basis, const Eigen::VectorXd& a,
                             double u_bar);

// u_bar trajectory by composite trapezoid over Q(a_k), with u_bar_0 = 0.
std::vector<double> recover_mean(const Eigen::MatrixXd& coeffs, const PodBasis& basis,
                                 const RomConfig& cfg);

RomTrajectory rom_solve(const PodBasis& basis, const RomConfig& cfg, double t0,
                        double t_final, const Eigen::VectorXd& a0, double ubar0);
RomTrajectory rom_solve(const PodBasis& basis, const RomConfig& cfg, double t_final);

}  // namespace podgeq
