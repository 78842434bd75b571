#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "podgeq/flows.hpp"
#include "podgeq/grid.hpp"

namespace podgeq {

enum class Scheme { ExplicitRK3, SemiImplicit };
enum class Equation { Viscous, Curvature };

struct FDConfig {
  Equation equation = Equation::Viscous;
  Scheme scheme = Scheme::SemiImplicit;
  double d = 0.0;                     // Markstein number
  double s_l = 1.0;                   // laminar speed
  Eigen::Vector2d p{1.0, 0.0};        // propagation direction, |p| = 1
  double dt = 0.0;
  FlowSpec flow;
  GridSpec grid;
};

/// Checks |p| = 1 and the scheme's CFL bound; throws ConfigError otherwise.
void validate(const FDConfig& cfg);

/// Mean-free snapshots u_hat(t_i), their backward difference quotients
/// dq[i-1] = (u_hat[i] - u_hat[i-1]) / (t_i - t_{i-1}), and the means u_bar(t_i).
struct SnapshotSet {
  GridSpec grid;
  std::vector<double> times;
  std::vector<ScalarField> u_hat;
  std::vector<ScalarField> dq;
  std::vector<double> u_bar;
};

/// Full solution u(t_k) = u_hat[k] + u_bar[k].
ScalarField full_u(const SnapshotSet& s, int k);

/// Keep entries with times[i] <= t_max (difference quotients trimmed to match).
SnapshotSet truncate_after(const SnapshotSet& s, double t_max);

/// Fifth-order HJ-WENO one-sided derivatives of the periodic part along an
/// axis (0 = x, 1 = y); left = backward-biased, right = forward-biased.
void weno5_pair(const ScalarField& u, int axis, ScalarField& left, ScalarField& right);

/// Monotone numerical Hamiltonian: upwinded convection plus Godunov-selected
/// normal term. One-sided derivatives are of the full G (P component included).
double godunov_hamiltonian(double gx_m, double gx_p, double gy_m, double gy_p,
                           double v1, double v2, double s_l);

/// -H(...) + d s_l laplacian(u); G-derivatives are weno5_pair(u) plus P.
ScalarField rhs_explicit_viscous(const ScalarField& u, double t, const FDConfig& cfg);

/// Curvature-equation right side: -H(...) + d s_l |grad G| div(grad G/|grad G|)
/// with all curvature derivatives second-order central.
ScalarField curvature_rhs(const ScalarField& u, double t, const FDConfig& cfg);

/// |grad G| div(grad G / |grad G|) for G = p.x + u, second-order central.
ScalarField curvature_production(const ScalarField& u, const Eigen::Vector2d& p);

/// Three-stage TVD Runge-Kutta step of the configured equation's right side.
ScalarField step_rk3(const ScalarField& u, double t, const FDConfig& cfg);

/// Backward-Euler convection/diffusion with explicit Godunov normal term;
/// the grid system is solved by restarted GMRES with diagonal preconditioning.
ScalarField step_semi_implicit(const ScalarField& u, double t, const FDConfig& cfg);

/// Same linear solve as step_semi_implicit; the curvature term is split as
/// laplacian (implicit) minus infinity-laplacian (explicit).
ScalarField step_curvature_semi_implicit(const ScalarField& u, double t, const FDConfig& cfg);

/// Integrates u(.,0) = 0 to t_final, recording every record_stride steps.
SnapshotSet solve_reference(const FDConfig& cfg, double t_final, int record_stride = 1);

namespace detail {

/// Cached implicit operator and Krylov state reused across steps when the
/// flow (and hence the matrix) is steady.
class SemiImplicitSolver {
 public:
  explicit SemiImplicitSolver(const FDConfig& cfg);
  ScalarField step(const ScalarField& u, double t);

 private:
  void assemble(double t_new);

  FDConfig cfg_;
  Eigen::SparseMatrix<double> lhs_;
  ScalarField v1_new_, v2_new_;
  double t_assembled_ = 0.0;
  bool assembled_ = false;
};

}  // namespace detail

}  // namespace podgeq
