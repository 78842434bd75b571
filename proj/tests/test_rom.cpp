#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "podgeq/errors.hpp"
#include "podgeq/fd_solver.hpp"
#include "podgeq/observables.hpp"
#include "podgeq/pod.hpp"
#include "podgeq/rom.hpp"

#include "helpers.hpp"

using namespace podgeq;
using testutil::field_of;
using testutil::kTau;

namespace {

RomConfig rom_config(double amplitude, double d, double dt) {
  RomConfig cfg;
  cfg.equation = Equation::Viscous;
  cfg.d = d;
  cfg.s_l = 1.0;
  cfg.p = Eigen::Vector2d(1.0, 0.0);
  cfg.dt = dt;
  cfg.flow = FlowSpec{FlowVariant::Steady, amplitude, 0.0};
  return cfg;
}

// Shared small reference run: steady flow, N=40, recorded on [0, 0.5].
struct SmallRun {
  FDConfig fd;
  SnapshotSet snaps;
  PodBasis basis;
};

const SmallRun& small_run() {
  static const SmallRun run = [] {
    SmallRun r;
    r.fd.equation = Equation::Viscous;
    r.fd.scheme = Scheme::SemiImplicit;
    r.fd.d = 0.1;
    r.fd.s_l = 1.0;
    r.fd.p = Eigen::Vector2d(1.0, 0.0);
    r.fd.dt = 2.5e-3;
    r.fd.flow = FlowSpec{FlowVariant::Steady, 1.0, 0.0};
    r.fd.grid = GridSpec::of(40);
    r.snaps = solve_reference(r.fd, 0.5);
    r.basis = build_basis(r.snaps, InnerProductKind::H1, 1e-4);
    return r;
  }();
  return run;
}

RomConfig rom_of(const SmallRun& r) {
  RomConfig cfg = rom_config(r.fd.flow.amplitude, r.fd.d, r.fd.dt);
  cfg.flow = r.fd.flow;
  return cfg;
}

// Direct grid-level evaluation of the projected nonlinear term.
Eigen::VectorXd nonlinear_oracle(const Eigen::VectorXd& a, const PodBasis& basis,
                                 const RomConfig& cfg) {
  const ScalarField u = reconstruct_mean_free(basis, a);
  ScalarField ux, uy;
  gradient_c4(u, ux, uy);
  ScalarField w{basis.grid, cfg.s_l * ((ux.values + cfg.p[0]).square() +
                                       (uy.values + cfg.p[1]).square())
                                          .sqrt()};
  if (cfg.equation == Equation::Curvature)
    w.values -= cfg.d * cfg.s_l * curvature_production(u, cfg.p).values;
  w = subtract_mean(w);
  Eigen::VectorXd f(basis.rank());
  for (int i = 0; i < basis.rank(); ++i)
    f(i) = -cfg.dt * inner(w, basis.modes[i], InnerProductKind::L2);
  return f;
}

}  // namespace

TEST_CASE("operators with zero flow reduce to mass plus stiffness") {
  const GridSpec g = GridSpec::of(32);
  const PodBasis basis = testutil::synthetic_basis(g, InnerProductKind::H1, 4, 19);
  const RomConfig cfg = rom_config(0.0, 0.1, 1e-3);
  const RomOperators ops = assemble_operators(basis, cfg);

  CHECK(ops.c_base.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ops.c_pert.cwiseAbs().maxCoeff() == 0.0);
  CHECK(ops.m1_pert.cwiseAbs().maxCoeff() == 0.0);

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double mass = inner(basis.modes[i], basis.modes[j], InnerProductKind::L2);
      CHECK(std::abs(ops.m2(i, j) - mass) <= 1e-13 * (1.0 + std::abs(mass)));

      ScalarField ix, iy, jx, jy;
      gradient_c4(basis.modes[i], ix, iy);
      gradient_c4(basis.modes[j], jx, jy);
      const double stiff =
          (ix.values * jx.values + iy.values * jy.values).mean();
      const double expect = mass + cfg.dt * cfg.d * cfg.s_l * stiff;
      CHECK(std::abs(ops.m1_base(i, j) - expect) <= 1e-12 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("convection block is skew symmetric for divergence-free flows") {
  // wavenumber-one fields keep the discrete integration by parts exact;
  // the mixed parities make several entries nonzero under both flows
  const GridSpec g = GridSpec::of(80);
  PodBasis basis;
  basis.grid = g;
  basis.kind = InnerProductKind::L2;
  basis.modes.push_back(field_of(g, [](double x, double) { return std::cos(kTau * x); }));
  basis.modes.push_back(field_of(g, [](double, double y) { return std::cos(kTau * y); }));
  basis.modes.push_back(
      field_of(g, [](double x, double y) { return std::sin(kTau * x) * std::cos(kTau * y); }));
  basis.modes.push_back(
      field_of(g, [](double x, double y) { return std::sin(kTau * x) * std::sin(kTau * y); }));
  basis.eigs = Eigen::VectorXd::Ones(4);

  RomConfig cfg = rom_config(4.0, 0.0, 1e-3);
  const Eigen::MatrixXd c_steady =
      (assemble_operators(basis, cfg).m1_base - assemble_operators(basis, cfg).m2) / cfg.dt;
  REQUIRE(c_steady.cwiseAbs().maxCoeff() > 0.1);
  CHECK((c_steady + c_steady.transpose()).cwiseAbs().maxCoeff() <=
        1e-6 * c_steady.cwiseAbs().maxCoeff());

  cfg.flow = FlowSpec{FlowVariant::TimePeriodic, 4.0, 1.0};
  const RomOperators ops = assemble_operators(basis, cfg);
  const Eigen::MatrixXd c_base = (ops.m1_base - ops.m2) / cfg.dt;
  const Eigen::MatrixXd c_pert = ops.m1_pert / cfg.dt;
  REQUIRE(c_base.cwiseAbs().maxCoeff() > 0.1);
  REQUIRE(c_pert.cwiseAbs().maxCoeff() > 0.1);
  CHECK((c_base + c_base.transpose()).cwiseAbs().maxCoeff() <=
        1e-6 * c_base.cwiseAbs().maxCoeff());
  CHECK((c_pert + c_pert.transpose()).cwiseAbs().maxCoeff() <=
        1e-6 * c_pert.cwiseAbs().maxCoeff());
}

TEST_CASE("m1 has a positive definite symmetric part") {
  const GridSpec g = GridSpec::of(64);
  const PodBasis basis = testutil::synthetic_basis(g, InnerProductKind::H1, 5, 23);
  const RomConfig cfg = rom_config(4.0, 0.1, 1e-3);
  const Eigen::MatrixXd m1 = assemble_operators(basis, cfg).m1_at(0.0);
  const Eigen::MatrixXd sym = 0.5 * (m1 + m1.transpose());

  Eigen::VectorXd eigs;
  Eigen::MatrixXd vecs;
  sym_eig(sym, eigs, vecs);
  CHECK(eigs.minCoeff() > 0.0);
}

TEST_CASE("steady operators are constant in time") {
  const GridSpec g = GridSpec::of(32);
  const PodBasis basis = testutil::synthetic_basis(g, InnerProductKind::H1, 3, 29);
  const RomConfig cfg = rom_config(2.0, 0.1, 1e-3);
  const RomOperators ops = assemble_operators(basis, cfg);
  CHECK((ops.m1_at(0.7) - ops.m1_at(0.1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ops.c_at(0.7) - ops.c_at(0.1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nonlinear term vanishes at zero state and matches the oracle") {
  const SmallRun& run = small_run();
  const RomConfig cfg = rom_of(run);
  const ReducedModel model(run.basis, cfg);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(run.basis.rank());
  CHECK(model.nonlinear_rhs(zero).cwiseAbs().maxCoeff() == 0.0);
  CHECK(nonlinear_rhs(zero, run.basis, cfg).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(43);
  std::uniform_real_distribution<double> dist(-0.3, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd a(run.basis.rank());
    for (int i = 0; i < a.size(); ++i) a(i) = dist(rng);
    const Eigen::VectorXd oracle = nonlinear_oracle(a, run.basis, cfg);
    const Eigen::VectorXd fast = model.nonlinear_rhs(a);
    const Eigen::VectorXd free_fn = nonlinear_rhs(a, run.basis, cfg);
    const double scale = oracle.cwiseAbs().maxCoeff() + 1e-30;
    CHECK((fast - oracle).cwiseAbs().maxCoeff() <= 1e-11 * scale);
    CHECK((free_fn - oracle).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  }
}

TEST_CASE("nonlinear term is Lipschitz with constant at most s_l") {
  const SmallRun& run = small_run();
  const RomConfig cfg = rom_of(run);

  std::mt19937 rng(47);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd a(run.basis.rank()), b(run.basis.rank());
    for (int i = 0; i < a.size(); ++i) {
      a(i) = dist(rng);
      b(i) = dist(rng);
    }
    auto w_of = [&](const Eigen::VectorXd& coeff) {
      const ScalarField u = reconstruct_mean_free(run.basis, coeff);
      ScalarField ux, uy;
      gradient_c4(u, ux, uy);
      ScalarField w{u.grid, cfg.s_l * ((ux.values + cfg.p[0]).square() +
                                       (uy.values + cfg.p[1]).square())
                                          .sqrt()};
      return subtract_mean(w);
    };
    const ScalarField wa = w_of(a), wb = w_of(b);
    const ScalarField ua = reconstruct_mean_free(run.basis, a);
    const ScalarField ub = reconstruct_mean_free(run.basis, b);
    const ScalarField diff{ua.grid, ua.values - ub.values};
    const double lhs = std::sqrt(inner(ScalarField{wa.grid, wa.values - wb.values},
                                       ScalarField{wa.grid, wa.values - wb.values},
                                       InnerProductKind::L2));
    const double rhs = std::sqrt(inner(diff, diff, InnerProductKind::H1));
    CHECK(lhs <= cfg.s_l * rhs * 1.01 + 1e-14);
  }
}

TEST_CASE("newton solves the scalar contraction by hand") {
  const Eigen::MatrixXd m1 = Eigen::MatrixXd::Constant(1, 1, 2.0);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(1);
  const double expected[] = {0.5, 0.75, 0.875};
  for (double e : expected) {
    NewtonReport rep;
    const Eigen::VectorXd rhs0 = a + Eigen::VectorXd::Ones(1);
    a = newton_solve(m1, rhs0, {}, {}, a, &rep);
    CHECK(std::abs(a(0) - e) <= 1e-14);
    CHECK(rep.iterations <= 2);
    CHECK(rep.residual <= 1e-10 * (1.0 + a.norm()));
  }
}

TEST_CASE("newton handles nonlinear right sides and custom jacobians") {
  Eigen::MatrixXd m1(2, 2);
  m1 << 2.0, 0.3, 0.3, 1.5;
  const Eigen::VectorXd rhs0 = Eigen::Vector2d(0.7, -0.4);
  const RhsFn f = [](const Eigen::VectorXd& a) {
    return Eigen::VectorXd(-0.1 * a.array().cube().matrix());
  };
  const JacFn dfda = [](const Eigen::VectorXd& a, const Eigen::VectorXd&) {
    return Eigen::MatrixXd((-0.3 * a.array().square()).matrix().asDiagonal());
  };

  NewtonReport rep_fd, rep_an;
  const Eigen::VectorXd x_fd =
      newton_solve(m1, rhs0, f, {}, Eigen::VectorXd::Zero(2), &rep_fd);
  const Eigen::VectorXd x_an =
      newton_solve(m1, rhs0, f, dfda, Eigen::VectorXd::Zero(2), &rep_an);

  CHECK((x_fd - x_an).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((m1 * x_fd - rhs0 - f(x_fd)).norm() <= 1e-10 * (1.0 + x_fd.norm()));
  CHECK((m1 * x_an - rhs0 - f(x_an)).norm() <= 1e-10 * (1.0 + x_an.norm()));

  // singular system
  CHECK_THROWS_AS(newton_solve(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1),
                               {}, {}, Eigen::VectorXd::Zero(1)),
                  NumericalError);
}

TEST_CASE("zero flow gives zero dynamics and the exact mean decay") {
  const GridSpec g = GridSpec::of(32);
  const PodBasis basis = testutil::synthetic_basis(g, InnerProductKind::H1, 3, 53);
  const RomConfig cfg = rom_config(0.0, 0.1, 1e-3);

  const RomTrajectory traj = rom_solve(basis, cfg, 0.02);
  REQUIRE(traj.times.size() == 21);
  CHECK(traj.coeffs.cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    CHECK(std::abs(traj.u_bar[k] + cfg.s_l * traj.times[k]) <= 1e-13);
  for (int it : traj.newton_iters) CHECK(it == 0);

  // Jensen bound: the mean decays at least at the laminar speed
  const SmallRun& run = small_run();
  const RomTrajectory real = rom_solve(run.basis, rom_of(run), 0.5);
  for (std::size_t k = 1; k < real.times.size(); ++k) {
    CHECK(real.u_bar[k] < real.u_bar[k - 1]);
    CHECK(real.u_bar[k] <= -real.times[k] + 1e-8);
  }
}

TEST_CASE("recover_mean reproduces the solver trajectory") {
  const SmallRun& run = small_run();
  const RomConfig cfg = rom_of(run);
  const RomTrajectory traj = rom_solve(run.basis, cfg, 0.25);
  const std::vector<double> again = recover_mean(traj.coeffs, run.basis, cfg);
  REQUIRE(again.size() == traj.u_bar.size());
  for (std::size_t k = 0; k < again.size(); ++k) CHECK(again[k] == traj.u_bar[k]);
}

TEST_CASE("linearized backward euler dissipates the mass-weighted energy") {
  const GridSpec g = GridSpec::of(32);
  const PodBasis basis = testutil::synthetic_basis(g, InnerProductKind::H1, 4, 59);
  const RomConfig cfg = rom_config(1.0, 0.1, 1e-3);
  const RomOperators ops = assemble_operators(basis, cfg);

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(ops.m1_at(0.0));
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd a(4);
  for (int i = 0; i < 4; ++i) a(i) = dist(rng);

  double energy = std::sqrt(a.dot(ops.m2 * a));
  for (int k = 0; k < 30; ++k) {
    a = lu.solve(ops.m2 * a);
    const double next = std::sqrt(a.dot(ops.m2 * a));
    CHECK(next <= energy + 1e-12);
    energy = next;
  }
}

TEST_CASE("reduced solution tracks the reference and improves with rank") {
  const SmallRun& run = small_run();
  const RomConfig cfg = rom_of(run);
  const FieldRefs refs = snapshot_refs(run.snaps);

  auto error_at_rank = [&](int r) {
    const PodBasis basis = build_basis_fixed_rank(refs, InnerProductKind::H1, r);
    const RomTrajectory traj = rom_solve(basis, cfg, 0.5);
    const Eigen::Index last = traj.coeffs.cols() - 1;
    const ScalarField rec =
        reconstruct_full(basis, traj.coeffs.col(last), traj.u_bar.back());
    const ScalarField ref = full_u(run.snaps, static_cast<int>(run.snaps.times.size()) - 1);
    return relative_l2_error(rec, ref);
  };

  const double e2 = error_at_rank(2);
  const double e4 = error_at_rank(4);
  const double e6 = error_at_rank(6);
  CHECK(e4 <= 1.1 * e2);
  CHECK(e6 <= 1.1 * e4);
  CHECK(e6 <= 0.05);
}

TEST_CASE("newton stays cheap on a real trajectory") {
  const SmallRun& run = small_run();
  const RomTrajectory traj = rom_solve(run.basis, rom_of(run), 0.5);
  std::vector<int> iters(traj.newton_iters.begin() + 1, traj.newton_iters.end());
  REQUIRE(!iters.empty());
  std::nth_element(iters.begin(), iters.begin() + iters.size() / 2, iters.end());
  CHECK(iters[iters.size() / 2] <= 5);
}

TEST_CASE("halving dt quarters the squared trajectory error") {
  const SmallRun& run = small_run();
  // near-full-rank basis isolates the time discretization error
  const PodBasis basis =
      build_basis(snapshot_refs(run.snaps), InnerProductKind::H1, 1e-9);

  auto solve_with = [&](double dt) {
    RomConfig cfg = rom_of(run);
    cfg.dt = dt;
    return rom_solve(basis, cfg, 0.4);
  };
  const RomTrajectory fine = solve_with(2.5e-4);
  const RomOperators ops = assemble_operators(basis, rom_of(run));

  auto error_vs_fine = [&](const RomTrajectory& traj) {
    double total = 0.0;
    const std::size_t stride = (fine.times.size() - 1) / (traj.times.size() - 1);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const Eigen::VectorXd diff =
          traj.coeffs.col(k) - fine.coeffs.col(k * stride);
      const double dbar = traj.u_bar[k] - fine.u_bar[k * stride];
      total += diff.dot(ops.m2 * diff) + dbar * dbar;
    }
    return total / traj.times.size();
  };

  const double e1 = error_vs_fine(solve_with(4e-3));
  const double e2 = error_vs_fine(solve_with(2e-3));
  const double e3 = error_vs_fine(solve_with(1e-3));
  CHECK(e1 / e2 >= 2.8);
  CHECK(e1 / e2 <= 5.5);
  CHECK(e2 / e3 >= 2.8);
  CHECK(e2 / e3 <= 5.5);
}

TEST_CASE("rom_solve validates the time window") {
  const GridSpec g = GridSpec::of(32);
  const PodBasis basis = testutil::synthetic_basis(g, InnerProductKind::H1, 2, 67);
  const RomConfig cfg = rom_config(1.0, 0.1, 1e-3);
  CHECK_THROWS_AS(rom_solve(basis, cfg, 0.0105), ConfigError);
  CHECK_THROWS_AS(rom_solve(basis, cfg, -0.5), ConfigError);
  CHECK_THROWS_AS(
      rom_solve(basis, cfg, 0.4, 0.2, Eigen::VectorXd::Zero(5), 0.0),  // wrong size
      ConfigError);
}
