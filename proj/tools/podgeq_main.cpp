#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "podgeq/adaptive.hpp"
#include "podgeq/errors.hpp"
#include "podgeq/fd_solver.hpp"
#include "podgeq/observables.hpp"
#include "podgeq/pod.hpp"
#include "podgeq/rom.hpp"
#include "podgeq/run_config.hpp"
#include "podgeq/snapshot_io.hpp"

namespace {

using namespace podgeq;

TimeSeries ubar_series(const std::vector<double>& t, const std::vector<double>& ub) {
  TimeSeries ts;
  ts.t = t;
  ts.add_column("u_bar", ub);
  return ts;
}

void cmd_reference_solve(const std::string& config_path, const std::string& out_path,
                         const std::string& traj_path) {
  const RunConfig cfg = parse_config_file(config_path);
  const SnapshotSet snaps = solve_reference(cfg.fd, cfg.t_final, cfg.record_stride);
  write_snapshots(out_path, snaps);
  if (!traj_path.empty()) write_csv(traj_path, ubar_series(snaps.times, snaps.u_bar));
}

void cmd_pod_build(const std::string& snap_path, double e_pod, const std::string& inner,
                   int rank, const std::string& out_path) {
  const SnapshotSet snaps = read_snapshots(snap_path);
  const InnerProductKind kind =
      inner == "l2" ? InnerProductKind::L2 : InnerProductKind::H1;
  const FieldRefs refs = snapshot_refs(snaps);
  const PodBasis basis = rank > 0 ? build_basis_fixed_rank(refs, kind, rank)
                                  : build_basis(refs, kind, e_pod);
  write_basis(out_path, basis);
  std::cout << "rank " << basis.rank() << "\n";
}

void cmd_rom_solve(const std::string& basis_path, const std::string& config_path,
                   double t_final, const std::string& coeffs_path,
                   const std::string& ubar_path, const std::string& snap_path,
                   int snap_stride) {
  const RunConfig cfg = parse_config_file(config_path);
  const PodBasis basis = read_basis(basis_path);
  if (!(basis.grid == cfg.fd.grid))
    throw ConfigError("rom-solve: basis grid differs from config n_cells");
  const double t_end = t_final > 0.0 ? t_final : cfg.t_final;
  const RomTrajectory traj = rom_solve(basis, cfg.rom(), t_end);

  TimeSeries coeffs;
  coeffs.t = traj.times;
  for (int i = 0; i < basis.rank(); ++i) {
    const Eigen::VectorXd row = traj.coeffs.row(i);
    coeffs.add_column("a" + std::to_string(i + 1),
                      std::vector<double>(row.data(), row.data() + row.size()));
  }
  write_csv(coeffs_path, coeffs);
  write_csv(ubar_path, ubar_series(traj.times, traj.u_bar));

  if (!snap_path.empty()) {
    SnapshotSet out;
    out.grid = basis.grid;
    for (Eigen::Index k = 0; k < traj.coeffs.cols(); k += snap_stride) {
      out.times.push_back(traj.times[static_cast<std::size_t>(k)]);
      out.u_bar.push_back(traj.u_bar[static_cast<std::size_t>(k)]);
      out.u_hat.push_back(reconstruct_mean_free(basis, traj.coeffs.col(k)));
      if (out.u_hat.size() > 1) {
        const std::size_t m = out.u_hat.size() - 1;
        out.dq.push_back(ScalarField{
            out.grid, (out.u_hat[m].values - out.u_hat[m - 1].values) /
                          (out.times[m] - out.times[m - 1])});
      }
    }
    write_snapshots(snap_path, out);
  }
}

void cmd_adaptive_solve(const std::string& config_path, const std::string& basis_path,
                        const std::string& report_path, const std::string& init_snap,
                        const std::string& ubar_path) {
  const RunConfig cfg = parse_config_file(config_path);
  const PodBasis basis = read_basis(basis_path);
  if (!(basis.grid == cfg.fd.grid))
    throw ConfigError("adaptive-solve: basis grid differs from config n_cells");

  RomState init;
  init.a = Eigen::VectorXd::Zero(basis.rank());
  if (!init_snap.empty()) {
    const SnapshotSet snaps = read_snapshots(init_snap);
    if (!(snaps.grid == basis.grid))
      throw ConfigError("adaptive-solve: initial snapshot grid mismatch");
    init.t = snaps.times.back();
    init.u_bar = snaps.u_bar.back();
    init.a = project_coeffs(snaps.u_hat.back(), basis);
  }

  const AdaptiveResult result =
      run_adaptive(basis, init, cfg.rom(), cfg.adaptive(), cfg.t_final);

  TimeSeries report;
  std::vector<double> residual, added, size, fd_steps;
  for (const CheckReport& r : result.reports) {
    report.t.push_back(r.t);
    residual.push_back(r.residual);
    added.push_back(r.added);
    size.push_back(r.basis_size);
    fd_steps.push_back(static_cast<double>(r.fd_steps));
  }
  report.add_column("residual", residual);
  report.add_column("added", added);
  report.add_column("basis_size", size);
  report.add_column("fd_steps", fd_steps);
  write_csv(report_path, report);
  if (!ubar_path.empty())
    write_csv(ubar_path, ubar_series(result.trajectory.times, result.trajectory.u_bar));
  std::cout << "final rank " << result.basis.rank() << ", fd steps "
            << result.fd_steps_total << " of " << result.rom_steps_total << "\n";
}

void cmd_flame_speed(const std::string& ubar_path, const std::string& out_path,
                     double p_x, double p_y) {
  const TimeSeries in = read_csv(ubar_path);
  if (in.columns.empty()) throw ConfigError("flame-speed: no data column in input");
  const TimeSeries speed =
      flame_speed(in.t, in.columns.front().second, Eigen::Vector2d(p_x, p_y));
  write_csv(out_path, speed);
}

void cmd_compare(const std::string& a_path, const std::string& b_path,
                 const std::string& out_path) {
  const SnapshotSet a = read_snapshots(a_path);
  const SnapshotSet b = read_snapshots(b_path);
  if (!(a.grid == b.grid)) throw ConfigError("compare: grids differ");

  TimeSeries out;
  std::vector<double> err;
  std::size_t jb = 0;
  for (std::size_t ja = 0; ja < a.times.size(); ++ja) {
    while (jb < b.times.size() && b.times[jb] < a.times[ja] - 1e-9) ++jb;
    if (jb == b.times.size()) break;
    if (std::abs(b.times[jb] - a.times[ja]) > 1e-9) continue;
    const ScalarField ua = full_u(a, static_cast<int>(ja));
    const ScalarField ub = full_u(b, static_cast<int>(jb));
    // the error is relative to --b; rows where it vanishes carry no information
    if (integrate(ScalarField{ub.grid, ub.values.square()}) == 0.0) continue;
    out.t.push_back(a.times[ja]);
    err.push_back(relative_l2_error(ua, ub));
  }
  if (out.t.empty()) throw ConfigError("compare: no matching timestamps");
  out.add_column("rel_l2", err);
  write_csv(out_path, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"G-equation reference solver and POD-Galerkin reduced-order toolkit"};
  app.require_subcommand(1);
  std::function<void()> action;

  {
    auto* c = app.add_subcommand("reference-solve",
                                 "Integrate the configured equation and store snapshots");
    auto config = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto traj = std::make_shared<std::string>();
    c->add_option("--config", *config, "run configuration file")->required();
    c->add_option("--out", *out, "output snapshot file")->required();
    c->add_option("--traj", *traj, "optional u_bar trajectory CSV");
    c->callback([=, &action] {
      action = [=] { cmd_reference_solve(*config, *out, *traj); };
    });
  }
  {
    auto* c = app.add_subcommand("pod-build", "Build a POD basis from stored snapshots");
    auto snaps = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto inner = std::make_shared<std::string>("h1");
    auto e_pod = std::make_shared<double>(1e-3);
    auto rank = std::make_shared<int>(0);
    c->add_option("--snapshots", *snaps, "input snapshot file")->required();
    c->add_option("--e-pod", *e_pod, "eigenvalue tail ratio threshold");
    c->add_option("--inner", *inner, "inner product (h1 or l2)")
        ->check(CLI::IsMember({"h1", "l2"}));
    c->add_option("--rank", *rank, "fixed rank overriding --e-pod");
    c->add_option("--out", *out, "output basis file")->required();
    c->callback([=, &action] {
      action = [=] { cmd_pod_build(*snaps, *e_pod, *inner, *rank, *out); };
    });
  }
  {
    auto* c = app.add_subcommand("rom-solve", "Run the reduced solver on a stored basis");
    auto basis = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto t_final = std::make_shared<double>(0.0);
    auto coeffs = std::make_shared<std::string>();
    auto ubar = std::make_shared<std::string>();
    auto snap = std::make_shared<std::string>();
    auto stride = std::make_shared<int>(1);
    c->add_option("--basis", *basis, "input basis file")->required();
    c->add_option("--config", *config, "run configuration file")->required();
    c->add_option("--t-final", *t_final, "final time (defaults to config t_final)");
    c->add_option("--out", *coeffs, "coefficient trajectory CSV")->required();
    c->add_option("--ubar", *ubar, "u_bar trajectory CSV")->required();
    c->add_option("--out-snap", *snap, "optional reconstructed snapshot file");
    c->add_option("--snap-stride", *stride, "record stride for --out-snap")
        ->check(CLI::PositiveNumber);
    c->callback([=, &action] {
      action = [=] {
        cmd_rom_solve(*basis, *config, *t_final, *coeffs, *ubar, *snap, *stride);
      };
    });
  }
  {
    auto* c = app.add_subcommand("adaptive-solve",
                                 "Reduced solve with burst-checked basis enrichment");
    auto config = std::make_shared<std::string>();
    auto basis = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto init = std::make_shared<std::string>();
    auto ubar = std::make_shared<std::string>();
    c->add_option("--config", *config, "run configuration file")->required();
    c->add_option("--init-basis", *basis, "initial basis file")->required();
    c->add_option("--out", *out, "check report CSV")->required();
    c->add_option("--init-snap", *init,
                  "snapshot file whose last entry seeds the reduced state");
    c->add_option("--ubar", *ubar, "optional u_bar trajectory CSV");
    c->callback([=, &action] {
      action = [=] { cmd_adaptive_solve(*config, *basis, *out, *init, *ubar); };
    });
  }
  {
    auto* c = app.add_subcommand("flame-speed",
                                 "Turbulent flame speed from a u_bar trajectory");
    auto ubar = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto p_x = std::make_shared<double>(1.0);
    auto p_y = std::make_shared<double>(0.0);
    c->add_option("--ubar", *ubar, "u_bar trajectory CSV")->required();
    c->add_option("--out", *out, "output speed CSV")->required();
    c->add_option("--p-x", *p_x, "propagation direction x component");
    c->add_option("--p-y", *p_y, "propagation direction y component");
    c->callback([=, &action] {
      action = [=] { cmd_flame_speed(*ubar, *out, *p_x, *p_y); };
    });
  }
  {
    auto* c = app.add_subcommand("compare",
                                 "Relative L2 error between two snapshot files");
    auto a = std::make_shared<std::string>();
    auto b = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    c->add_option("--a", *a, "first snapshot file")->required();
    c->add_option("--b", *b, "second snapshot file")->required();
    c->add_option("--out", *out, "per-time error CSV")->required();
    c->callback([=, &action] {
      action = [=] { cmd_compare(*a, *b, *out); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
