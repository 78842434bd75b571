#pragma once

#include <vector>

#include "podgeq/fd_solver.hpp"
#include "podgeq/rom.hpp"

namespace podgeq {

struct AdaptiveConfig {
  double check_period = 0.5;  // time between checks
  int burst_len = 50;         // finite-difference steps per check
  double eps = 1e-3;          // enrichment threshold on mean squared residual
  int max_rank = 64;
  FDConfig fd;                // burst scheme; grid must match the basis
};

struct CheckReport {
  double t = 0.0;
  double residual = 0.0;  // mean squared projection residual of the burst
  int added = 0;
  int basis_size = 0;  // after enrichment
  long fd_steps = 0;
};

struct AdaptiveResult {
  RomTrajectory trajectory;  // coefficients zero-padded to the final rank
  PodBasis basis;
  std::vector<CheckReport> reports;
  long fd_steps_total = 0;
  long rom_steps_total = 0;
};

// Runs burst_len FD steps from the reconstructed state; when the mean squared
// projection residual of the burst exceeds eps, extracts residual POD modes
// until their eigenvalue tail is at most eps, orthonormalizes them against the
// basis (modified Gram-Schmidt, dropping near-dependent fields), and appends.
PodBasis burst_and_enrich(const RomState& state, const PodBasis& basis,
                          const AdaptiveConfig& cfg, CheckReport* report = nullptr);

// Reduced solve from init.t to t_final with an enrichment check every
// ceil(check_period/dt) steps; after each enrichment the operators are
// reassembled and the state re-expressed in the enlarged basis.
AdaptiveResult run_adaptive(const PodBasis& basis0, const RomState& init,
                            const RomConfig& rom_cfg, const AdaptiveConfig& cfg,
                            double t_final);

}  // namespace podgeq
