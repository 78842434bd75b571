#pragma once

#include <string>

#include "podgeq/adaptive.hpp"
#include "podgeq/rom.hpp"

namespace podgeq {

// Flat key = value run description ('#' starts a comment). Required keys:
// equation, scheme, d, s_l, p_x, p_y, flow, A, theta, n_cells, dt, t_final,
// e_pod, inner_product. Optional: record_stride and the adaptive.* block.
struct RunConfig {
  FDConfig fd;
  double t_final = 1.0;
  int record_stride = 1;
  double e_pod = 1e-3;
  InnerProductKind inner = InnerProductKind::H1;

  bool has_adaptive = false;
  double adaptive_check_period = 0.5;
  int adaptive_burst_len = 50;
  double adaptive_eps = 1e-3;
  int adaptive_max_rank = 64;

  RomConfig rom() const;
  AdaptiveConfig adaptive() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace podgeq
