#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "podgeq/grid.hpp"

namespace podgeq {

// Named real columns over shared, strictly increasing timestamps.
struct TimeSeries {
  std::vector<double> t;
  std::vector<std::pair<std::string, std::vector<double>>> columns;

  void add_column(const std::string& name, std::vector<double> values);
  const std::vector<double>& column(const std::string& name) const;
};

// S_full(t) = -(1/t)((p_x+p_y)/2 + u_bar(t)) and S_bar(t) = -u_bar(t)/t;
// rows with t <= 0 are dropped.
TimeSeries flame_speed(const std::vector<double>& times,
                       const std::vector<double>& u_bar, const Eigen::Vector2d& p);

// ||u_test - u_ref||_L2 / ||u_ref||_L2.
double relative_l2_error(const ScalarField& u_test, const ScalarField& u_ref);

// (1/m) sum_k ||a_k - b_k||^2_L2 over paired fields.
double time_averaged_sq_error(const std::vector<ScalarField>& a,
                              const std::vector<ScalarField>& b);

struct TimingReport {
  double fd_seconds = 0.0;
  double rom_offline_seconds = 0.0;
  double rom_online_seconds = 0.0;

  double speedup() const;
  std::string formatted() const;
};

// Comma-separated values with 17 significant digits; first column is t.
void write_csv(const std::string& path, const TimeSeries& ts);
TimeSeries read_csv(const std::string& path);

}  // namespace podgeq
