#include "podgeq/observables.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "podgeq/errors.hpp"

namespace podgeq {

namespace {

void check_times(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw ConfigError("time series: timestamps must be strictly increasing");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("csv: malformed number '" + s + "'");
  return v;
}

}  // namespace

void TimeSeries::add_column(const std::string& name, std::vector<double> values) {
  if (values.size() != t.size())
    throw ConfigError("time series: column '" + name + "' length mismatch");
  columns.emplace_back(name, std::move(values));
}

const std::vector<double>& TimeSeries::column(const std::string& name) const {
  for (const auto& [n, v] : columns)
    if (n == name) return v;
  throw ConfigError("time series: no column '" + name + "'");
}

TimeSeries flame_speed(const std::vector<double>& times,
                       const std::vector<double>& u_bar, const Eigen::Vector2d& p) {
  if (times.size() != u_bar.size())
    throw ConfigError("flame_speed: times and u_bar lengths differ");
  check_times(times);
  const double px_mean = 0.5 * (p[0] + p[1]);
  TimeSeries out;
  std::vector<double> s_full, s_bar;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) continue;
    out.t.push_back(times[i]);
    s_full.push_back(-(px_mean + u_bar[i]) / times[i]);
    s_bar.push_back(-u_bar[i] / times[i]);
  }
  out.add_column("s_full", std::move(s_full));
  out.add_column("s_bar", std::move(s_bar));
  return out;
}

double relative_l2_error(const ScalarField& u_test, const ScalarField& u_ref) {
  if (!(u_test.grid == u_ref.grid))
    throw ConfigError("relative_l2_error: grid mismatch");
  const double ref = std::sqrt(integrate(ScalarField{u_ref.grid, u_ref.values.square()}));
  if (ref == 0.0)
    throw NumericalError("relative_l2_error: zero reference norm");
  const double diff = std::sqrt(integrate(
      ScalarField{u_ref.grid, (u_test.values - u_ref.values).square()}));
  return diff / ref;
}

double time_averaged_sq_error(const std::vector<ScalarField>& a,
                              const std::vector<ScalarField>& b) {
  if (a.size() != b.size() || a.empty())
    throw ConfigError("time_averaged_sq_error: mismatched or empty sequences");
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k].grid == b[k].grid))
      throw ConfigError("time_averaged_sq_error: grid mismatch");
    total += integrate(ScalarField{a[k].grid, (a[k].values - b[k].values).square()});
  }
  return total / static_cast<double>(a.size());
}

double TimingReport::speedup() const {
  if (!(rom_online_seconds > 0.0))
    throw NumericalError("timing report: nonpositive online time");
  return fd_seconds / rom_online_seconds;
}

std::string TimingReport::formatted() const {
  std::ostringstream os;
  os << "fd_seconds " << fmt17(fd_seconds) << "\n"
     << "rom_offline_seconds " << fmt17(rom_offline_seconds) << "\n"
     << "rom_online_seconds " << fmt17(rom_online_seconds) << "\n"
     << "speedup " << fmt17(speedup()) << "\n";
  return os.str();
}

void write_csv(const std::string& path, const TimeSeries& ts) {
  check_times(ts.t);
  for (const auto& [name, v] : ts.columns)
    if (v.size() != ts.t.size())
      throw ConfigError("csv: column '" + name + "' length mismatch");
  std::ofstream out(path);
  if (!out) throw ConfigError("csv: cannot open '" + path + "' for writing");
  out << "t";
  for (const auto& [name, v] : ts.columns) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < ts.t.size(); ++i) {
    out << fmt17(ts.t[i]);
    for (const auto& [name, v] : ts.columns) out << "," << fmt17(v[i]);
    out << "\n";
  }
  if (!out) throw ConfigError("csv: write to '" + path + "' failed");
}

TimeSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: empty file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  if (names.empty() || names.front() != "t")
    throw ConfigError("csv: first column must be t");

  TimeSeries ts;
  std::vector<std::vector<double>> cols(names.size() - 1);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i == 0)
        ts.t.push_back(parse_double(cell));
      else if (i <= cols.size())
        cols[i - 1].push_back(parse_double(cell));
      ++i;
    }
    if (i != names.size()) throw ConfigError("csv: row width mismatch");
  }
  for (std::size_t j = 0; j < cols.size(); ++j)
    ts.add_column(names[j + 1], std::move(cols[j]));
  check_times(ts.t);
  return ts;
}

}  // namespace podgeq
