#include "podgeq/run_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "podgeq/errors.hpp"

namespace podgeq {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class KeyMap {
 public:
  explicit KeyMap(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: expected key = value, got '" + line + "'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("config: empty key or value in '" + line + "'");
      if (!entries_.emplace(key, value).second)
        throw ConfigError("config: duplicate key '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
    std::string v = it->second;
    entries_.erase(it);
    return v;
  }

  std::string take_or(const std::string& key, const std::string& fallback) {
    return has(key) ? take(key) : fallback;
  }

  void reject_leftovers() const {
    if (!entries_.empty())
      throw ConfigError("config: unknown key '" + entries_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> entries_;
};

double as_double(const std::string& key, const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + v + "'");
  return x;
}

int as_int(const std::string& key, const std::string& v) {
  const double x = as_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9)
    throw ConfigError("config: key '" + key + "' must be an integer, got '" + v + "'");
  return static_cast<int>(x);
}

}  // namespace

RomConfig RunConfig::rom() const {
  RomConfig r;
  r.equation = fd.equation;
  r.d = fd.d;
  r.s_l = fd.s_l;
  r.p = fd.p;
  r.dt = fd.dt;
  r.flow = fd.flow;
  return r;
}

AdaptiveConfig RunConfig::adaptive() const {
  AdaptiveConfig a;
  a.check_period = adaptive_check_period;
  a.burst_len = adaptive_burst_len;
  a.eps = adaptive_eps;
  a.max_rank = adaptive_max_rank;
  a.fd = fd;
  return a;
}

RunConfig parse_config_text(const std::string& text) {
  KeyMap keys(text);
  RunConfig cfg;

  const std::string equation = keys.take("equation");
  if (equation == "viscous")
    cfg.fd.equation = Equation::Viscous;
  else if (equation == "curvature")
    cfg.fd.equation = Equation::Curvature;
  else
    throw ConfigError("config: equation must be viscous or curvature, got '" +
                      equation + "'");

  const std::string scheme = keys.take("scheme");
  if (scheme == "rk3")
    cfg.fd.scheme = Scheme::ExplicitRK3;
  else if (scheme == "semi_implicit")
    cfg.fd.scheme = Scheme::SemiImplicit;
  else
    throw ConfigError("config: scheme must be rk3 or semi_implicit, got '" + scheme +
                      "'");

  cfg.fd.d = as_double("d", keys.take("d"));
  cfg.fd.s_l = as_double("s_l", keys.take("s_l"));
  cfg.fd.p[0] = as_double("p_x", keys.take("p_x"));
  cfg.fd.p[1] = as_double("p_y", keys.take("p_y"));

  const std::string flow = keys.take("flow");
  if (flow == "steady")
    cfg.fd.flow.variant = FlowVariant::Steady;
  else if (flow == "time_periodic")
    cfg.fd.flow.variant = FlowVariant::TimePeriodic;
  else
    throw ConfigError("config: flow must be steady or time_periodic, got '" + flow +
                      "'");
  cfg.fd.flow.amplitude = as_double("A", keys.take("A"));
  cfg.fd.flow.theta = as_double("theta", keys.take("theta"));

  cfg.fd.grid = GridSpec::of(as_int("n_cells", keys.take("n_cells")));
  cfg.fd.dt = as_double("dt", keys.take("dt"));
  cfg.t_final = as_double("t_final", keys.take("t_final"));
  cfg.e_pod = as_double("e_pod", keys.take("e_pod"));

  const std::string inner = keys.take("inner_product");
  if (inner == "h1")
    cfg.inner = InnerProductKind::H1;
  else if (inner == "l2")
    cfg.inner = InnerProductKind::L2;
  else
    throw ConfigError("config: inner_product must be h1 or l2, got '" + inner + "'");

  cfg.record_stride = as_int("record_stride", keys.take_or("record_stride", "1"));

  cfg.has_adaptive = keys.has("adaptive.check_period") || keys.has("adaptive.burst_len") ||
                     keys.has("adaptive.eps") || keys.has("adaptive.max_rank");
  cfg.adaptive_check_period =
      as_double("adaptive.check_period", keys.take_or("adaptive.check_period", "0.5"));
  cfg.adaptive_burst_len =
      as_int("adaptive.burst_len", keys.take_or("adaptive.burst_len", "50"));
  cfg.adaptive_eps = as_double("adaptive.eps", keys.take_or("adaptive.eps", "0.001"));
  cfg.adaptive_max_rank =
      as_int("adaptive.max_rank", keys.take_or("adaptive.max_rank", "64"));

  keys.reject_leftovers();

  if (!(cfg.fd.dt > 0.0)) throw ConfigError("config: dt must be positive");
  if (!(cfg.t_final > 0.0)) throw ConfigError("config: t_final must be positive");
  if (!(cfg.fd.s_l > 0.0)) throw ConfigError("config: s_l must be positive");
  if (cfg.fd.d < 0.0) throw ConfigError("config: d must be nonnegative");
  if (std::abs(cfg.fd.p.norm() - 1.0) > 1e-12)
    throw ConfigError("config: (p_x, p_y) must be a unit vector");
  if (!(cfg.e_pod > 0.0) || cfg.e_pod >= 1.0)
    throw ConfigError("config: e_pod must lie in (0, 1)");
  if (cfg.record_stride < 1) throw ConfigError("config: record_stride must be >= 1");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace podgeq
