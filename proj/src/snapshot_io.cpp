#include "podgeq/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "podgeq/errors.hpp"

namespace podgeq {

namespace {

constexpr const char* kMagic = "PODGEQ1";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_le(double v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  std::uint64_t sw = 0;
  for (int i = 0; i < 8; ++i) sw = (sw << 8) | ((bits >> (8 * i)) & 0xffu);
  std::memcpy(&v, &sw, 8);
  return v;
}

void write_values_line(std::ostream& out, const char* label,
                       const std::vector<double>& vals) {
  out << label;
  for (double v : vals) out << " " << fmt17(v);
  out << "\n";
}

// Fields are serialized row-major: x index outer, y index inner.
void write_field(std::ostream& out, const ScalarField& f) {
  const int n = f.grid.n_cells;
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = to_le(f.values(i, j));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

ScalarField read_field(std::istream& in, const GridSpec& g, const std::string& path) {
  ScalarField f = make_field(g);
  const int n = g.n_cells;
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(row.size() * sizeof(double)))
      throw ConfigError("truncated payload in '" + path + "'");
    for (int j = 0; j < n; ++j) f.values(i, j) = to_le(row[static_cast<std::size_t>(j)]);
  }
  return f;
}

struct Header {
  std::string kind;
  int n_cells = 0;
  long count = 0;
  std::string inner;
  std::vector<double> times, ubar, eigs;
};

std::vector<double> parse_values(std::istringstream& ss, const std::string& path) {
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  if (!ss.eof()) throw ConfigError("malformed header values in '" + path + "'");
  return vals;
}

Header read_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw ConfigError("bad magic in '" + path + "' (expected " + kMagic + ")");
  Header h;
  while (std::getline(in, line)) {
    if (line == "payload") return h;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "kind") {
      ss >> h.kind;
    } else if (key == "n_cells") {
      ss >> h.n_cells;
    } else if (key == "count") {
      ss >> h.count;
    } else if (key == "inner") {
      ss >> h.inner;
    } else if (key == "times") {
      h.times = parse_values(ss, path);
    } else if (key == "ubar") {
      h.ubar = parse_values(ss, path);
    } else if (key == "eigs") {
      h.eigs = parse_values(ss, path);
    } else {
      throw ConfigError("unknown header line '" + line + "' in '" + path + "'");
    }
    if (ss.fail() && !ss.eof())
      throw ConfigError("malformed header line '" + line + "' in '" + path + "'");
  }
  throw ConfigError("truncated payload in '" + path + "' (missing payload marker)");
}

}  // namespace

void write_snapshots(const std::string& path, const SnapshotSet& s) {
  if (s.times.size() != s.u_hat.size() || s.times.size() != s.u_bar.size() ||
      (!s.u_hat.empty() && s.dq.size() + 1 != s.u_hat.size()))
    throw ConfigError("write_snapshots: inconsistent snapshot set");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << kMagic << "\n";
  out << "kind snapshots\n";
  out << "n_cells " << s.grid.n_cells << "\n";
  out << "count " << s.u_hat.size() << "\n";
  write_values_line(out, "times", s.times);
  write_values_line(out, "ubar", s.u_bar);
  out << "payload\n";
  for (const ScalarField& f : s.u_hat) write_field(out, f);
  for (const ScalarField& f : s.dq) write_field(out, f);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

SnapshotSet read_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  const Header h = read_header(in, path);
  if (h.kind != "snapshots")
    throw ConfigError("dimension mismatch in '" + path + "': kind '" + h.kind +
                      "' is not snapshots");
  if (h.count < 1 || h.times.size() != static_cast<std::size_t>(h.count) ||
      h.ubar.size() != static_cast<std::size_t>(h.count))
    throw ConfigError("dimension mismatch in '" + path +
                      "': times/ubar lengths disagree with count");
  SnapshotSet s;
  s.grid = GridSpec::of(h.n_cells);
  s.times = h.times;
  s.u_bar = h.ubar;
  s.u_hat.reserve(static_cast<std::size_t>(h.count));
  s.dq.reserve(static_cast<std::size_t>(h.count) - 1);
  for (long k = 0; k < h.count; ++k) s.u_hat.push_back(read_field(in, s.grid, path));
  for (long k = 0; k + 1 < h.count; ++k) s.dq.push_back(read_field(in, s.grid, path));
  return s;
}

void write_basis(const std::string& path, const PodBasis& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << kMagic << "\n";
  out << "kind basis\n";
  out << "n_cells " << b.grid.n_cells << "\n";
  out << "count " << b.rank() << "\n";
  out << "inner " << (b.kind == InnerProductKind::H1 ? "h1" : "l2") << "\n";
  std::vector<double> eigs(b.eigs.data(), b.eigs.data() + b.eigs.size());
  write_values_line(out, "eigs", eigs);
  out << "payload\n";
  for (const ScalarField& f : b.modes) write_field(out, f);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

PodBasis read_basis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  const Header h = read_header(in, path);
  if (h.kind != "basis")
    throw ConfigError("dimension mismatch in '" + path + "': kind '" + h.kind +
                      "' is not basis");
  if (h.count < 1)
    throw ConfigError("dimension mismatch in '" + path + "': empty basis");
  if (h.inner != "h1" && h.inner != "l2")
    throw ConfigError("dimension mismatch in '" + path + "': unknown inner product '" +
                      h.inner + "'");
  PodBasis b;
  b.grid = GridSpec::of(h.n_cells);
  b.kind = h.inner == "h1" ? InnerProductKind::H1 : InnerProductKind::L2;
  b.eigs = Eigen::Map<const Eigen::VectorXd>(h.eigs.data(),
                                             static_cast<Eigen::Index>(h.eigs.size()));
  b.modes.reserve(static_cast<std::size_t>(h.count));
  for (long k = 0; k < h.count; ++k) b.modes.push_back(read_field(in, b.grid, path));
  return b;
}

}  // namespace podgeq
