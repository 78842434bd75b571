#pragma once

#include <string>

#include "podgeq/fd_solver.hpp"
#include "podgeq/pod.hpp"

namespace podgeq {

// Portable container: text header (magic PODGEQ1, record kind, sizes, times or
// eigenvalues with 17 significant digits), then raw little-endian 64-bit
// floats, row-major per field. Round-trips are bitwise.
void write_snapshots(const std::string& path, const SnapshotSet& s);
SnapshotSet read_snapshots(const std::string& path);

void write_basis(const std::string& path, const PodBasis& b);
PodBasis read_basis(const std::string& path);

}  // namespace podgeq
