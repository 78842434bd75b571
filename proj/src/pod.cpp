#include "podgeq/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Jacobi>

#include "podgeq/errors.hpp"

namespace podgeq {

namespace {

constexpr double kDropRel = 1e-12;
constexpr double kOrthoTol = 1e-8;

GridSpec common_grid(const FieldRefs& snaps) {
  if (snaps.empty()) throw ConfigError("correlation: empty snapshot set");
  const GridSpec g = snaps.front()->grid;
  for (const ScalarField* s : snaps)
    if (!(s->grid == g)) throw ConfigError("correlation: snapshot grid mismatch");
  return g;
}

Eigen::MatrixXd value_stack(const FieldRefs& snaps, const GridSpec& g) {
  const Eigen::Index nn = static_cast<Eigen::Index>(g.n_cells) * g.n_cells;
  Eigen::MatrixXd s(nn, static_cast<Eigen::Index>(snaps.size()));
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    s.col(j) = Eigen::Map<const Eigen::VectorXd>(snaps[j]->values.data(), nn);
  return s;
}

void gradient_stacks(const FieldRefs& snaps, const GridSpec& g,
                     Eigen::MatrixXd& sx, Eigen::MatrixXd& sy) {
  const Eigen::Index nn = static_cast<Eigen::Index>(g.n_cells) * g.n_cells;
  sx.resize(nn, static_cast<Eigen::Index>(snaps.size()));
  sy.resize(nn, static_cast<Eigen::Index>(snaps.size()));
  ScalarField fx, fy;
  for (Eigen::Index j = 0; j < sx.cols(); ++j) {
    gradient_c4(*snaps[j], fx, fy);
    sx.col(j) = Eigen::Map<const Eigen::VectorXd>(fx.values.data(), nn);
    sy.col(j) = Eigen::Map<const Eigen::VectorXd>(fy.values.data(), nn);
  }
}

FieldRefs to_refs(const std::vector<ScalarField>& fields) {
  FieldRefs refs;
  refs.reserve(fields.size());
  for (const ScalarField& f : fields) refs.push_back(&f);
  return refs;
}

}  // namespace

FieldRefs snapshot_refs(const SnapshotSet& s) {
  FieldRefs refs;
  refs.reserve(s.u_hat.size() + s.dq.size());
  for (const ScalarField& f : s.u_hat) refs.push_back(&f);
  for (const ScalarField& f : s.dq) refs.push_back(&f);
  return refs;
}

Eigen::MatrixXd correlation(const FieldRefs& snaps, InnerProductKind kind) {
  const GridSpec g = common_grid(snaps);
  const Eigen::Index m = static_cast<Eigen::Index>(snaps.size());
  const double nn = static_cast<double>(g.n_cells) * g.n_cells;
  Eigen::MatrixXd k(m, m);
  {
    const Eigen::MatrixXd s = value_stack(snaps, g);
    k.noalias() = s.transpose() * s;
  }
  if (kind == InnerProductKind::H1) {
    Eigen::MatrixXd sx, sy;
    gradient_stacks(snaps, g, sx, sy);
    k.noalias() += sx.transpose() * sx;
    k.noalias() += sy.transpose() * sy;
  }
  return (k + k.transpose()) * (0.5 / (static_cast<double>(m) * nn));
}

void sym_eig(const Eigen::MatrixXd& k, Eigen::VectorXd& eigs, Eigen::MatrixXd& vecs) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n) throw ConfigError("sym_eig: matrix must be square");
  const double scale = k.norm();
  if (scale > 0.0 && (k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ConfigError("sym_eig: matrix not symmetric");

  Eigen::MatrixXd a = k;
  vecs = Eigen::MatrixXd::Identity(n, n);
  eigs.resize(n);
  if (scale == 0.0) {
    eigs.setZero();
    return;
  }

  // Rotations update two columns plus the pivot block; the rotated rows are
  // restored from the columns, keeping the iterate exactly symmetric.
  const double thresh = 1e-14 * scale / static_cast<double>(n);
  Eigen::Matrix<double, Eigen::Dynamic, 2> t(n, 2);
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= thresh) continue;
        converged = false;
        Eigen::JacobiRotation<double> j;
        j.makeJacobi(a(p, p), a(p, q), a(q, q));
        t.col(0) = a.col(p);
        t.col(1) = a.col(q);
        t.applyOnTheRight(0, 1, j);
        Eigen::Matrix2d blk;
        blk << t(p, 0), t(p, 1), t(q, 0), t(q, 1);
        blk.applyOnTheLeft(0, 1, j.adjoint());
        t(p, 0) = blk(0, 0);
        t(p, 1) = blk(0, 1);
        t(q, 0) = blk(1, 0);
        t(q, 1) = blk(1, 1);
        a.col(p) = t.col(0);
        a.col(q) = t.col(1);
        a.row(p) = t.col(0).transpose();
        a.row(q) = t.col(1).transpose();
        vecs.applyOnTheRight(static_cast<int>(p), static_cast<int>(q), j);
      }
  }
  if (!converged) throw NumericalError("sym_eig: jacobi sweeps did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  Eigen::MatrixXd sorted(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigs(i) = a(order[i], order[i]);
    sorted.col(i) = vecs.col(order[i]);
  }
  vecs = std::move(sorted);
}

int select_rank(const Eigen::VectorXd& eigs, double e_pod) {
  const Eigen::VectorXd pos = eigs.cwiseMax(0.0);
  // tails accumulated from the small end so a tail exactly at the threshold
  // compares equal instead of suffering cancellation against the total
  Eigen::VectorXd tails = Eigen::VectorXd::Zero(pos.size() + 1);
  for (Eigen::Index r = pos.size() - 1; r >= 0; --r) tails(r) = tails(r + 1) + pos(r);
  const double total = tails(0);
  if (total <= 0.0) throw NumericalError("select_rank: all-zero spectrum");
  for (Eigen::Index r = 1; r <= pos.size(); ++r)
    if (tails(r) <= e_pod * total) return static_cast<int>(r);
  return static_cast<int>(pos.size());
}

PodBasis build_basis(const FieldRefs& snaps, InnerProductKind kind,
                     const Eigen::VectorXd& eigs, const Eigen::MatrixXd& vecs, int r) {
  const GridSpec g = common_grid(snaps);
  const Eigen::Index m = static_cast<Eigen::Index>(snaps.size());
  if (r < 1 || r > eigs.size() || eigs.size() != m || vecs.cols() != m)
    throw ConfigError("build_basis: rank or decomposition size mismatch");
  const double lam1 = std::max(eigs(0), 0.0);
  if (eigs(r - 1) < kDropRel * lam1 || eigs(r - 1) <= 0.0)
    throw NumericalError("build_basis: rank exceeds numerical rank");

  Eigen::MatrixXd w = vecs.leftCols(r);
  for (Eigen::Index j = 0; j < r; ++j)
    w.col(j) /= std::sqrt(static_cast<double>(m) * eigs(j));
  const Eigen::MatrixXd modes = value_stack(snaps, g) * w;

  PodBasis basis;
  basis.grid = g;
  basis.kind = kind;
  basis.eigs = eigs.cwiseMax(0.0);
  basis.modes.reserve(static_cast<std::size_t>(r));
  const Eigen::Index nn = modes.rows();
  for (Eigen::Index j = 0; j < r; ++j) {
    ScalarField f = make_field(g);
    Eigen::Map<Eigen::VectorXd>(f.values.data(), nn) = modes.col(j);
    basis.modes.push_back(std::move(f));
  }

  Eigen::MatrixXd gram(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i; j < r; ++j)
      gram(i, j) = gram(j, i) = inner(basis.modes[i], basis.modes[j], kind);
  const double dev = (gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
  if (dev > kOrthoTol)
    throw NumericalError("build_basis: orthonormality check failed, deviation " +
                         std::to_string(dev));
  return basis;
}

PodBasis build_basis(const FieldRefs& snaps, InnerProductKind kind, double e_pod) {
  const Eigen::MatrixXd k = correlation(snaps, kind);
  Eigen::VectorXd eigs;
  Eigen::MatrixXd vecs;
  sym_eig(k, eigs, vecs);
  return build_basis(snaps, kind, eigs, vecs, select_rank(eigs, e_pod));
}

PodBasis build_basis(const SnapshotSet& snaps, InnerProductKind kind, double e_pod) {
  return build_basis(snapshot_refs(snaps), kind, e_pod);
}

PodBasis build_basis_fixed_rank(const FieldRefs& snaps, InnerProductKind kind, int r) {
  const Eigen::MatrixXd k = correlation(snaps, kind);
  Eigen::VectorXd eigs;
  Eigen::MatrixXd vecs;
  sym_eig(k, eigs, vecs);
  return build_basis(snaps, kind, eigs, vecs, r);
}

double projection_residual(const FieldRefs& snaps, const PodBasis& basis) {
  const GridSpec g = common_grid(snaps);
  if (!(g == basis.grid)) throw ConfigError("projection_residual: grid mismatch");
  const int r = basis.rank();
  const Eigen::Index nn = static_cast<Eigen::Index>(g.n_cells) * g.n_cells;
  const bool h1 = basis.kind == InnerProductKind::H1;

  FieldRefs mode_refs = to_refs(basis.modes);
  const Eigen::MatrixXd p = value_stack(mode_refs, g);
  Eigen::MatrixXd px, py;
  if (h1) gradient_stacks(mode_refs, g, px, py);

  // ||s - proj s||^2 = ||s||^2 - ||coeffs||^2 for an orthonormal basis;
  // snapshots are processed in blocks to bound memory.
  const Eigen::Index block = 256;
  double total = 0.0;
  for (std::size_t lo = 0; lo < snaps.size(); lo += block) {
    const std::size_t hi = std::min(snaps.size(), lo + block);
    const FieldRefs chunk(snaps.begin() + lo, snaps.begin() + hi);
    const Eigen::Index mb = static_cast<Eigen::Index>(chunk.size());
    const Eigen::MatrixXd s = value_stack(chunk, g);
    Eigen::MatrixXd c(r, mb);
    c.noalias() = p.transpose() * s;
    Eigen::VectorXd norm_sq = s.colwise().squaredNorm().transpose();
    if (h1) {
      Eigen::MatrixXd sx, sy;
      gradient_stacks(chunk, g, sx, sy);
      c.noalias() += px.transpose() * sx;
      c.noalias() += py.transpose() * sy;
      norm_sq += sx.colwise().squaredNorm().transpose();
      norm_sq += sy.colwise().squaredNorm().transpose();
    }
    c /= static_cast<double>(nn);
    norm_sq /= static_cast<double>(nn);
    for (Eigen::Index j = 0; j < mb; ++j)
      total += std::max(0.0, norm_sq(j) - c.col(j).squaredNorm());
  }
  return total / static_cast<double>(snaps.size());
}

std::vector<ScalarField> residual_fields(const FieldRefs& snaps, const PodBasis& basis) {
  const GridSpec g = common_grid(snaps);
  if (!(g == basis.grid)) throw ConfigError("residual_fields: grid mismatch");
  const Eigen::Index nn = static_cast<Eigen::Index>(g.n_cells) * g.n_cells;
  const bool h1 = basis.kind == InnerProductKind::H1;

  FieldRefs mode_refs = to_refs(basis.modes);
  const Eigen::MatrixXd p = value_stack(mode_refs, g);
  const Eigen::MatrixXd s = value_stack(snaps, g);
  Eigen::MatrixXd c(basis.rank(), s.cols());
  c.noalias() = p.transpose() * s;
  if (h1) {
    Eigen::MatrixXd px, py, sx, sy;
    gradient_stacks(mode_refs, g, px, py);
    gradient_stacks(snaps, g, sx, sy);
    c.noalias() += px.transpose() * sx;
    c.noalias() += py.transpose() * sy;
  }
  c /= static_cast<double>(nn);
  const Eigen::MatrixXd res = s - p * c;

  std::vector<ScalarField> out;
  out.reserve(snaps.size());
  for (Eigen::Index j = 0; j < res.cols(); ++j) {
    ScalarField f = make_field(g);
    Eigen::Map<Eigen::VectorXd>(f.values.data(), nn) = res.col(j);
    out.push_back(std::move(f));
  }
  return out;
}

Eigen::VectorXd project_coeffs(const ScalarField& f, const PodBasis& basis) {
  Eigen::VectorXd a(basis.rank());
  for (int i = 0; i < basis.rank(); ++i) a(i) = inner(f, basis.modes[i], basis.kind);
  return a;
}

ScalarField reconstruct_mean_free(const PodBasis& basis, const Eigen::VectorXd& a) {
  if (a.size() != basis.rank())
    throw ConfigError("reconstruct_mean_free: coefficient size mismatch");
  ScalarField out = make_field(basis.grid);
  for (int i = 0; i < basis.rank(); ++i) out.values += a(i) * basis.modes[i].values;
  return out;
}

}  // namespace podgeq
