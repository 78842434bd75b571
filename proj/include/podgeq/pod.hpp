#pragma once

#include <vector>

#include <Eigen/Dense>

#include "podgeq/fd_solver.hpp"
#include "podgeq/grid.hpp"

namespace podgeq {

// Orthonormal reduced basis in the declared inner product, together with the
// full eigenvalue spectrum of the snapshot correlation matrix.
struct PodBasis {
  GridSpec grid;
  InnerProductKind kind = InnerProductKind::H1;
  std::vector<ScalarField> modes;
  Eigen::VectorXd eigs;

  int rank() const { return static_cast<int>(modes.size()); }
};

// Non-owning view of a snapshot collection; callers keep the fields alive.
using FieldRefs = std::vector<const ScalarField*>;

// Mean-free solution fields followed by their difference quotients.
FieldRefs snapshot_refs(const SnapshotSet& s);

// K[i][j] = (1/m) inner(s_i, s_j, kind), symmetrized by averaging with the
// transpose.
Eigen::MatrixXd correlation(const FieldRefs& snaps, InnerProductKind kind);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps; pairs are
// sorted by descending eigenvalue, eigenvector columns orthonormal.
void sym_eig(const Eigen::MatrixXd& k, Eigen::VectorXd& eigs, Eigen::MatrixXd& vecs);

// Smallest r whose eigenvalue tail ratio sum_{l>r} / sum_l is at most e_pod.
int select_rank(const Eigen::VectorXd& eigs, double e_pod);

// psi_k = (1/sqrt(m lambda_k)) sum_j (v_k)_j s_j for the leading r pairs;
// orthonormality is re-checked on the assembled modes.
PodBasis build_basis(const FieldRefs& snaps, InnerProductKind kind,
                     const Eigen::VectorXd& eigs, const Eigen::MatrixXd& vecs, int r);

// Full pipeline with automatic rank selection.
PodBasis build_basis(const FieldRefs& snaps, InnerProductKind kind, double e_pod);
PodBasis build_basis(const SnapshotSet& snaps, InnerProductKind kind, double e_pod);

// Full pipeline at a caller-chosen rank.
PodBasis build_basis_fixed_rank(const FieldRefs& snaps, InnerProductKind kind, int r);

// (1/m) sum_i ||s_i - proj s_i||^2 in the basis inner product; equals the
// eigenvalue tail when the basis was built from these snapshots.
double projection_residual(const FieldRefs& snaps, const PodBasis& basis);

// s_i - proj s_i for each snapshot, projection in the basis inner product.
std::vector<ScalarField> residual_fields(const FieldRefs& snaps, const PodBasis& basis);

// Coefficients <f, psi_i> in the basis inner product.
Eigen::VectorXd project_coeffs(const ScalarField& f, const PodBasis& basis);

// sum_i a_i psi_i.
ScalarField reconstruct_mean_free(const PodBasis& basis, const Eigen::VectorXd& a);

}  // namespace podgeq
