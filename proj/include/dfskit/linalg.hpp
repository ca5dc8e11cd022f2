#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/SparseCore>

#include "dfskit/hilbert.hpp"

namespace dfskit::linalg {

/// Orthonormal basis for the null space of `a`: right singular vectors whose
/// singular value is <= `threshold`. Tall inputs are reduced by QR first.
Matrix null_space(const Matrix& a, double threshold);

/// Orthonormal basis for the column span of `cols`, dropping directions with
/// residual norm <= `tol` (two-pass modified Gram-Schmidt).
Matrix orthonormal_span(const Matrix& cols, double tol = 1e-10);

double spectral_norm(const Matrix& a);

/// Rotates each column so its largest-magnitude entry is real and positive.
void orient_columns(Matrix& frame);

double min_eigenvalue_hermitian(const Matrix& h);

bool is_diagonal(const Matrix& a, double tol);

/// Groups values whose distance is <= tol (single linkage on the complex
/// plane). Returns clusters as index lists, ordered by first member.
std::vector<std::vector<Eigen::Index>> cluster_values(const Vector& values, double tol);

/// Basis of span(frame) that depends only on the subspace: pivoted
/// Gram-Schmidt on the projector's columns, then oriented.
Matrix canonical_frame(const Matrix& frame);

/// Multiplies by a fixed operator, through a sparse copy when the operator is
/// mostly zeros. `op` must outlive the action.
class OpAction {
public:
  explicit OpAction(const Matrix& op);
  Matrix apply(const Matrix& x) const;
  bool sparse() const noexcept { return use_sparse_; }

private:
  const Matrix* dense_;
  Eigen::SparseMatrix<cplx> sparse_;
  bool use_sparse_ = false;
};

/// max over columns of || frame^dag frame - I ||.
double orthonormality_error(const Matrix& frame);

using Rng = std::mt19937_64;

Vector random_state(Eigen::Index n, Rng& rng);
Matrix random_hermitian(Eigen::Index n, Rng& rng);
Matrix random_unitary(Eigen::Index n, Rng& rng);
Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng);

} // namespace dfskit::linalg
