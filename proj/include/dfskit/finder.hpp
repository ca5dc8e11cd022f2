#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfskit/operators.hpp"

namespace dfskit {

/// Error operators of an open system plus the optional coefficient matrix and
/// system Hamiltonian that accompany them.
struct ErrorModel {
  ErrorModel(HilbertSpace space, std::vector<Operator> ops) : space(std::move(space)), ops(std::move(ops)) {}

  HilbertSpace space;
  std::vector<Operator> ops;
  std::vector<std::string> op_labels;
  std::optional<Matrix> coeff_matrix;
  std::optional<Operator> system_hamiltonian;
  bool hermitian_closed = false;

  /// Throws ValidationError when any invariant is broken.
  void validate() const;
};

/// Orthonormal frame, optionally labeled by the scalar each error operator
/// takes on it.
struct Subspace {
  Subspace(HilbertSpace space, Matrix frame, std::optional<std::vector<cplx>> eigen_tuple = std::nullopt);

  HilbertSpace space;
  Matrix frame;
  std::optional<std::vector<cplx>> eigen_tuple;
  /// max over ops of ||S F - c F||_F / ||S||_F, filled in by the finder.
  double residual = 0.0;

  Eigen::Index dim() const noexcept { return frame.cols(); }
  Matrix projector() const { return frame * frame.adjoint(); }
};

struct FinderOptions {
  /// Relative eigenvalue clustering tolerance.
  double cluster_tol = 1e-8;
  /// Relative singular value threshold for null spaces.
  double null_tol = 1e-8;
  /// Receives notes such as dropped dependent operators.
  std::function<void(const std::string&)> log;
};

/// Maximal subspaces on which every error operator acts as a scalar, sorted
/// by eigenvalue tuple.
std::vector<Subspace> find_df_subspaces(const ErrorModel& model, const FinderOptions& opts = {});

/// Common null space of all error operators. May have zero columns.
Subspace find_semisimple_null_dfs(const ErrorModel& model, const FinderOptions& opts = {});

/// Joint eigenspaces of pairwise commuting generators (Pauli strings in
/// practice). Throws ValidationError when two generators do not commute.
std::vector<Subspace> abelian_group_dfs(const std::vector<Operator>& generators, const FinderOptions& opts = {});

/// ||(I - P_found) F_known|| for the best-matching found subspace.
double containment_residual(const std::vector<Subspace>& found, const Matrix& known_frame);

} // namespace dfskit
