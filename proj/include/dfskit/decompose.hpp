#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfskit/finder.hpp"

namespace dfskit {

/// One irreducible component: n copies (lambda) of a d-dimensional irrep
/// (mu). Basis column lambda * d + mu holds |lambda_mu>.
struct SubsystemBlock {
  std::string label;
  /// 2J for angular-momentum labeled blocks.
  std::optional<int> two_j;
  Eigen::Index multiplicity = 0;
  Eigen::Index block_dim = 0;
  Matrix basis;
  double residual = 0.0;

  /// Columns for copy lambda.
  Matrix copy(Eigen::Index lambda) const { return basis.middleCols(lambda * block_dim, block_dim); }
};

struct SubsystemDecomposition {
  HilbertSpace space;
  std::vector<SubsystemBlock> blocks;

  /// Sum of n_J * d_J over blocks.
  Eigen::Index covered_dim() const;
  /// All block bases side by side.
  Matrix full_basis() const;
};

struct DecomposeOptions {
  std::uint64_t seed = 0xDF5;
  double tol = 1e-8;
};

/// Splits the algebra generated by `generators` (closed under adjoint, with
/// the identity added) into blocks I_n (x) M(d).
SubsystemDecomposition decompose_algebra(const std::vector<Operator>& generators, const DecomposeOptions& opts = {});

/// Attaches J = (d - 1) / 2 labels; meant for collective qubit models.
void label_angular_momentum(SubsystemDecomposition& decomp);

struct BlockCheck {
  std::string label;
  std::size_t op_index = 0;
  /// max over lambda of ||M^lambda - M^0||_F.
  double lambda_deviation = 0.0;
  /// ||(I - P_block) S P_block||_F.
  double leakage = 0.0;
};

struct SubsystemReport {
  std::vector<BlockCheck> checks;
  double max_deviation = 0.0;
  bool pass = false;
};

/// Checks that every op acts as I_n (x) M on every block, with M independent
/// of lambda. Passes when the worst deviation and leakage are <= tol.
SubsystemReport verify_subsystem_condition(const SubsystemDecomposition& decomp, const std::vector<Operator>& ops,
                                           double tol = 1e-8);
SubsystemReport verify_subsystem_condition(const SubsystemDecomposition& decomp, const ErrorModel& model,
                                           double tol = 1e-8);

} // namespace dfskit
