#pragma once

#include <cstdint>
#include <vector>

#include "dfskit/finder.hpp"

namespace dfskit {

struct StabilizerReport {
  bool pass = false;
  /// max over samples of ||D(v)|psi> - |psi>||.
  double group_deviation = 0.0;
  /// max over ops of ||(c I - S)|psi>||.
  double differential_deviation = 0.0;
};

/// Applies D(v) = exp(sum_a (c_a I - S_a) v_a) for `samples` random v in
/// [-1, 1]^A and checks that |psi> is fixed.
StabilizerReport stabilizer_check(const StateVector& psi, const ErrorModel& model, const std::vector<cplx>& eigen_tuple,
                                  std::size_t samples = 16, std::uint64_t seed = 0xDF5, double tol = 1e-8);

struct DegeneracyReport {
  Matrix gamma;
  Eigen::Index rank = 0;
  double residual = 0.0;
  bool pass = false;
};

/// gamma_ab = tr(F^dag A_a^dag A_b F) / k and the deviation of each
/// compressed product from gamma_ab I.
DegeneracyReport qecc_degeneracy_check(const KrausSet& kraus, const Subspace& sub, double tol = 1e-8);

struct InvarianceReport {
  double leakage = 0.0;
  bool pass = false;
};

/// leakage = ||(I - P) H P||_2; passes when leakage <= tol * ||H||_F.
InvarianceReport check_hs_invariance(const Subspace& sub, const Operator& hs, double tol = 1e-8);

/// Kraus set of exp(-i t H) traced over a random bath, where H couples each
/// op S to a random bath operator B as S (x) B + h.c. and H_S = 0.
KrausSet random_environment_kraus(const std::vector<Operator>& ops, std::uint64_t seed, double t = 0.7,
                                  std::size_t bath_dim = 2);

} // namespace dfskit
