#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfskit/hilbert.hpp"

namespace dfskit {

/// Dense operator on a labeled Hilbert space.
class Operator {
public:
  Operator(HilbertSpace space, Matrix matrix);

  static Operator identity(const HilbertSpace& space);
  static Operator zero(const HilbertSpace& space);

  const HilbertSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

  Operator adjoint() const;
  bool is_hermitian(double tol = 1e-12) const;
  bool is_unitary(double tol = 1e-10) const;
  /// Frobenius norm.
  double norm() const { return matrix_.norm(); }

  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(const Operator& rhs) const;
  friend Operator operator*(cplx s, const Operator& op) {
    return Operator(op.space_, s * op.matrix_);
  }

private:
  HilbertSpace space_;
  Matrix matrix_;
};

Operator commutator(const Operator& a, const Operator& b);
Operator kron(const Operator& a, const Operator& b);
Matrix kron(const Matrix& a, const Matrix& b);

/// Normalized pure state (norm within 1e-12).
class StateVector {
public:
  StateVector(HilbertSpace space, Vector amplitudes);

  /// Rescales `amplitudes` to unit norm; throws on a zero vector.
  static StateVector normalized(HilbertSpace space, Vector amplitudes);
  static StateVector basis(const HilbertSpace& space, std::size_t index);
  /// Qubit basis state from a bitstring such as "0110" (site 0 first).
  static StateVector from_bits(std::string_view bits);

  const HilbertSpace& space() const noexcept { return space_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }

private:
  HilbertSpace space_;
  Vector amplitudes_;
};

struct StateDiagnostics {
  double trace_deviation = 0.0;
  double hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;
};

/// Hermitian, unit-trace, positive semidefinite matrix. The checked
/// constructor enforces the invariants; `unchecked` is for engine outputs
/// whose drift is tracked through diagnostics().
class DensityMatrix {
public:
  DensityMatrix(HilbertSpace space, Matrix matrix);

  static DensityMatrix unchecked(HilbertSpace space, Matrix matrix);
  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(const HilbertSpace& space);

  const HilbertSpace& space() const noexcept { return space_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

  StateDiagnostics diagnostics() const;

private:
  struct NoCheck {};
  DensityMatrix(HilbertSpace space, Matrix matrix, NoCheck);

  HilbertSpace space_;
  Matrix matrix_;
};

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Where a Kraus operator came from when it was extracted from a joint
/// unitary: bath output state, bath eigenvector and its weight.
struct KrausLabel {
  std::size_t bath_out = 0;
  std::size_t bath_eigvec = 0;
  double weight = 1.0;
};

/// Trace-preserving set of Kraus operators (sum of A^dag A = I within 1e-10).
class KrausSet {
public:
  explicit KrausSet(std::vector<Operator> ops, std::vector<KrausLabel> labels = {});

  const std::vector<Operator>& ops() const noexcept { return ops_; }
  const std::vector<KrausLabel>& labels() const noexcept { return labels_; }
  const HilbertSpace& space() const { return ops_.front().space(); }
  std::size_t size() const noexcept { return ops_.size(); }

  /// max-abs deviation of sum A^dag A from the identity.
  double normalization_error() const;

private:
  std::vector<Operator> ops_;
  std::vector<KrausLabel> labels_;
};

enum class Pauli { X, Y, Z, Plus, Minus };

/// 2x2 matrix in the {|0>,|1>} basis with sigma_z|0> = +|0> and
/// sigma_minus = |0><1|.
Matrix pauli_matrix(Pauli which);
Pauli parse_pauli(char c);

/// Places `local` on factor `site` with identities elsewhere.
Operator embed(const HilbertSpace& space, std::size_t site, const Matrix& local);

Operator pauli_on(const HilbertSpace& space, std::size_t site, Pauli which);
Operator collective_spin(const HilbertSpace& space, Pauli which);
/// |a><b| on a single-factor space.
Operator transition_op(const HilbertSpace& space, std::size_t a, std::size_t b);
/// Truncated annihilation operator, <n-1|b|n> = sqrt(n).
Operator boson_annihilation(const HilbertSpace& space, std::size_t site);

/// Product of single-qubit Paulis, e.g. "XIZ" (I, X, Y, Z, +, -).
Operator pauli_string(const HilbertSpace& space, std::string_view letters, cplx coeff = 1.0);

/// H_S (x) I_B + I_S (x) H_B + sum_a S_a (x) B_a.
Operator assemble_joint_hamiltonian(const Operator& hs, const Operator& hb,
                                    const std::vector<std::pair<Operator, Operator>>& couplings);

/// exp(scale * op). Hermitian op with purely imaginary scale goes through an
/// eigendecomposition; anything else through scaling and squaring.
Operator matrix_exp(const Operator& op, cplx scale);

/// Trace out every factor not listed in `keep`. Kept factors stay in their
/// original order.
Matrix partial_trace(const Matrix& rho, const HilbertSpace& space, std::vector<std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep);

/// Bath eigenvalues at or below this are dropped during Kraus extraction.
inline constexpr double kBathEigenCut = 1e-12;

/// A_(mu,nu) = sqrt(lambda_nu) <mu|U|nu>. The system occupies the leading
/// factors of U's space and the bath the trailing ones.
KrausSet kraus_from_joint_unitary(const Operator& unitary, const DensityMatrix& rho_b);

/// Kraus set of minimal length for the same channel, built from the Choi
/// matrix.
KrausSet minimal_kraus(const KrausSet& kraus, double tol = 1e-12);

/// Population of the highest level of `factor`; used to monitor boson
/// truncation.
double top_level_population(const DensityMatrix& rho, std::size_t factor);

} // namespace dfskit
