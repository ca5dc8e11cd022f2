#pragma once

#include <vector>

#include "dfskit/operators.hpp"

namespace dfskit {

/// Markovian generator: effective Hamiltonian, Lindblad operators F_a and a
/// positive semidefinite coefficient matrix a_ab.
class LindbladModel {
public:
  LindbladModel(Operator h_eff, std::vector<Operator> ops, Matrix coeff);

  /// Pure Hamiltonian dynamics.
  static LindbladModel hamiltonian_only(Operator h_eff);

  const Operator& h_eff() const noexcept { return h_eff_; }
  const std::vector<Operator>& ops() const noexcept { return ops_; }
  const Matrix& coeff() const noexcept { return coeff_; }
  /// Diagonalized jump operators L_k.
  const std::vector<Matrix>& jump_operators() const noexcept { return jumps_; }
  const HilbertSpace& space() const noexcept { return h_eff_.space(); }

  LindbladModel with_hamiltonian(Operator h) const;
  /// Appends ops with a block-diagonal coefficient block.
  LindbladModel with_extra_ops(const std::vector<Operator>& extra, const Matrix& block) const;

  /// d rho / dt.
  Matrix rhs(const Matrix& rho) const;

private:
  Operator h_eff_;
  std::vector<Operator> ops_;
  Matrix coeff_;
  // a = U diag(g) U^dag gives jump operators L_k = sqrt(g_k) sum_a U_ak F_a.
  std::vector<Matrix> jumps_;
  Matrix drift_;  // -i H - 1/2 sum_k L_k^dag L_k
};

/// -i[H, rho] + L_D[rho].
Matrix lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model);

struct EvolveOptions {
  /// Record every `stride`-th step (the final state is always recorded).
  std::size_t stride = 1;
  bool renormalize = false;
  /// Throw NumericalError when a recorded state has eigenvalue below this.
  double positivity_floor = -1e-6;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<StateDiagnostics> diagnostics;
};

/// Fixed-step classical RK4.
Trajectory lindblad_evolve(const DensityMatrix& rho0, const LindbladModel& model, double t_final, std::size_t steps,
                           const EvolveOptions& opts = {});

/// Default step count: 100 steps per unit time, at least 1.
std::size_t default_steps(double t_final);

/// Upper bound on the spectral radius of the generator:
/// 2 ||H||_2 + 2 sum_k ||L_k||_2^2.
double generator_norm_bound(const LindbladModel& model);

/// default_steps(t_final), raised so that dt * generator_norm_bound stays
/// below 2 (inside the RK4 stability region).
std::size_t stable_steps(const LindbladModel& model, double t_final);

DensityMatrix osr_evolve(const DensityMatrix& rho, const KrausSet& kraus);

/// Gaussian average of R_z(phi) on every qubit: element (b, b') is scaled by
/// exp(-alpha (w(b) - w(b'))^2), w counting 1 bits.
DensityMatrix collective_dephasing_channel(const DensityMatrix& rho, double alpha);

/// Tr_B[U (rho_s (x) rho_b) U^dag] with U = exp(-i H t).
DensityMatrix joint_evolve_and_trace(const DensityMatrix& rho_s, const DensityMatrix& rho_b, const Operator& h, double t);

} // namespace dfskit
