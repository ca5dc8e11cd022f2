#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfskit/decompose.hpp"
#include "dfskit/dynamics.hpp"
#include "dfskit/finder.hpp"

namespace dfskit::models {

struct KnownDfs {
  std::vector<cplx> eigen_tuple;
  Eigen::Index dim = 0;
  std::string description;
  std::optional<Matrix> frame;
  /// Also left invariant by the model's system Hamiltonian.
  bool hs_invariant = false;
};

/// Bath, coupling and bath state for exact joint evolution. The system
/// occupies the leading factors of the joint space.
struct JointEnvironment {
  Operator system_hamiltonian;
  Operator bath_hamiltonian;
  std::vector<std::pair<Operator, Operator>> couplings;
  DensityMatrix bath_state;

  Operator hamiltonian(bool with_system = true) const;
};

struct ModelBundle {
  std::string name;
  ErrorModel error_model;
  std::optional<LindbladModel> lindblad;
  std::vector<KnownDfs> known_dfs;
  std::optional<JointEnvironment> environment;
  std::vector<std::string> notes;
};

/// Error op S_z on K qubits; one known subspace per Hamming weight.
ModelBundle weak_collective_dephasing(std::size_t k, double rate = 1.0);

/// Error ops S_+, S_-, S_z on N qubits.
ModelBundle strong_collective(std::size_t n, double rate = 1.0);

struct EitParams {
  std::size_t n = 2;
  std::vector<double> omegas;  // one per lower level; defaults to all 1
  double delta = 0.0;
  /// delta_1 .. delta_{N-1}, or all N values. Missing entries are 0.
  std::vector<double> raman;
  std::vector<double> rates;  // A_{N+1,i}; defaults to all 1
};
ModelBundle eit_model(const EitParams& params);
/// States with no excited component that also satisfy sum_i Omega_i <i|psi> = 0.
Subspace eit_dark_subspace(const EitParams& params);
Operator eit_hamiltonian(const EitParams& params);

struct DickeParams {
  std::size_t n = 2;
  std::size_t cutoff = 3;
  cplx g = 1.0;
  std::vector<cplx> s{0.8};
  double kappa = 1.0;
};
ModelBundle dicke_cavity_model(const DickeParams& params);

/// Q_X(N) generated by sigma^x_{2j-1} sigma^x_{2j}. `full_group` lists every
/// non-identity group element instead of the generators.
ModelBundle multiple_qubit_error_model(std::size_t n, bool full_group = false, double rate = 1.0);

struct SpinBosonParams {
  std::size_t n = 2;
  std::size_t modes = 1;
  std::size_t cutoff = 3;
  std::vector<cplx> g_plus;   // per mode; defaults to 0.6
  std::vector<double> g_z;    // per mode; defaults to 0.4
  std::vector<double> omega;  // per mode; defaults to 1.0
  bool collective = true;
  double rate = 1.0;
};
ModelBundle spin_boson_toy(const SpinBosonParams& params);

/// Every model name accepted by the CLI.
std::vector<std::string> model_names();

// Closed forms.
std::uint64_t binomial(unsigned n, unsigned k);
/// N! / ((N/2 + 1)! (N/2)!) for even N, 0 for odd N.
std::uint64_t singlet_dimension(unsigned n);
/// (2J + 1) N! / ((N/2 + J + 1)! (N/2 - J)!), with two_j = 2J.
std::uint64_t spin_multiplicity(unsigned n, unsigned two_j);
/// Number of states annihilated by S_- on N qubits (sum of multiplicities).
std::uint64_t lowest_weight_dimension(unsigned n);
double encoding_efficiency(std::uint64_t dim, unsigned n);
/// 1 - (3/2) log2(N) / N.
double efficiency_asymptote(unsigned n);

// Explicit states.
/// Orthonormalized products of two-qubit singlets over all non-crossing
/// pairings; spans the c = 0 subspace of S_+, S_-, S_z.
Matrix singlet_frame(std::size_t n);
/// Columns |0_L>, |1_L> of the four-qubit code.
Matrix four_qubit_codewords();
/// J = 1/2 block of three qubits: copies lambda = 0, 1 and mu = 0, 1.
SubsystemDecomposition three_qubit_subsystem_block();
/// Character subspace of Q_X(N): one sign per pair.
Matrix qx_character_frame(const std::vector<int>& signs);

} // namespace dfskit::models
