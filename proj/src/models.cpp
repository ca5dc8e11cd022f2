#include "dfskit/models.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <functional>
#include <sstream>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"

namespace dfskit::models {

namespace {

Matrix basis_selection(Eigen::Index d, const std::vector<Eigen::Index>& idx) {
  Matrix q = Matrix::Zero(d, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) q(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
  return q;
}

// Truncated mode bath with occupation weights proportional to ratio^n.
DensityMatrix mode_state(std::size_t cutoff, double ratio) {
  const auto c = static_cast<Eigen::Index>(cutoff);
  Matrix m = Matrix::Zero(c, c);
  double w = 1.0, total = 0.0;
  for (Eigen::Index n = 0; n < c; ++n) {
    m(n, n) = w;
    total += w;
    w *= ratio;
  }
  return DensityMatrix(HilbertSpace({cutoff}), m / total);
}

Operator number_op(const HilbertSpace& space, std::size_t site) {
  const Operator b = boson_annihilation(space, site);
  return b.adjoint() * b;
}

Matrix vector_to_column(const Vector& v) { return Matrix(v); }

void require_range(std::size_t v, std::size_t lo, std::size_t hi, const char* what) {
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << what << " must be in [" << lo << ", " << hi << "], got " << v;
    throw ValidationError(os.str());
  }
}

// sum over i of sigma_i^+ (x) b etc. on a qubits-plus-mode space.
Operator atoms_times_mode(const HilbertSpace& space, std::size_t n, Pauli which, bool mode_dagger) {
  Operator b = boson_annihilation(space, n);
  if (mode_dagger) b = b.adjoint();
  Operator acc = Operator::zero(space);
  for (std::size_t i = 0; i < n; ++i) acc = acc + pauli_on(space, i, which) * b;
  return acc;
}

} // namespace

Operator JointEnvironment::hamiltonian(bool with_system) const {
  const Operator hs = with_system ? system_hamiltonian : Operator::zero(system_hamiltonian.space());
  return assemble_joint_hamiltonian(hs, bath_hamiltonian, couplings);
}

// ------------------------------------------------------------ closed forms

std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) throw NumericalError("binomial: result exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

std::uint64_t singlet_dimension(unsigned n) {
  if (n % 2 != 0) return 0;
  return binomial(n, n / 2) / (n / 2 + 1);
}

std::uint64_t spin_multiplicity(unsigned n, unsigned two_j) {
  if (two_j > n || (n - two_j) % 2 != 0) return 0;
  const unsigned k = (n - two_j) / 2;          // N/2 - J
  const unsigned denom = (n + two_j) / 2 + 1;  // N/2 + J + 1
  const unsigned __int128 num = static_cast<unsigned __int128>(binomial(n, k)) * (two_j + 1);
  return static_cast<std::uint64_t>(num / denom);
}

std::uint64_t lowest_weight_dimension(unsigned n) {
  std::uint64_t total = 0;
  for (unsigned two_j = n % 2; two_j <= n; two_j += 2) total += spin_multiplicity(n, two_j);
  return total;
}

double encoding_efficiency(std::uint64_t dim, unsigned n) {
  if (dim == 0 || n == 0) return 0.0;
  return std::log2(static_cast<double>(dim)) / n;
}

double efficiency_asymptote(unsigned n) { return 1.0 - 1.5 * std::log2(static_cast<double>(n)) / n; }

// --------------------------------------------------------- explicit states

Matrix singlet_frame(std::size_t n) {
  if (n == 0 || n % 2 != 0) return Matrix(static_cast<Eigen::Index>(std::size_t{1} << n), 0);
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairings;
  std::vector<std::pair<std::size_t, std::size_t>> current;
  // Non-crossing perfect matchings of sites [lo, hi).
  std::function<void(std::vector<std::pair<std::size_t, std::size_t>>&, std::size_t, std::size_t,
                     const std::function<void()>&)>
      match = [&](std::vector<std::pair<std::size_t, std::size_t>>& acc, std::size_t lo, std::size_t hi,
                  const std::function<void()>& done) {
        if (lo >= hi) {
          done();
          return;
        }
        for (std::size_t j = lo + 1; j < hi; j += 2) {
          acc.emplace_back(lo, j);
          match(acc, lo + 1, j, [&] { match(acc, j + 1, hi, done); });
          acc.pop_back();
        }
      };
  match(current, 0, n, [&] { pairings.push_back(current); });

  Matrix cols(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(pairings.size()));
  const double amp = std::pow(0.5, static_cast<double>(n) / 4.0);
  for (std::size_t p = 0; p < pairings.size(); ++p) {
    for (std::size_t x = 0; x < dim; ++x) {
      double v = amp;
      for (const auto& [a, b] : pairings[p]) {
        const std::size_t ba = (x >> (n - 1 - a)) & 1u;
        const std::size_t bb = (x >> (n - 1 - b)) & 1u;
        if (ba == bb) {
          v = 0.0;
          break;
        }
        if (ba == 1) v = -v;  // (|01> - |10>) / sqrt(2)
      }
      cols(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(p)) = v;
    }
  }
  return linalg::canonical_frame(linalg::orthonormal_span(cols, 1e-10));
}

Matrix four_qubit_codewords() {
  Matrix f = Matrix::Zero(16, 2);
  const double h = 0.5;
  // |0_L> = |s>_12 |s>_34
  f(0b0101, 0) = h;
  f(0b0110, 0) = -h;
  f(0b1001, 0) = -h;
  f(0b1010, 0) = h;
  const double r = 1.0 / std::sqrt(12.0);
  f(0b0011, 1) = 2 * r;
  f(0b1100, 1) = 2 * r;
  f(0b0101, 1) = -r;
  f(0b1010, 1) = -r;
  f(0b0110, 1) = -r;
  f(0b1001, 1) = -r;
  return f;
}

SubsystemDecomposition three_qubit_subsystem_block() {
  Matrix b = Matrix::Zero(8, 4);
  const double s2 = 1.0 / std::sqrt(2.0), s6 = 1.0 / std::sqrt(6.0);
  // lambda = 0
  b(0b010, 0) = s2;
  b(0b100, 0) = -s2;
  b(0b011, 1) = s2;
  b(0b101, 1) = -s2;
  // lambda = 1
  b(0b001, 2) = -2 * s6;
  b(0b010, 2) = s6;
  b(0b100, 2) = s6;
  b(0b110, 3) = 2 * s6;
  b(0b101, 3) = -s6;
  b(0b011, 3) = -s6;
  SubsystemBlock block;
  block.label = "J=1/2";
  block.two_j = 1;
  block.multiplicity = 2;
  block.block_dim = 2;
  block.basis = b;
  return SubsystemDecomposition{HilbertSpace::qubits(3), {block}};
}

Matrix qx_character_frame(const std::vector<int>& signs) {
  const std::size_t pairs = signs.size();
  // Pair bases: +1 -> (|00>+|11>, |01>+|10>), -1 -> (|00>-|11>, |01>-|10>).
  const double s = 1.0 / std::sqrt(2.0);
  Matrix frame = Matrix::Ones(1, 1);
  for (std::size_t p = 0; p < pairs; ++p) {
    if (signs[p] != 1 && signs[p] != -1) throw ValidationError("qx_character_frame: signs must be +1 or -1");
    Matrix local = Matrix::Zero(4, 2);
    local(0b00, 0) = s;
    local(0b11, 0) = signs[p] * s;
    local(0b01, 1) = s;
    local(0b10, 1) = signs[p] * s;
    frame = kron(frame, local);
  }
  return frame;
}

// ----------------------------------------------------------------- models

ModelBundle weak_collective_dephasing(std::size_t k, double rate) {
  require_range(k, 1, 12, "weak_collective_dephasing: K");
  const HilbertSpace space = HilbertSpace::qubits(k);
  const Operator sz = collective_spin(space, Pauli::Z);
  ErrorModel em(space, {sz});
  em.op_labels = {"S_z"};
  em.coeff_matrix = Matrix::Constant(1, 1, rate);
  em.system_hamiltonian = Operator::zero(space);
  em.hermitian_closed = true;
  ModelBundle b{"weak_dephasing", em, LindbladModel(Operator::zero(space), {sz}, Matrix::Constant(1, 1, rate)), {}, {}, {}};

  const auto d = static_cast<Eigen::Index>(space.dim());
  for (std::size_t w = 0; w <= k; ++w) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index x = 0; x < d; ++x) {
      if (static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(x))) == w) idx.push_back(x);
    }
    KnownDfs kd;
    kd.eigen_tuple = {cplx(static_cast<double>(k) - 2.0 * static_cast<double>(w), 0.0)};
    kd.dim = static_cast<Eigen::Index>(binomial(static_cast<unsigned>(k), static_cast<unsigned>(w)));
    kd.description = "states with " + std::to_string(w) + " excitations";
    kd.frame = basis_selection(d, idx);
    kd.hs_invariant = true;
    b.known_dfs.push_back(std::move(kd));
  }
  // Reverse so the list runs from the lowest eigenvalue, matching the finder.
  std::reverse(b.known_dfs.begin(), b.known_dfs.end());

  const HilbertSpace bath({3});
  const Operator bq = boson_annihilation(bath, 0);
  b.environment = JointEnvironment{Operator::zero(space), 0.9 * number_op(bath, 0), {{sz, 0.7 * (bq + bq.adjoint())}},
                                   mode_state(3, 0.4)};
  b.notes.push_back("subspace dimensions follow the binomial coefficients C(K, w), eigenvalue K - 2w");
  return b;
}

ModelBundle strong_collective(std::size_t n, double rate) {
  require_range(n, 2, 12, "strong_collective: N");
  const HilbertSpace space = HilbertSpace::qubits(n);
  const Operator sp = collective_spin(space, Pauli::Plus);
  const Operator sm = collective_spin(space, Pauli::Minus);
  const Operator sz = collective_spin(space, Pauli::Z);
  ErrorModel em(space, {sp, sm, sz});
  em.op_labels = {"S_+", "S_-", "S_z"};
  em.coeff_matrix = rate * Matrix::Identity(3, 3);
  em.system_hamiltonian = Operator::zero(space);
  em.hermitian_closed = true;
  ModelBundle b{"strong_collective", em, LindbladModel(Operator::zero(space), {sp, sm, sz}, rate * Matrix::Identity(3, 3)),
                {}, {}, {}};
  if (n % 2 == 0) {
    KnownDfs kd;
    kd.eigen_tuple = {0.0, 0.0, 0.0};
    kd.dim = static_cast<Eigen::Index>(singlet_dimension(static_cast<unsigned>(n)));
    kd.description = "products of two-qubit singlets over non-crossing pairings";
    kd.frame = singlet_frame(n);
    kd.hs_invariant = true;
    b.known_dfs.push_back(std::move(kd));
    if (n == 4) b.notes.push_back("explicit codewords available: |0_L> = |s>|s>, |1_L> from the J=0 coupling of two triplets");
  } else {
    b.notes.push_back("odd N: no state is annihilated by all collective operators");
  }
  if (n <= 6) {
    const HilbertSpace bath({3});
    const Operator bq = boson_annihilation(bath, 0);
    b.environment = JointEnvironment{Operator::zero(space), 0.9 * number_op(bath, 0),
                                     {{0.6 * sp, bq}, {0.6 * sm, bq.adjoint()}, {sz, 0.4 * (bq + bq.adjoint())}},
                                     mode_state(3, 0.4)};
  }
  return b;
}

Operator eit_hamiltonian(const EitParams& p) {
  const std::size_t n = p.n;
  const HilbertSpace space({n + 1});
  std::vector<double> omegas = p.omegas.empty() ? std::vector<double>(n, 1.0) : p.omegas;
  std::vector<double> raman = p.raman;
  if (omegas.size() != n) throw ValidationError("eit_model: need one Rabi frequency per lower level");
  if (raman.size() + 1 == n) raman.push_back(0.0);
  if (raman.empty()) raman.assign(n, 0.0);
  if (raman.size() != n) throw ValidationError("eit_model: Raman detunings must have N-1 or N entries");
  Matrix h = Matrix::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
  const auto top = static_cast<Eigen::Index>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    h(ii, ii) = p.delta + raman[i];
    h(ii, top) = -0.5 * omegas[i];
    h(top, ii) = -0.5 * omegas[i];
  }
  return Operator(space, h);
}

ModelBundle eit_model(const EitParams& p) {
  if (p.n < 2 || p.n > 64) throw ValidationError("eit_model: N must be in [2, 64]");
  const std::size_t n = p.n;
  const HilbertSpace space({n + 1});
  std::vector<double> rates = p.rates.empty() ? std::vector<double>(n, 1.0) : p.rates;
  if (rates.size() != n) throw ValidationError("eit_model: need one emission rate per lower level");
  for (double r : rates) {
    if (!(r >= 0.0)) throw ValidationError("eit_model: rates must be >= 0");
  }
  const Operator hs = eit_hamiltonian(p);

  std::vector<Operator> ops;
  std::vector<std::string> labels;
  std::vector<double> kept_rates;
  for (std::size_t i = 0; i < n; ++i) {
    if (rates[i] == 0.0) continue;
    ops.push_back(transition_op(space, i, n));
    labels.push_back("T_" + std::to_string(i + 1) + "," + std::to_string(n + 1));
    kept_rates.push_back(rates[i]);
  }
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(ops.size()), static_cast<Eigen::Index>(ops.size()));
  for (std::size_t i = 0; i < kept_rates.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = kept_rates[i];
  ErrorModel em(space, ops);
  em.op_labels = labels;
  em.coeff_matrix = a;
  em.system_hamiltonian = hs;
  ModelBundle b{"eit", em, LindbladModel(hs, ops, a), {}, {}, {}};

  const auto d = static_cast<Eigen::Index>(n + 1);
  KnownDfs lower;
  if (ops.empty()) {
    lower.dim = d;
    lower.description = "no emission channels: the whole space";
    lower.frame = Matrix(Matrix::Identity(d, d));
  } else {
    lower.eigen_tuple.assign(ops.size(), 0.0);
    lower.dim = static_cast<Eigen::Index>(n);
    lower.description = "states with no excited-level component";
    lower.frame = Matrix(Matrix::Identity(d, d).leftCols(d - 1));
  }
  b.known_dfs.push_back(lower);

  const Subspace dark = eit_dark_subspace(p);
  KnownDfs refined;
  refined.eigen_tuple.assign(ops.size(), 0.0);
  refined.dim = dark.dim();
  refined.description = "dark states: additionally sum_i Omega_i <i|psi> = 0";
  refined.frame = dark.frame;
  refined.hs_invariant = true;
  b.known_dfs.push_back(refined);

  std::ostringstream note;
  note << "computed dark-state dimension " << dark.dim() << " (one linear constraint on " << n
       << " lower levels); the source text states N-2 = " << static_cast<long>(n) - 2;
  b.notes.push_back(note.str());
  b.notes.push_back("nonzero Raman detunings are accepted; check_hs_invariance reports the resulting leakage");

  const HilbertSpace bath({2});
  const Operator bq = boson_annihilation(bath, 0);
  std::vector<std::pair<Operator, Operator>> couplings;
  for (std::size_t i = 0; i < n; ++i) {
    if (rates[i] == 0.0) continue;
    const double g = std::sqrt(rates[i]);
    couplings.emplace_back(g * transition_op(space, i, n), bq.adjoint());
    couplings.emplace_back(g * transition_op(space, n, i), bq);
  }
  b.environment = JointEnvironment{hs, Operator::zero(bath), couplings, mode_state(2, 0.0)};
  return b;
}

Subspace eit_dark_subspace(const EitParams& p) {
  const std::size_t n = p.n;
  std::vector<double> omegas = p.omegas.empty() ? std::vector<double>(n, 1.0) : p.omegas;
  if (omegas.size() != n) throw ValidationError("eit_dark_subspace: need one Rabi frequency per lower level");
  Matrix row = Matrix::Zero(1, static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i < n; ++i) row(0, static_cast<Eigen::Index>(i)) = omegas[i];
  // The excited level is excluded as a separate constraint.
  Matrix constraints = Matrix::Zero(2, static_cast<Eigen::Index>(n + 1));
  constraints.row(0) = row;
  constraints(1, static_cast<Eigen::Index>(n)) = 1.0;
  const Matrix frame = linalg::null_space(constraints, 1e-12);
  return Subspace(HilbertSpace({n + 1}), linalg::canonical_frame(frame));
}

ModelBundle dicke_cavity_model(const DickeParams& p) {
  require_range(p.n, 1, 8, "dicke_cavity_model: N");
  if (p.cutoff < 2) throw ValidationError("dicke_cavity_model: cutoff must be >= 2");
  if (p.s.empty() || p.s.size() > 3) throw ValidationError("dicke_cavity_model: need 1 to 3 mode-environment couplings");
  std::vector<std::size_t> dims(p.n, 2);
  dims.push_back(p.cutoff);
  const HilbertSpace space(dims);
  const std::size_t n = p.n;
  const Operator b = boson_annihilation(space, n);
  const Operator hac = p.g * atoms_times_mode(space, n, Pauli::Plus, false) +
                       std::conj(p.g) * atoms_times_mode(space, n, Pauli::Minus, true);
  ErrorModel em(space, {b});
  em.op_labels = {"b"};
  em.coeff_matrix = Matrix::Constant(1, 1, p.kappa);
  em.system_hamiltonian = hac;
  ModelBundle bundle{"dicke", em, LindbladModel(hac, {b}, Matrix::Constant(1, 1, p.kappa)), {}, {}, {}};

  const HilbertSpace atoms = HilbertSpace::qubits(n);
  const auto da = static_cast<Eigen::Index>(atoms.dim());
  const auto c = static_cast<Eigen::Index>(p.cutoff);
  Vector vac = Vector::Zero(c);
  vac(0) = 1.0;
  KnownDfs empty_cavity;
  empty_cavity.eigen_tuple = {0.0};
  empty_cavity.dim = da;
  empty_cavity.description = "any atomic state with the cavity in vacuum";
  empty_cavity.frame = kron(Matrix(Matrix::Identity(da, da)), vector_to_column(vac));
  bundle.known_dfs.push_back(empty_cavity);

  const Matrix lowest =
      linalg::canonical_frame(linalg::null_space(collective_spin(atoms, Pauli::Minus).matrix(), 1e-10));
  KnownDfs dark;
  dark.eigen_tuple = {0.0};
  dark.dim = lowest.cols();
  dark.description = "S_- |psi> = 0 with the cavity in vacuum";
  dark.frame = kron(lowest, vector_to_column(vac));
  dark.hs_invariant = true;
  bundle.known_dfs.push_back(dark);

  std::ostringstream note;
  note << "lowest-weight dimension " << lowest_weight_dimension(static_cast<unsigned>(n))
       << " = sum over J of the spin multiplicities";
  bundle.notes.push_back(note.str());

  std::vector<std::size_t> bdims(p.s.size(), 2);
  const HilbertSpace bath(bdims);
  std::vector<std::pair<Operator, Operator>> couplings;
  Operator hb = Operator::zero(bath);
  DensityMatrix bath_state = mode_state(2, 0.0);
  for (std::size_t k = 0; k < p.s.size(); ++k) {
    const Operator a = boson_annihilation(bath, k);
    couplings.emplace_back(b, p.s[k] * a.adjoint());
    couplings.emplace_back(b.adjoint(), std::conj(p.s[k]) * a);
    hb = hb + (0.5 + 0.3 * static_cast<double>(k)) * number_op(bath, k);
    if (k > 0) bath_state = tensor(bath_state, mode_state(2, 0.0));
  }
  bundle.environment = JointEnvironment{hac, hb, couplings, bath_state};
  return bundle;
}

ModelBundle multiple_qubit_error_model(std::size_t n, bool full_group, double rate) {
  if (n < 2 || n > 10 || n % 2 != 0) throw ValidationError("multiple_qubit_error_model: N must be even and in [2, 10]");
  const HilbertSpace space = HilbertSpace::qubits(n);
  const std::size_t pairs = n / 2;
  auto pair_string = [&](std::uint64_t mask) {
    std::string s(n, 'I');
    for (std::size_t j = 0; j < pairs; ++j) {
      if ((mask >> j) & 1u) s[2 * j] = s[2 * j + 1] = 'X';
    }
    return s;
  };
  std::vector<std::uint64_t> masks;
  if (full_group) {
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << pairs); ++m) masks.push_back(m);
  } else {
    for (std::size_t j = 0; j < pairs; ++j) masks.push_back(std::uint64_t{1} << j);
  }
  std::vector<Operator> ops;
  std::vector<std::string> labels;
  for (auto m : masks) {
    labels.push_back(pair_string(m));
    ops.push_back(pauli_string(space, labels.back()));
  }
  const auto na = static_cast<Eigen::Index>(ops.size());
  ErrorModel em(space, ops);
  em.op_labels = labels;
  em.coeff_matrix = rate * Matrix::Identity(na, na);
  em.system_hamiltonian = Operator::zero(space);
  em.hermitian_closed = true;
  ModelBundle b{"qx", em, LindbladModel(Operator::zero(space), ops, rate * Matrix::Identity(na, na)), {}, {}, {}};

  for (std::uint64_t chars = 0; chars < (std::uint64_t{1} << pairs); ++chars) {
    // Enumerate so that -1 characters sort first, as the finder does.
    std::vector<int> signs(pairs);
    for (std::size_t j = 0; j < pairs; ++j) signs[j] = ((chars >> (pairs - 1 - j)) & 1u) ? 1 : -1;
    KnownDfs kd;
    for (auto m : masks) {
      int c = 1;
      for (std::size_t j = 0; j < pairs; ++j) {
        if ((m >> j) & 1u) c *= signs[j];
      }
      kd.eigen_tuple.push_back(static_cast<double>(c));
    }
    kd.frame = qx_character_frame(signs);
    kd.dim = kd.frame->cols();
    std::ostringstream os;
    os << "character (";
    for (std::size_t j = 0; j < pairs; ++j) os << (j ? "," : "") << (signs[j] > 0 ? "+1" : "-1");
    os << ")";
    kd.description = os.str();
    kd.hs_invariant = true;
    b.known_dfs.push_back(std::move(kd));
  }

  const HilbertSpace bath = HilbertSpace::qubits(1);
  const Pauli cycle[] = {Pauli::X, Pauli::Z, Pauli::Y};
  std::vector<std::pair<Operator, Operator>> couplings;
  for (std::size_t j = 0; j < pairs; ++j) {
    couplings.emplace_back(pauli_string(space, pair_string(std::uint64_t{1} << j)),
                           (0.5 + 0.2 * static_cast<double>(j)) * pauli_on(bath, 0, cycle[j % 3]));
  }
  Matrix rb(2, 2);
  rb << 0.7, 0.0, 0.0, 0.3;
  b.environment = JointEnvironment{Operator::zero(space), 0.5 * pauli_on(bath, 0, Pauli::Z), couplings,
                                   DensityMatrix(bath, rb)};
  b.notes.push_back(full_group ? "operators are all non-identity group elements" : "operators are the group generators");
  return b;
}

ModelBundle spin_boson_toy(const SpinBosonParams& p) {
  require_range(p.n, 1, 12, "spin_boson_toy: N");
  if (p.modes < 1 || p.cutoff < 2) throw ValidationError("spin_boson_toy: need at least one mode and cutoff >= 2");
  double bath_dim = std::pow(static_cast<double>(p.cutoff), static_cast<double>(p.modes));
  if (std::ldexp(bath_dim, static_cast<int>(p.n)) > 65536.0) {
    throw NumericalError("spin_boson_toy: joint dimension exceeds 2^16");
  }
  auto pick = [&](const auto& v, auto fallback, std::size_t k) {
    if (v.empty()) return static_cast<decltype(fallback)>(fallback);
    if (v.size() != p.modes) throw ValidationError("spin_boson_toy: per-mode list has the wrong length");
    return static_cast<decltype(fallback)>(v[k]);
  };
  const HilbertSpace space = HilbertSpace::qubits(p.n);
  const HilbertSpace bath(std::vector<std::size_t>(p.modes, p.cutoff));

  std::vector<Operator> ops;
  std::vector<std::string> labels;
  if (p.collective) {
    ops = {collective_spin(space, Pauli::Plus), collective_spin(space, Pauli::Minus), collective_spin(space, Pauli::Z)};
    labels = {"S_+", "S_-", "S_z"};
  } else {
    for (std::size_t i = 0; i < p.n; ++i) {
      for (auto [which, name] : {std::pair{Pauli::Plus, "+"}, {Pauli::Minus, "-"}, {Pauli::Z, "z"}}) {
        ops.push_back(pauli_on(space, i, which));
        labels.push_back(std::string("sigma_") + std::to_string(i + 1) + "^" + name);
      }
    }
  }
  const auto na = static_cast<Eigen::Index>(ops.size());
  ErrorModel em(space, ops);
  em.op_labels = labels;
  em.coeff_matrix = p.rate * Matrix::Identity(na, na);
  em.system_hamiltonian = Operator::zero(space);
  em.hermitian_closed = true;
  ModelBundle b{"spin_boson", em, LindbladModel(Operator::zero(space), ops, p.rate * Matrix::Identity(na, na)), {}, {}, {}};

  std::vector<std::pair<Operator, Operator>> couplings;
  Operator hb = Operator::zero(bath);
  DensityMatrix bath_state = mode_state(p.cutoff, 0.3);
  for (std::size_t k = 0; k < p.modes; ++k) {
    const cplx gp = pick(p.g_plus, cplx(0.6), k);
    const double gz = pick(p.g_z, 0.4, k);
    const double om = pick(p.omega, 1.0, k);
    const Operator bk = boson_annihilation(bath, k);
    hb = hb + om * number_op(bath, k);
    if (k > 0) bath_state = tensor(bath_state, mode_state(p.cutoff, 0.3));
    for (std::size_t i = 0; i < p.n; ++i) {
      // Site-dependent factors break the permutation symmetry when requested.
      const double f = p.collective ? 1.0 : 1.0 + 0.37 * static_cast<double>(i);
      couplings.emplace_back(f * gp * pauli_on(space, i, Pauli::Plus), bk);
      couplings.emplace_back(f * std::conj(gp) * pauli_on(space, i, Pauli::Minus), bk.adjoint());
      couplings.emplace_back(f * gz * pauli_on(space, i, Pauli::Z), bk + bk.adjoint());
    }
  }
  b.environment = JointEnvironment{Operator::zero(space), hb, couplings, bath_state};

  if (p.collective && p.n % 2 == 0) {
    KnownDfs kd;
    kd.eigen_tuple = {0.0, 0.0, 0.0};
    kd.dim = static_cast<Eigen::Index>(singlet_dimension(static_cast<unsigned>(p.n)));
    kd.description = "collective singlets";
    kd.frame = singlet_frame(p.n);
    kd.hs_invariant = true;
    b.known_dfs.push_back(std::move(kd));
  } else if (!p.collective) {
    b.notes.push_back("independent couplings: the per-site operators have no common degenerate eigenspace, so no DFS");
  } else {
    b.notes.push_back("odd N: no collective singlet");
  }
  return b;
}

std::vector<std::string> model_names() {
  return {"weak_dephasing", "strong_collective", "eit", "dicke", "qx", "spin_boson"};
}

} // namespace dfskit::models
