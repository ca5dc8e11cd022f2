#include "dfskit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"

namespace dfskit {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
  if (!(a == b)) {
    std::ostringstream os;
    os << what << ": space mismatch " << a.to_string() << " vs " << b.to_string();
    throw ValidationError(os.str());
  }
}

// Strides for big-endian digit extraction.
std::vector<std::size_t> strides_of(const HilbertSpace& space) {
  const auto& dims = space.dims();
  std::vector<std::size_t> strides(dims.size());
  std::size_t s = 1;
  for (std::size_t f = dims.size(); f-- > 0;) {
    strides[f] = s;
    s *= dims[f];
  }
  return strides;
}

void add_embedded(Matrix& acc, const HilbertSpace& space, std::size_t site, const Matrix& local,
                  cplx coeff) {
  const std::size_t ld = space.local_dim(site);
  if (static_cast<std::size_t>(local.rows()) != ld || static_cast<std::size_t>(local.cols()) != ld) {
    throw ValidationError("embed: local operator does not match the factor dimension");
  }
  const std::size_t stride = strides_of(space)[site];
  const std::size_t dim = space.dim();
  for (std::size_t col = 0; col < dim; ++col) {
    const std::size_t digit = (col / stride) % ld;
    const std::size_t base = col - digit * stride;
    for (std::size_t r = 0; r < ld; ++r) {
      const cplx v = local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(digit));
      if (v != cplx(0.0)) {
        acc(static_cast<Eigen::Index>(base + r * stride), static_cast<Eigen::Index>(col)) += coeff * v;
      }
    }
  }
}

} // namespace

// ---------------------------------------------------------------- Operator

Operator::Operator(HilbertSpace space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(space_.dim());
  if (matrix_.rows() != d || matrix_.cols() != d) {
    std::ostringstream os;
    os << "Operator: matrix is " << matrix_.rows() << "x" << matrix_.cols() << " but space "
       << space_.to_string() << " has dimension " << d;
    throw ValidationError(os.str());
  }
}

Operator Operator::identity(const HilbertSpace& space) {
  const auto d = static_cast<Eigen::Index>(space.dim());
  return Operator(space, Matrix::Identity(d, d));
}

Operator Operator::zero(const HilbertSpace& space) {
  const auto d = static_cast<Eigen::Index>(space.dim());
  return Operator(space, Matrix::Zero(d, d));
}

Operator Operator::adjoint() const { return Operator(space_, matrix_.adjoint()); }

bool Operator::is_hermitian(double tol) const {
  return max_abs(matrix_ - matrix_.adjoint()) <= tol * std::max(1.0, max_abs(matrix_));
}

bool Operator::is_unitary(double tol) const {
  const Matrix g = matrix_.adjoint() * matrix_;
  return max_abs(g - Matrix::Identity(g.rows(), g.cols())) <= tol;
}

Operator Operator::operator+(const Operator& rhs) const {
  require_same_space(space_, rhs.space_, "Operator::operator+");
  return Operator(space_, matrix_ + rhs.matrix_);
}

Operator Operator::operator-(const Operator& rhs) const {
  require_same_space(space_, rhs.space_, "Operator::operator-");
  return Operator(space_, matrix_ - rhs.matrix_);
}

Operator Operator::operator*(const Operator& rhs) const {
  require_same_space(space_, rhs.space_, "Operator::operator*");
  return Operator(space_, matrix_ * rhs.matrix_);
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator kron(const Operator& a, const Operator& b) {
  return Operator(tensor(a.space(), b.space()), kron(a.matrix(), b.matrix()));
}

// ------------------------------------------------------------- StateVector

StateVector::StateVector(HilbertSpace space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != space_.dim()) {
    throw ValidationError("StateVector: amplitude count does not match the space");
  }
  if (std::abs(amplitudes_.norm() - 1.0) > 1e-12) {
    throw ValidationError("StateVector: state is not normalized");
  }
}

StateVector StateVector::normalized(HilbertSpace space, Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError("StateVector: cannot normalize a zero or non-finite vector");
  }
  return StateVector(std::move(space), amplitudes / n);
}

StateVector StateVector::basis(const HilbertSpace& space, std::size_t index) {
  if (index >= space.dim()) throw ValidationError("StateVector::basis: index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(space, std::move(v));
}

StateVector StateVector::from_bits(std::string_view bits) {
  std::size_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ValidationError("StateVector::from_bits: expected only 0/1");
    index = 2 * index + static_cast<std::size_t>(c - '0');
  }
  return basis(HilbertSpace::qubits(bits.size()), index);
}

// ----------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(HilbertSpace space, Matrix matrix, NoCheck)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(space_.dim());
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw ValidationError("DensityMatrix: matrix does not match the space");
  }
}

DensityMatrix::DensityMatrix(HilbertSpace space, Matrix matrix)
    : DensityMatrix(std::move(space), std::move(matrix), NoCheck{}) {
  const StateDiagnostics diag = diagnostics();
  if (diag.hermiticity_deviation > 1e-12) throw ValidationError("DensityMatrix: not Hermitian");
  if (diag.trace_deviation > 1e-12) throw ValidationError("DensityMatrix: trace is not 1");
  if (diag.min_eigenvalue < -1e-10) throw ValidationError("DensityMatrix: not positive semidefinite");
}

DensityMatrix DensityMatrix::unchecked(HilbertSpace space, Matrix matrix) {
  return DensityMatrix(std::move(space), std::move(matrix), NoCheck{});
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const Vector& a = psi.amplitudes();
  return DensityMatrix(psi.space(), a * a.adjoint(), NoCheck{});
}

DensityMatrix DensityMatrix::maximally_mixed(const HilbertSpace& space) {
  const auto d = static_cast<Eigen::Index>(space.dim());
  return DensityMatrix(space, Matrix::Identity(d, d) / static_cast<double>(d), NoCheck{});
}

StateDiagnostics DensityMatrix::diagnostics() const {
  StateDiagnostics out;
  out.trace_deviation = std::abs(matrix_.trace() - cplx(1.0));
  out.hermiticity_deviation = max_abs(matrix_ - matrix_.adjoint());
  out.min_eigenvalue = linalg::min_eigenvalue_hermitian(matrix_);
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::unchecked(tensor(a.space(), b.space()), kron(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------- KrausSet

KrausSet::KrausSet(std::vector<Operator> ops, std::vector<KrausLabel> labels)
    : ops_(std::move(ops)), labels_(std::move(labels)) {
  if (ops_.empty()) throw ValidationError("KrausSet: at least one operator is required");
  for (const auto& op : ops_) require_same_space(op.space(), ops_.front().space(), "KrausSet");
  if (!labels_.empty() && labels_.size() != ops_.size()) {
    throw ValidationError("KrausSet: label count does not match operator count");
  }
  if (normalization_error() > 1e-10) {
    std::ostringstream os;
    os << "KrausSet: sum of A^dag A deviates from identity by " << normalization_error();
    throw ValidationError(os.str());
  }
}

double KrausSet::normalization_error() const {
  const Eigen::Index d = ops_.front().dim();
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& op : ops_) acc.noalias() += op.matrix().adjoint() * op.matrix();
  return max_abs(acc - Matrix::Identity(d, d));
}

// ------------------------------------------------------------- constructors

Matrix pauli_matrix(Pauli which) {
  using namespace std::complex_literals;
  Matrix m = Matrix::Zero(2, 2);
  switch (which) {
    case Pauli::X: m << 0.0, 1.0, 1.0, 0.0; break;
    case Pauli::Y: m << 0.0, -1i, 1i, 0.0; break;
    case Pauli::Z: m << 1.0, 0.0, 0.0, -1.0; break;
    case Pauli::Plus: m(1, 0) = 1.0; break;   // |1><0|
    case Pauli::Minus: m(0, 1) = 1.0; break;  // |0><1|
  }
  return m;
}

Pauli parse_pauli(char c) {
  switch (c) {
    case 'x': case 'X': return Pauli::X;
    case 'y': case 'Y': return Pauli::Y;
    case 'z': case 'Z': return Pauli::Z;
    case '+': case 'p': case 'P': return Pauli::Plus;
    case '-': case 'm': case 'M': return Pauli::Minus;
    default: break;
  }
  throw ValidationError(std::string("unknown Pauli label '") + c + "'");
}

Operator embed(const HilbertSpace& space, std::size_t site, const Matrix& local) {
  if (site >= space.num_factors()) throw ValidationError("embed: site out of range");
  const auto d = static_cast<Eigen::Index>(space.dim());
  Matrix acc = Matrix::Zero(d, d);
  add_embedded(acc, space, site, local, 1.0);
  return Operator(space, std::move(acc));
}

Operator pauli_on(const HilbertSpace& space, std::size_t site, Pauli which) {
  if (site >= space.num_factors()) throw ValidationError("pauli_on: site out of range");
  if (space.local_dim(site) != 2) throw ValidationError("pauli_on: factor is not a qubit");
  return embed(space, site, pauli_matrix(which));
}

Operator collective_spin(const HilbertSpace& space, Pauli which) {
  if (!space.all_qubits()) throw ValidationError("collective_spin: every factor must be a qubit");
  const auto d = static_cast<Eigen::Index>(space.dim());
  Matrix acc = Matrix::Zero(d, d);
  const Matrix local = pauli_matrix(which);
  for (std::size_t site = 0; site < space.num_factors(); ++site) add_embedded(acc, space, site, local, 1.0);
  return Operator(space, std::move(acc));
}

Operator transition_op(const HilbertSpace& space, std::size_t a, std::size_t b) {
  if (space.num_factors() != 1) throw ValidationError("transition_op: space must have a single factor");
  if (a >= space.dim() || b >= space.dim()) throw ValidationError("transition_op: level out of range");
  Operator out = Operator::zero(space);
  Matrix m = out.matrix();
  m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
  return Operator(space, std::move(m));
}

Operator boson_annihilation(const HilbertSpace& space, std::size_t site) {
  const std::size_t c = space.local_dim(site);
  Matrix local = Matrix::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
  for (std::size_t n = 1; n < c; ++n) {
    local(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
  }
  return embed(space, site, local);
}

Operator pauli_string(const HilbertSpace& space, std::string_view letters, cplx coeff) {
  if (letters.size() != space.num_factors()) {
    throw ValidationError("pauli_string: length does not match the number of factors");
  }
  if (!space.all_qubits()) throw ValidationError("pauli_string: every factor must be a qubit");
  std::vector<Matrix> locals;
  for (char c : letters) {
    locals.push_back((c == 'I' || c == 'i') ? Matrix(Matrix::Identity(2, 2)) : pauli_matrix(parse_pauli(c)));
  }
  const std::size_t n = letters.size();
  const std::size_t dim = space.dim();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  // Every letter is monomial, so each column maps to at most one row.
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t row = 0;
    cplx amp = coeff;
    for (std::size_t f = 0; f < n && amp != cplx(0.0); ++f) {
      const std::size_t bit = (col >> (n - 1 - f)) & 1u;
      const Matrix& l = locals[f];
      const cplx top = l(0, static_cast<Eigen::Index>(bit));
      const cplx bottom = l(1, static_cast<Eigen::Index>(bit));
      if (top != cplx(0.0)) {
        amp *= top;
        row = 2 * row;
      } else {
        amp *= bottom;
        row = 2 * row + 1;
      }
    }
    if (amp != cplx(0.0)) m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = amp;
  }
  return Operator(space, std::move(m));
}

Operator assemble_joint_hamiltonian(const Operator& hs, const Operator& hb,
                                    const std::vector<std::pair<Operator, Operator>>& couplings) {
  const HilbertSpace joint = tensor(hs.space(), hb.space());
  const Matrix is = Matrix::Identity(hs.dim(), hs.dim());
  const Matrix ib = Matrix::Identity(hb.dim(), hb.dim());
  Matrix h = kron(hs.matrix(), ib) + kron(is, hb.matrix());
  for (const auto& [s, b] : couplings) {
    require_same_space(s.space(), hs.space(), "assemble_joint_hamiltonian (system coupling)");
    require_same_space(b.space(), hb.space(), "assemble_joint_hamiltonian (bath coupling)");
    h += kron(s.matrix(), b.matrix());
  }
  return Operator(joint, std::move(h));
}

Operator matrix_exp(const Operator& op, cplx scale) {
  const Matrix& m = op.matrix();
  if (!m.allFinite() || !std::isfinite(scale.real()) || !std::isfinite(scale.imag())) {
    throw ValidationError("matrix_exp: non-finite input");
  }
  const double growth = std::abs(scale) * linalg::spectral_norm(m);
  if (growth > 700.0 && scale.real() != 0.0) {
    throw NumericalError("matrix_exp: exponent norm too large, result would overflow");
  }
  Matrix out;
  if (scale.real() == 0.0 && op.is_hermitian(1e-14)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    const RealVector& w = es.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::exp(scale * w(i));
    out = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  } else {
    Matrix scaled = scale * m;
    out = scaled.exp();
  }
  if (!out.allFinite()) throw NumericalError("matrix_exp: result overflowed");
  return Operator(op.space(), std::move(out));
}

Matrix partial_trace(const Matrix& rho, const HilbertSpace& space, std::vector<std::size_t> keep) {
  if (keep.empty()) throw ValidationError("partial_trace: keep must list at least one factor");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw ValidationError("partial_trace: duplicate factor index");
  }
  if (keep.back() >= space.num_factors()) throw ValidationError("partial_trace: invalid factor index");
  if (static_cast<std::size_t>(rho.rows()) != space.dim() || rho.rows() != rho.cols()) {
    throw ValidationError("partial_trace: matrix does not match the space");
  }
  const auto& dims = space.dims();
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t f : keep) kept[f] = true;
  std::size_t dk = 1, dt = 1;
  for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? dk : dt) *= dims[f];

  // full index for every (kept, traced) pair
  std::vector<std::size_t> full(dk * dt);
  for (std::size_t i = 0; i < space.dim(); ++i) {
    std::size_t rem = i, k = 0, t = 0, kmul = 1, tmul = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
      const std::size_t digit = rem % dims[f];
      rem /= dims[f];
      if (kept[f]) {
        k += digit * kmul;
        kmul *= dims[f];
      } else {
        t += digit * tmul;
        tmul *= dims[f];
      }
    }
    full[k * dt + t] = i;
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t k2 = 0; k2 < dk; ++k2) {
    for (std::size_t k1 = 0; k1 < dk; ++k1) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) {
        acc += rho(static_cast<Eigen::Index>(full[k1 * dt + t]), static_cast<Eigen::Index>(full[k2 * dt + t]));
      }
      out(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  Matrix reduced = partial_trace(rho.matrix(), rho.space(), keep);
  return DensityMatrix::unchecked(rho.space().restrict_to(keep), std::move(reduced));
}

KrausSet kraus_from_joint_unitary(const Operator& unitary, const DensityMatrix& rho_b) {
  const auto& jdims = unitary.space().dims();
  const auto& bdims = rho_b.space().dims();
  if (jdims.size() <= bdims.size() ||
      !std::equal(bdims.begin(), bdims.end(), jdims.end() - static_cast<std::ptrdiff_t>(bdims.size()))) {
    throw ValidationError("kraus_from_joint_unitary: bath space must be the trailing factors of the joint space");
  }
  if (!unitary.is_unitary(1e-10)) throw ValidationError("kraus_from_joint_unitary: U is not unitary");
  const StateDiagnostics diag = rho_b.diagnostics();
  if (diag.min_eigenvalue < -1e-10 || diag.trace_deviation > 1e-10 || diag.hermiticity_deviation > 1e-12) {
    throw ValidationError("kraus_from_joint_unitary: bath state is not a valid density matrix");
  }
  const HilbertSpace sys(std::vector<std::size_t>(jdims.begin(), jdims.end() - static_cast<std::ptrdiff_t>(bdims.size())));
  const auto ds = static_cast<Eigen::Index>(sys.dim());
  const auto db = static_cast<Eigen::Index>(rho_b.space().dim());

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho_b.matrix() + rho_b.matrix().adjoint()));
  const Matrix& u = unitary.matrix();
  std::vector<Operator> ops;
  std::vector<KrausLabel> labels;
  for (Eigen::Index nu = 0; nu < db; ++nu) {
    const double lambda = es.eigenvalues()(nu);
    if (lambda <= kBathEigenCut) continue;
    const Vector v = es.eigenvectors().col(nu);
    // W = U (I_s (x) |nu>), rows indexed by s*db + mu
    Matrix w = Matrix::Zero(ds * db, ds);
    for (Eigen::Index sp = 0; sp < ds; ++sp) {
      w.col(sp) = u.middleCols(sp * db, db) * v;
    }
    const double amp = std::sqrt(lambda);
    for (Eigen::Index mu = 0; mu < db; ++mu) {
      Matrix a(ds, ds);
      for (Eigen::Index s = 0; s < ds; ++s) a.row(s) = amp * w.row(s * db + mu);
      ops.emplace_back(sys, std::move(a));
      labels.push_back({static_cast<std::size_t>(mu), static_cast<std::size_t>(nu), lambda});
    }
  }
  return KrausSet(std::move(ops), std::move(labels));
}

KrausSet minimal_kraus(const KrausSet& kraus, double tol) {
  const Eigen::Index d = kraus.ops().front().dim();
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (const auto& op : kraus.ops()) {
    Eigen::Map<const Vector> v(op.matrix().data(), d * d);
    choi.noalias() += v * v.adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(choi);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Operator> ops;
  for (Eigen::Index i = d * d; i-- > 0;) {
    const double lambda = es.eigenvalues()(i);
    if (lambda <= tol * std::max(1.0, top)) continue;
    Vector v = std::sqrt(lambda) * es.eigenvectors().col(i);
    Matrix a = Eigen::Map<Matrix>(v.data(), d, d);
    ops.emplace_back(kraus.space(), std::move(a));
  }
  return KrausSet(std::move(ops));
}

double top_level_population(const DensityMatrix& rho, std::size_t factor) {
  const Matrix reduced = partial_trace(rho.matrix(), rho.space(), {factor});
  const Eigen::Index top = reduced.rows() - 1;
  return reduced(top, top).real();
}

} // namespace dfskit
