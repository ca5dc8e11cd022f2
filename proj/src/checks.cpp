#include "dfskit/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"

namespace dfskit {

namespace {

// exp(a) v by a scaled Taylor series; only the action is needed.
Vector expm_action(const Matrix& a, const Vector& v) {
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  const int s = std::max(1, static_cast<int>(std::ceil(norm1)));
  Vector w = v;
  for (int step = 0; step < s; ++step) {
    Vector term = w;
    Vector acc = w;
    for (int j = 1; j < 200; ++j) {
      term = a * term / (static_cast<double>(s) * j);
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    w = acc;
  }
  return w;
}

} // namespace

StabilizerReport stabilizer_check(const StateVector& psi, const ErrorModel& model, const std::vector<cplx>& eigen_tuple,
                                  std::size_t samples, std::uint64_t seed, double tol) {
  if (!(psi.space() == model.space)) throw ValidationError("stabilizer_check: state and model spaces differ");
  if (eigen_tuple.size() != model.ops.size()) {
    throw ValidationError("stabilizer_check: eigenvalue tuple length does not match the operator count");
  }
  StabilizerReport report;
  const Vector& v = psi.amplitudes();
  std::vector<Matrix> generators;
  for (std::size_t a = 0; a < model.ops.size(); ++a) {
    Matrix g = -model.ops[a].matrix();
    g.diagonal().array() += eigen_tuple[a];
    report.differential_deviation = std::max(report.differential_deviation, (g * v).norm());
    generators.push_back(std::move(g));
  }
  linalg::Rng rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const auto d = static_cast<Eigen::Index>(model.space.dim());
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix a = Matrix::Zero(d, d);
    for (const auto& g : generators) a += uni(rng) * g;
    report.group_deviation = std::max(report.group_deviation, (expm_action(a, v) - v).norm());
  }
  report.pass = report.group_deviation <= tol && report.differential_deviation <= tol;
  return report;
}

DegeneracyReport qecc_degeneracy_check(const KrausSet& kraus, const Subspace& sub, double tol) {
  if (!(kraus.space() == sub.space)) throw ValidationError("qecc_degeneracy_check: space mismatch");
  const Eigen::Index k = sub.dim();
  if (k == 0) throw ValidationError("qecc_degeneracy_check: empty subspace");
  const auto n = static_cast<Eigen::Index>(kraus.size());
  std::vector<Matrix> af;
  for (const auto& op : kraus.ops()) af.push_back(op.matrix() * sub.frame);
  DegeneracyReport report;
  report.gamma.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const Matrix g = af[static_cast<std::size_t>(a)].adjoint() * af[static_cast<std::size_t>(b)];
      const cplx gab = g.trace() / static_cast<double>(k);
      report.gamma(a, b) = gab;
      const Matrix dev = g - gab * Matrix::Identity(k, k);
      report.residual = std::max(report.residual, dev.norm());
    }
  }
  Eigen::BDCSVD<Matrix> svd(report.gamma);
  const RealVector& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  report.rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * top) ++report.rank;
  }
  report.pass = report.residual <= tol && report.rank == 1;
  return report;
}

InvarianceReport check_hs_invariance(const Subspace& sub, const Operator& hs, double tol) {
  if (!(hs.space() == sub.space)) throw ValidationError("check_hs_invariance: space mismatch");
  InvarianceReport report;
  if (sub.dim() > 0) {
    const Matrix hf = hs.matrix() * sub.frame;
    const Matrix leak = hf - sub.frame * (sub.frame.adjoint() * hf);
    // Spectral norm of a d x k matrix through its k x k Gram matrix.
    Eigen::SelfAdjointEigenSolver<Matrix> es(leak.adjoint() * leak, Eigen::EigenvaluesOnly);
    report.leakage = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  report.pass = report.leakage <= tol * hs.norm();
  return report;
}

KrausSet random_environment_kraus(const std::vector<Operator>& ops, std::uint64_t seed, double t,
                                  std::size_t bath_dim) {
  if (ops.empty()) throw ValidationError("random_environment_kraus: no operators");
  if (bath_dim < 1) throw ValidationError("random_environment_kraus: bath dimension must be >= 1");
  const HilbertSpace& space = ops.front().space();
  const HilbertSpace bath({bath_dim});
  require_working_dim(space.dim() * bath_dim, "random_environment_kraus");
  linalg::Rng rng(seed);
  const auto db = static_cast<Eigen::Index>(bath_dim);
  std::vector<std::pair<Operator, Operator>> couplings;
  for (const auto& s : ops) {
    if (!(s.space() == space)) throw ValidationError("random_environment_kraus: operator space mismatch");
    if (s.is_hermitian(1e-12)) {
      couplings.emplace_back(s, Operator(bath, linalg::random_hermitian(db, rng)));
    } else {
      const Operator b(bath, linalg::random_gaussian(db, db, rng));
      couplings.emplace_back(s, b);
      couplings.emplace_back(s.adjoint(), b.adjoint());
    }
  }
  const Operator hb(bath, linalg::random_hermitian(db, rng));
  const Operator h = assemble_joint_hamiltonian(Operator::zero(space), hb, couplings);
  const Matrix g = linalg::random_gaussian(db, db, rng);
  Matrix rho_b = g * g.adjoint();
  rho_b /= rho_b.trace();
  return kraus_from_joint_unitary(matrix_exp(h, cplx(0.0, -t)), DensityMatrix(bath, 0.5 * (rho_b + rho_b.adjoint())));
}

} // namespace dfskit
