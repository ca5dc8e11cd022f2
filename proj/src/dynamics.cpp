#include "dfskit/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"

namespace dfskit {

LindbladModel::LindbladModel(Operator h_eff, std::vector<Operator> ops, Matrix coeff)
    : h_eff_(std::move(h_eff)), ops_(std::move(ops)), coeff_(std::move(coeff)) {
  if (!h_eff_.is_hermitian(1e-12)) throw ValidationError("LindbladModel: effective Hamiltonian is not Hermitian");
  const auto n = static_cast<Eigen::Index>(ops_.size());
  if (coeff_.rows() != n || coeff_.cols() != n) {
    throw ValidationError("LindbladModel: coefficient matrix size does not match the operator count");
  }
  for (const auto& op : ops_) {
    if (!(op.space() == h_eff_.space())) throw ValidationError("LindbladModel: operator space mismatch");
  }
  const Eigen::Index d = h_eff_.dim();
  drift_ = cplx(0.0, -1.0) * h_eff_.matrix();
  if (n == 0) return;
  if ((coeff_ - coeff_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("LindbladModel: coefficient matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (coeff_ + coeff_.adjoint()));
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw ValidationError("LindbladModel: coefficient matrix is not positive semidefinite");
  }
  const double top = std::max(0.0, es.eigenvalues().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    const double g = es.eigenvalues()(k);
    if (g <= 1e-14 * top || g <= 0.0) continue;
    Matrix l = Matrix::Zero(d, d);
    for (Eigen::Index a = 0; a < n; ++a) {
      const cplx u = es.eigenvectors()(a, k);
      if (u != cplx(0.0)) l += u * ops_[static_cast<std::size_t>(a)].matrix();
    }
    l *= std::sqrt(g);
    drift_.noalias() -= 0.5 * (l.adjoint() * l);
    jumps_.push_back(std::move(l));
  }
}

LindbladModel LindbladModel::hamiltonian_only(Operator h_eff) { return LindbladModel(std::move(h_eff), {}, Matrix(0, 0)); }

LindbladModel LindbladModel::with_hamiltonian(Operator h) const { return LindbladModel(std::move(h), ops_, coeff_); }

LindbladModel LindbladModel::with_extra_ops(const std::vector<Operator>& extra, const Matrix& block) const {
  const auto n = static_cast<Eigen::Index>(ops_.size());
  const auto m = static_cast<Eigen::Index>(extra.size());
  if (block.rows() != m || block.cols() != m) throw ValidationError("with_extra_ops: block size mismatch");
  Matrix a = Matrix::Zero(n + m, n + m);
  a.topLeftCorner(n, n) = coeff_;
  a.bottomRightCorner(m, m) = block;
  std::vector<Operator> all = ops_;
  all.insert(all.end(), extra.begin(), extra.end());
  return LindbladModel(h_eff_, std::move(all), std::move(a));
}

Matrix LindbladModel::rhs(const Matrix& rho) const {
  // Written for general rho: the (drift rho) + h.c. shortcut only holds for
  // exactly Hermitian input and lets rounding in the anti-Hermitian part grow.
  Matrix out = drift_ * rho;
  out.noalias() += rho * drift_.adjoint();
  for (const auto& l : jumps_) out.noalias() += l * rho * l.adjoint();
  return out;
}

Matrix lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model) {
  if (!(rho.space() == model.space())) throw ValidationError("lindblad_rhs: space mismatch");
  return model.rhs(rho.matrix());
}

std::size_t default_steps(double t_final) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(100.0 * t_final - 1e-9)));
}

namespace {

// Largest singular value by power iteration on A^dag A. Cheaper than the
// SVD in linalg for the large generators this is used on.
double norm_estimate(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
  double sigma2 = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vector w = a.adjoint() * (a * v);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    const double prev = sigma2;
    sigma2 = n;
    v = w / n;
    if (std::abs(sigma2 - prev) <= 1e-6 * sigma2) break;
  }
  // Power iteration approaches from below; pad slightly.
  return 1.05 * std::sqrt(sigma2);
}

} // namespace

double generator_norm_bound(const LindbladModel& model) {
  double b = 2.0 * norm_estimate(model.h_eff().matrix());
  for (const auto& l : model.jump_operators()) {
    const double s = norm_estimate(l);
    b += 2.0 * s * s;
  }
  return b;
}

std::size_t stable_steps(const LindbladModel& model, double t_final) {
  const std::size_t base = default_steps(t_final);
  const double need = std::ceil(t_final * generator_norm_bound(model) / 2.0);
  return std::max(base, static_cast<std::size_t>(need));
}

Trajectory lindblad_evolve(const DensityMatrix& rho0, const LindbladModel& model, double t_final, std::size_t steps,
                           const EvolveOptions& opts) {
  if (!(rho0.space() == model.space())) throw ValidationError("lindblad_evolve: space mismatch");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ValidationError("lindblad_evolve: t_final must be >= 0");
  if (steps < 1) throw ValidationError("lindblad_evolve: steps must be >= 1");
  if (opts.stride < 1) throw ValidationError("lindblad_evolve: stride must be >= 1");
  Trajectory traj;
  auto record = [&](double t, const Matrix& m) {
    DensityMatrix state = DensityMatrix::unchecked(rho0.space(), m);
    StateDiagnostics diag = state.diagnostics();
    if (diag.min_eigenvalue < opts.positivity_floor) {
      std::ostringstream os;
      os << "lindblad_evolve: state lost positivity at t=" << t << " (min eigenvalue " << diag.min_eigenvalue
         << "); use more steps";
      throw NumericalError(os.str());
    }
    traj.times.push_back(t);
    traj.states.push_back(std::move(state));
    traj.diagnostics.push_back(diag);
  };
  record(0.0, rho0.matrix());
  if (t_final == 0.0) return traj;

  const double dt = t_final / static_cast<double>(steps);
  Matrix rho = rho0.matrix();
  for (std::size_t s = 1; s <= steps; ++s) {
    const Matrix k1 = model.rhs(rho);
    const Matrix k2 = model.rhs(rho + 0.5 * dt * k1);
    const Matrix k3 = model.rhs(rho + 0.5 * dt * k2);
    const Matrix k4 = model.rhs(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (opts.renormalize) rho /= rho.trace();
    if (s % opts.stride == 0 || s == steps) record(dt * static_cast<double>(s), rho);
  }
  return traj;
}

DensityMatrix osr_evolve(const DensityMatrix& rho, const KrausSet& kraus) {
  if (!(rho.space() == kraus.space())) throw ValidationError("osr_evolve: space mismatch");
  if (kraus.normalization_error() > 1e-10) throw ValidationError("osr_evolve: Kraus set is not normalized");
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const auto& a : kraus.ops()) out.noalias() += a.matrix() * rho.matrix() * a.matrix().adjoint();
  return DensityMatrix::unchecked(rho.space(), std::move(out));
}

DensityMatrix collective_dephasing_channel(const DensityMatrix& rho, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("collective_dephasing_channel: alpha must be >= 0");
  if (!rho.space().all_qubits()) throw ValidationError("collective_dephasing_channel: qubit space required");
  const Eigen::Index d = rho.dim();
  std::vector<int> weight(static_cast<std::size_t>(d));
  for (Eigen::Index b = 0; b < d; ++b) weight[static_cast<std::size_t>(b)] = std::popcount(static_cast<std::uint64_t>(b));
  const auto n = static_cast<int>(rho.space().num_factors());
  std::vector<double> factor(static_cast<std::size_t>(n) + 1);
  for (int delta = 0; delta <= n; ++delta) factor[static_cast<std::size_t>(delta)] = std::exp(-alpha * delta * delta);
  Matrix out = rho.matrix();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const int delta = std::abs(weight[static_cast<std::size_t>(i)] - weight[static_cast<std::size_t>(j)]);
      if (delta != 0) out(i, j) *= factor[static_cast<std::size_t>(delta)];
    }
  }
  return DensityMatrix::unchecked(rho.space(), std::move(out));
}

DensityMatrix joint_evolve_and_trace(const DensityMatrix& rho_s, const DensityMatrix& rho_b, const Operator& h, double t) {
  const HilbertSpace joint = tensor(rho_s.space(), rho_b.space());
  if (!(h.space() == joint)) throw ValidationError("joint_evolve_and_trace: Hamiltonian space does not match system (x) bath");
  if (!h.is_hermitian(1e-12)) throw ValidationError("joint_evolve_and_trace: Hamiltonian is not Hermitian");
  const Matrix u = matrix_exp(h, cplx(0.0, -t)).matrix();
  const Matrix rho = u * kron(rho_s.matrix(), rho_b.matrix()) * u.adjoint();
  std::vector<std::size_t> keep(rho_s.space().num_factors());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  return DensityMatrix::unchecked(rho_s.space(), partial_trace(rho, joint, keep));
}

} // namespace dfskit
