#include "dfskit/robustness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"

namespace dfskit {

namespace {

// States at each listed time, integrating piecewise with a common step size.
std::vector<Matrix> states_at(const LindbladModel& model, const DensityMatrix& rho0, const std::vector<double>& times,
                              std::size_t steps) {
  const double dt = times.back() / static_cast<double>(std::max(steps, stable_steps(model, times.back())));
  std::vector<Matrix> out;
  DensityMatrix rho = rho0;
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
      EvolveOptions opts;
      opts.stride = n;
      Trajectory tr = lindblad_evolve(rho, model, span, n, opts);
      rho = tr.states.back();
    }
    t = target;
    out.push_back(rho.matrix());
  }
  return out;
}

// Re tr(a^dag b).
double overlap(const Matrix& a, const Matrix& b) { return a.conjugate().cwiseProduct(b).sum().real(); }

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den > 0.0 ? (n * sxy - sx * sy) / den : std::nan("");
}

} // namespace

std::string to_string(InjectionConvention c) { return c == InjectionConvention::Rate ? "rate" : "amplitude"; }

InjectionConvention parse_convention(const std::string& s) {
  if (s == "rate") return InjectionConvention::Rate;
  if (s == "amplitude") return InjectionConvention::Amplitude;
  throw ValidationError("unknown injection convention '" + s + "' (expected rate or amplitude)");
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.space() == b.space())) throw ValidationError("fidelity: space mismatch");
  return overlap(a.matrix(), b.matrix());
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (n == 0 || !(lo > 0.0) || !(hi >= lo)) throw ValidationError("log_spaced: need 0 < lo <= hi and n >= 1");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return v;
}

std::vector<double> lin_spaced(double lo, double hi, std::size_t n) {
  if (n == 0 || !(hi >= lo)) throw ValidationError("lin_spaced: need lo <= hi and n >= 1");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

ScalingReport run_perturbation(const PerturbationExperiment& exp, std::size_t steps) {
  const auto& eps = exp.epsilons;
  const auto& times = exp.times;
  if (eps.empty() || times.empty()) throw ValidationError("run_perturbation: epsilons and times must be non-empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] > eps[i - 1]))) {
      throw ValidationError("run_perturbation: epsilons must be positive and strictly ascending");
    }
  }
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0) || (j > 0 && !(times[j] > times[j - 1]))) {
      throw ValidationError("run_perturbation: times must be positive and strictly ascending");
    }
  }
  if (steps < 1) throw ValidationError("run_perturbation: steps must be >= 1");
  if (exp.perturbing_ops.empty()) throw ValidationError("run_perturbation: no perturbing operators");
  if (!(exp.initial.space() == exp.base.space())) throw ValidationError("run_perturbation: initial state space mismatch");
  for (const auto& op : exp.perturbing_ops) {
    if (!(op.space() == exp.base.space())) throw ValidationError("run_perturbation: perturbing operator space mismatch");
  }
  if (exp.dfs) {
    if (!(exp.dfs->space == exp.base.space())) throw ValidationError("run_perturbation: DFS space mismatch");
    const Matrix p = exp.dfs->projector();
    const Matrix& rho = exp.initial.matrix();
    if ((rho - p * rho * p).norm() > 1e-8) {
      throw ValidationError("run_perturbation: initial state is not supported on the declared DFS");
    }
  }
  if (exp.fit_eps < 1 || exp.fit_times < 1) throw ValidationError("run_perturbation: fit window must be non-empty");

  ScalingReport r;
  r.epsilons = eps;
  r.times = times;
  r.convention = exp.convention;

  const std::vector<Matrix> ideal = states_at(exp.base, exp.initial, times, steps);
  for (const auto& m : ideal) r.baseline.push_back(overlap(m, m));

  const auto m = static_cast<Eigen::Index>(exp.perturbing_ops.size());
  for (double e : eps) {
    const double strength = exp.convention == InjectionConvention::Rate ? e : e * e;
    const LindbladModel perturbed = exp.base.with_extra_ops(exp.perturbing_ops, strength * Matrix::Identity(m, m));
    const std::vector<Matrix> noisy = states_at(perturbed, exp.initial, times, steps);
    std::vector<double> f, g;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double fj = overlap(ideal[j], noisy[j]);
      if (fj > 1.0 + 1e-9) {
        std::ostringstream os;
        os << "run_perturbation: fidelity " << fj << " exceeds 1 at eps=" << e << ", t=" << times[j]
           << "; integrator trouble, use more steps";
        throw NumericalError(os.str());
      }
      f.push_back(fj);
      g.push_back(1.0 - fj);
    }
    r.fidelity.push_back(std::move(f));
    r.one_minus_f.push_back(std::move(g));
  }

  const std::size_t ne = std::min(exp.fit_eps, eps.size());
  const std::size_t nt = std::min(exp.fit_times, times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (std::size_t i = 1; i < eps.size(); ++i) {
      if (r.one_minus_f[i][j] < r.one_minus_f[i - 1][j] - 1e-14) r.monotone_in_eps = false;
    }
  }

  std::vector<std::array<double, 3>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < ne; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double v = r.one_minus_f[i][j];
      if (!(v > 0.0)) continue;
      rows.push_back({1.0, std::log(eps[i]), std::log(times[j])});
      rhs.push_back(std::log(v));
    }
  }
  if (rows.size() < 3 || ne < 2 || nt < 2) {
    throw NumericalError("run_perturbation: degenerate fit window (need two eps values, two times and three positive 1-f points)");
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    a(kk, 0) = rows[k][0];
    a(kk, 1) = rows[k][1];
    a(kk, 2) = rows[k][2];
    b(kk) = rhs[k];
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(b);
  r.log_c = coef(0);
  r.p_eps = coef(1);
  r.p_t = coef(2);
  r.fit_residual = (a * coef - b).norm() / std::sqrt(static_cast<double>(rows.size()));
  r.fit_points = rows.size();

  for (std::size_t j = 0; j < nt; ++j) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < ne; ++i) {
      if (r.one_minus_f[i][j] > 0.0) {
        x.push_back(std::log(eps[i]));
        y.push_back(std::log(r.one_minus_f[i][j]));
      }
    }
    r.slope_eps_at_t.push_back(slope(x, y));
  }
  for (std::size_t i = 0; i < ne; ++i) {
    std::vector<double> x, y;
    for (std::size_t j = 0; j < nt; ++j) {
      if (r.one_minus_f[i][j] > 0.0) {
        x.push_back(std::log(times[j]));
        y.push_back(std::log(r.one_minus_f[i][j]));
      }
    }
    r.slope_t_at_eps.push_back(slope(x, y));
  }
  return r;
}

PerturbationExperiment collective_singlet_experiment(std::size_t n, InjectionConvention c, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw ValidationError("collective_singlet_experiment: N must be even and >= 2");
  const models::ModelBundle bundle = models::strong_collective(n);
  const Matrix frame = models::singlet_frame(n);
  linalg::Rng rng(seed);
  const Vector coeffs = linalg::random_state(frame.cols(), rng);
  const StateVector psi(bundle.error_model.space, frame * coeffs);
  PerturbationExperiment e{*bundle.lindblad,
                           {pauli_on(bundle.error_model.space, 0, Pauli::Z)},
                           log_spaced(1e-3, 1e-2, 6),
                           lin_spaced(0.1, 1.0, 10),
                           DensityMatrix::pure(psi),
                           seed,
                           Subspace(bundle.error_model.space, frame),
                           c};
  return e;
}

PerturbationExperiment unencoded_plus_experiment(InjectionConvention c) {
  const HilbertSpace q = HilbertSpace::qubits(1);
  Vector plus(2);
  plus << 1.0, 1.0;
  const StateVector psi = StateVector::normalized(q, plus);
  PerturbationExperiment e{LindbladModel::hamiltonian_only(Operator::zero(q)),
                           {pauli_on(q, 0, Pauli::Z)},
                           log_spaced(1e-3, 1e-2, 6),
                           lin_spaced(0.1, 1.0, 10),
                           DensityMatrix::pure(psi),
                           0xDF5,
                           std::nullopt,
                           c};
  return e;
}

} // namespace dfskit
