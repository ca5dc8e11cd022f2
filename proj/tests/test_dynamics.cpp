#include <gtest/gtest.h>

#include "dfskit/dynamics.hpp"
#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "oracles.hpp"

using namespace dfskit;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

DensityMatrix random_pure(const HilbertSpace& s, linalg::Rng& rng) {
  return DensityMatrix::pure(StateVector(s, linalg::random_state(static_cast<Eigen::Index>(s.dim()), rng)));
}

} // namespace

TEST(Dephasing, ChannelMatchesQuadratureOracle) {
  linalg::Rng rng(41);
  for (int k : {1, 2, 3}) {
    const HilbertSpace s = HilbertSpace::qubits(static_cast<std::size_t>(k));
    const DensityMatrix rho = random_pure(s, rng);
    for (double alpha : {0.0, 0.1, 0.5, 2.0}) {
      const Matrix got = collective_dephasing_channel(rho, alpha).matrix();
      EXPECT_LT(max_abs(got - oracle::dephasing_by_quadrature(rho.matrix(), k, alpha)), 1e-9)
          << "k=" << k << " alpha=" << alpha;
    }
  }
}

TEST(Dephasing, CoherenceBetweenAdjacentWeightsDecaysByExpMinusAlpha) {
  const HilbertSpace s = HilbertSpace::qubits(1);
  const DensityMatrix plus = DensityMatrix::pure(StateVector::normalized(s, Vector::Ones(2)));
  const double alpha = 0.37;
  const Matrix out = collective_dephasing_channel(plus, alpha).matrix();
  EXPECT_NEAR(out(0, 1).real(), 0.5 * std::exp(-alpha), 1e-15);
  // Same weight: untouched.
  const HilbertSpace s2 = HilbertSpace::qubits(2);
  Vector v = Vector::Zero(4);
  v(1) = 1.0;
  v(2) = 1.0;
  const DensityMatrix bell = DensityMatrix::pure(StateVector::normalized(s2, v));
  EXPECT_LT(max_abs(collective_dephasing_channel(bell, 3.0).matrix() - bell.matrix()), 1e-15);
  EXPECT_THROW(collective_dephasing_channel(plus, -1.0), ValidationError);
}

TEST(Lindblad, AmplitudeDampingMatchesClosedForm) {
  // Coherence under sigma_z dephasing at rate gamma decays as exp(-2 gamma t).
  const HilbertSpace s = HilbertSpace::qubits(1);
  const double gamma = 0.8, t = 1.3;
  const LindbladModel m(Operator::zero(s), {pauli_on(s, 0, Pauli::Z)}, Matrix::Constant(1, 1, gamma));
  const DensityMatrix plus = DensityMatrix::pure(StateVector::normalized(s, Vector::Ones(2)));
  const auto tr = lindblad_evolve(plus, m, t, 400);
  EXPECT_NEAR(tr.states.back().matrix()(0, 1).real(), 0.5 * std::exp(-2.0 * gamma * t), 1e-6);
  // Decay of |1> to |0> under sigma_- at rate gamma: population exp(-gamma t).
  const LindbladModel d(Operator::zero(s), {pauli_on(s, 0, Pauli::Minus)}, Matrix::Constant(1, 1, gamma));
  const auto tr2 = lindblad_evolve(DensityMatrix::pure(StateVector::from_bits("1")), d, t, 400);
  EXPECT_NEAR(tr2.states.back().matrix()(1, 1).real(), std::exp(-gamma * t), 1e-6);
}

TEST(Lindblad, Rk4IsFourthOrder) {
  linalg::Rng rng(8);
  const HilbertSpace s = HilbertSpace::qubits(2);
  const LindbladModel m(Operator(s, linalg::random_hermitian(4, rng)),
                        {pauli_on(s, 0, Pauli::Minus), collective_spin(s, Pauli::Z)},
                        Matrix::Identity(2, 2) * 0.5);
  const DensityMatrix r0 = random_pure(s, rng);
  const Matrix ref = lindblad_evolve(r0, m, 1.0, 4000).states.back().matrix();
  const double e1 = max_abs(lindblad_evolve(r0, m, 1.0, 20).states.back().matrix() - ref);
  const double e2 = max_abs(lindblad_evolve(r0, m, 1.0, 40).states.back().matrix() - ref);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Lindblad, TracePreservedAndRecordedWithStride) {
  linalg::Rng rng(9);
  const auto b = models::strong_collective(3);
  const DensityMatrix r0 = random_pure(b.error_model.space, rng);
  EvolveOptions o;
  o.stride = 7;
  const std::size_t steps = stable_steps(*b.lindblad, 2.0);
  EXPECT_GE(steps, 200u);
  const auto tr = lindblad_evolve(r0, *b.lindblad, 2.0, steps, o);
  // 0, every 7th step and the final step.
  EXPECT_EQ(tr.states.size(), steps / 7 + 1 + (steps % 7 != 0));
  EXPECT_DOUBLE_EQ(tr.times.back(), 2.0);
  for (const auto& d : tr.diagnostics) {
    EXPECT_LT(d.trace_deviation, 1e-12);
    EXPECT_GT(d.min_eigenvalue, -1e-8);
  }
}

TEST(Lindblad, ZeroTimeAndDecoupledHamiltonian) {
  linalg::Rng rng(10);
  const auto b = models::strong_collective(2);
  const DensityMatrix r0 = random_pure(b.error_model.space, rng);
  const auto tr = lindblad_evolve(r0, *b.lindblad, 0.0, 10);
  EXPECT_EQ(max_abs(tr.states.back().matrix() - r0.matrix()), 0.0);
  EXPECT_EQ(default_steps(0.0), 1u);
  EXPECT_EQ(default_steps(2.5), 250u);
  EXPECT_THROW(lindblad_evolve(r0, *b.lindblad, -1.0, 10), ValidationError);
  EXPECT_THROW(lindblad_evolve(r0, *b.lindblad, 1.0, 0), ValidationError);

  // H = H_S (x) I: the bath drops out and the system rotates unitarily.
  const HilbertSpace sys = HilbertSpace::qubits(1);
  const HilbertSpace bath({3});
  const Matrix hs = linalg::random_hermitian(2, rng);
  const Operator h(tensor(sys, bath), kron(hs, Matrix::Identity(3, 3)));
  const DensityMatrix rs = random_pure(sys, rng);
  const Matrix u = oracle::unitary_by_taylor(hs, 0.9);
  const Matrix got = joint_evolve_and_trace(rs, DensityMatrix::maximally_mixed(bath), h, 0.9).matrix();
  EXPECT_LT(max_abs(got - u * rs.matrix() * u.adjoint()), 1e-12);
}

TEST(Lindblad, NonHermitianInputEvolvesLinearly) {
  // The generator must act on any matrix, so the anti-Hermitian part of a
  // perturbed state decays instead of growing.
  linalg::Rng rng(9);
  const auto b = models::strong_collective(3);
  const Matrix x = linalg::random_gaussian(8, 8, rng);
  const Matrix lx = b.lindblad->rhs(x);
  const Matrix lxd = b.lindblad->rhs(x.adjoint());
  EXPECT_LT((lx.adjoint() - lxd).norm(), 1e-12);
  EXPECT_LT(std::abs(lx.trace()), 1e-12);
  EXPECT_GT(generator_norm_bound(*b.lindblad), 1.0);
  const auto stiff = models::strong_collective(4, 50.0);
  EXPECT_GT(stable_steps(*stiff.lindblad, 1.0), default_steps(1.0));
}

TEST(Lindblad, PositivityViolationIsReported) {
  // A huge rate with a coarse step overshoots.
  const HilbertSpace s = HilbertSpace::qubits(1);
  const LindbladModel m(Operator::zero(s), {pauli_on(s, 0, Pauli::Minus)}, Matrix::Constant(1, 1, 50.0));
  EXPECT_THROW(lindblad_evolve(DensityMatrix::pure(StateVector::from_bits("1")), m, 1.0, 2), NumericalError);
}

TEST(Lindblad, InvalidModels) {
  const HilbertSpace s = HilbertSpace::qubits(1);
  EXPECT_THROW(LindbladModel(Operator::zero(s), {pauli_on(s, 0, Pauli::Z)}, Matrix::Constant(1, 1, -1.0)),
               ValidationError);
  EXPECT_THROW(LindbladModel(Operator::zero(s), {pauli_on(s, 0, Pauli::Z)}, Matrix::Identity(2, 2)),
               ValidationError);
  Matrix nh(2, 2);
  nh << 0.0, 1.0, 0.0, 0.0;
  EXPECT_THROW(LindbladModel(Operator(s, nh), {}, Matrix(0, 0)), ValidationError);
}

TEST(JointEvolution, AgreesWithOsrToHighPrecision) {
  linalg::Rng rng(12);
  for (const auto& b : {models::weak_collective_dephasing(2), models::multiple_qubit_error_model(2),
                        models::dicke_cavity_model({})}) {
    const auto& env = *b.environment;
    const Operator h = env.hamiltonian();
    const double t = 0.8;
    const KrausSet k = kraus_from_joint_unitary(matrix_exp(h, cplx(0.0, -t)), env.bath_state);
    for (int trial = 0; trial < 5; ++trial) {
      const DensityMatrix r = random_pure(b.error_model.space, rng);
      const Matrix a = joint_evolve_and_trace(r, env.bath_state, h, t).matrix();
      const Matrix o = osr_evolve(r, k).matrix();
      EXPECT_LT(max_abs(a - o), 1e-9) << b.name;
    }
  }
}
