#include <gtest/gtest.h>

#include <algorithm>

#include "dfskit/errors.hpp"
#include "dfskit/finder.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "oracles.hpp"

using namespace dfskit;

TEST(ClosedForms, SingletDimensionsFrozen) {
  const std::vector<std::uint64_t> frozen{1, 2, 5, 14, 42, 132};
  for (unsigned k = 0; k < frozen.size(); ++k) {
    const unsigned n = 2 * (k + 1);
    EXPECT_EQ(models::singlet_dimension(n), frozen[k]);
    EXPECT_EQ(models::singlet_dimension(n), oracle::spin_paths(static_cast<int>(n)).at(0));
    EXPECT_EQ(models::singlet_dimension(n - 1), 0u);
  }
}

TEST(ClosedForms, MultiplicitiesAgreeWithPathCounting) {
  for (unsigned n = 1; n <= 20; ++n) {
    const auto paths = oracle::spin_paths(static_cast<int>(n));
    std::uint64_t total = 0, lowest = 0;
    for (auto [two_j, count] : paths) {
      EXPECT_EQ(models::spin_multiplicity(n, static_cast<unsigned>(two_j)), count) << n << " " << two_j;
      total += count * static_cast<std::uint64_t>(two_j + 1);
      lowest += count;
    }
    EXPECT_EQ(total, std::uint64_t{1} << n);
    // One lowest-weight state per copy of every J.
    EXPECT_EQ(models::lowest_weight_dimension(n), lowest);
  }
  EXPECT_EQ(models::spin_multiplicity(4, 1), 0u);
  EXPECT_EQ(models::spin_multiplicity(4, 6), 0u);
  EXPECT_EQ(models::binomial(10, 3), 120u);
  EXPECT_EQ(models::binomial(3, 5), 0u);
  EXPECT_EQ(models::singlet_dimension(66), 212336130412243110ull);
  EXPECT_THROW(models::binomial(80, 40), NumericalError);
}

TEST(ClosedForms, EncodingEfficiencyApproachesAsymptote) {
  EXPECT_NEAR(models::encoding_efficiency(2, 4), 0.25, 1e-15);
  double prev_gap = 1.0;
  for (unsigned n : {8u, 16u, 32u, 64u}) {
    const double e = models::encoding_efficiency(models::singlet_dimension(n), n);
    EXPECT_LT(e, 1.0);
    const double gap = std::abs(e - models::efficiency_asymptote(n));
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
}

TEST(Frames, SingletFrameSpansNullSpace) {
  for (std::size_t n : {2u, 4u, 6u}) {
    const Matrix f = models::singlet_frame(n);
    EXPECT_EQ(static_cast<std::uint64_t>(f.cols()), models::singlet_dimension(static_cast<unsigned>(n)));
    EXPECT_LT(linalg::orthonormality_error(f), 1e-12);
    for (const auto& op : models::strong_collective(n).error_model.ops) EXPECT_LT((op.matrix() * f).norm(), 1e-12);
  }
}

TEST(Frames, QxCharacterFrames) {
  const auto m = models::multiple_qubit_error_model(4, true).error_model;
  for (const std::vector<int>& signs : std::vector<std::vector<int>>{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}}) {
    const Matrix f = models::qx_character_frame(signs);
    EXPECT_EQ(f.cols(), 4);
    EXPECT_LT(linalg::orthonormality_error(f), 1e-14);
    const Matrix xx01 = pauli_string(m.space, "XXII", 1.0).matrix();
    const Matrix xx23 = pauli_string(m.space, "IIXX", 1.0).matrix();
    EXPECT_LT((xx01 * f - signs[0] * f).norm(), 1e-14);
    EXPECT_LT((xx23 * f - signs[1] * f).norm(), 1e-14);
  }
  // The (-1,+1) character contains (|0000> - |1100> + |0011> - |1111>)/2.
  Vector v = Vector::Zero(16);
  v(0) = 0.5;
  v(12) = -0.5;
  v(3) = 0.5;
  v(15) = -0.5;
  const Matrix f = models::qx_character_frame({-1, 1});
  EXPECT_NEAR((f.adjoint() * v).norm(), 1.0, 1e-14);
}

TEST(Models, DickeThreeAtomsHasTwoSingletLikeStates) {
  models::DickeParams p;
  p.n = 3;
  const auto b = models::dicke_cavity_model(p);
  const auto found = find_df_subspaces(b.error_model);
  // J=1/2 appears twice for three atoms, J=3/2 once.
  EXPECT_EQ(models::spin_multiplicity(3, 1), 2u);
  EXPECT_EQ(models::lowest_weight_dimension(3), 3u);
  bool seen = false;
  for (const auto& kd : b.known_dfs) {
    EXPECT_LE(containment_residual(found, *kd.frame), 1e-8) << kd.description;
    if (kd.dim == 3) seen = true;
  }
  EXPECT_TRUE(seen);
}

TEST(Models, EitDissipatorAnnihilatesKnownDfs) {
  for (const auto& p : {models::EitParams{}, models::EitParams{4, {1.0, 0.5, 2.0, 1.5}, 0.3, {}, {}},
                        models::EitParams{3, {}, 0.0, {}, {1.0, 0.0, 2.0}}}) {
    const auto b = models::eit_model(p);
    ASSERT_TRUE(b.lindblad.has_value());
    for (const auto& kd : b.known_dfs) {
      const Matrix& f = *kd.frame;
      for (Eigen::Index c = 0; c < f.cols(); ++c) {
        const Matrix rho = f.col(c) * f.col(c).adjoint();
        const Matrix d = b.lindblad->with_hamiltonian(Operator::zero(b.error_model.space)).rhs(rho);
        EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-12) << kd.description;
      }
    }
    EXPECT_FALSE(b.notes.empty());
  }
}

TEST(Models, EitDarkSubspaceDimension) {
  for (std::size_t n = 2; n <= 6; ++n) {
    models::EitParams p;
    p.n = n;
    EXPECT_EQ(models::eit_dark_subspace(p).dim(), static_cast<Eigen::Index>(n - 1));
  }
}

TEST(Models, EveryBundleIsConsistent) {
  for (const auto& b : {models::weak_collective_dephasing(3), models::strong_collective(4), models::eit_model({}),
                        models::dicke_cavity_model({}), models::multiple_qubit_error_model(4),
                        models::spin_boson_toy({})}) {
    EXPECT_NO_THROW(b.error_model.validate()) << b.name;
    ASSERT_TRUE(b.lindblad.has_value()) << b.name;
    EXPECT_EQ(b.lindblad->space(), b.error_model.space);
    ASSERT_TRUE(b.environment.has_value()) << b.name;
    EXPECT_TRUE(b.environment->hamiltonian().is_hermitian(1e-12)) << b.name;
    for (const auto& kd : b.known_dfs) {
      EXPECT_LT(linalg::orthonormality_error(*kd.frame), 1e-10) << b.name;
      for (std::size_t a = 0; a < b.error_model.ops.size(); ++a) {
        const Matrix r = b.error_model.ops[a].matrix() * *kd.frame - kd.eigen_tuple[a] * *kd.frame;
        EXPECT_LT(r.norm(), 1e-10) << b.name << " " << kd.description;
      }
    }
  }
  const auto names = models::model_names();
  EXPECT_EQ(names.size(), 6u);
}

TEST(Models, ParameterValidation) {
  EXPECT_THROW(models::weak_collective_dephasing(0), ValidationError);
  EXPECT_THROW(models::strong_collective(1), ValidationError);
  EXPECT_THROW(models::multiple_qubit_error_model(3), ValidationError);
  EXPECT_THROW(models::eit_model(models::EitParams{1, {}, 0.0, {}, {}}), ValidationError);
  EXPECT_THROW(models::eit_model(models::EitParams{3, {1.0}, 0.0, {}, {}}), ValidationError);
  models::DickeParams d;
  d.cutoff = 1;
  EXPECT_THROW(models::dicke_cavity_model(d), ValidationError);
  models::SpinBosonParams sb;
  sb.n = 8;
  sb.modes = 3;
  sb.cutoff = 8;
  EXPECT_THROW(models::spin_boson_toy(sb), NumericalError);
}
