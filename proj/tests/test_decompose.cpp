#include <gtest/gtest.h>

#include "dfskit/decompose.hpp"
#include "dfskit/errors.hpp"
#include "dfskit/finder.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "oracles.hpp"

using namespace dfskit;

namespace {

std::vector<Operator> collective_ops(std::size_t n) {
  const auto s = HilbertSpace::qubits(n);
  return {collective_spin(s, Pauli::Plus), collective_spin(s, Pauli::Minus), collective_spin(s, Pauli::Z)};
}

} // namespace

TEST(Decompose, ThreeQubitsGiveQuartetAndTwoDoublets) {
  auto dec = decompose_algebra(collective_ops(3));
  label_angular_momentum(dec);
  ASSERT_EQ(dec.blocks.size(), 2u);
  EXPECT_EQ(dec.blocks[0].label, "J=3/2");
  EXPECT_EQ(dec.blocks[0].multiplicity, 1);
  EXPECT_EQ(dec.blocks[0].block_dim, 4);
  EXPECT_EQ(dec.blocks[1].label, "J=1/2");
  EXPECT_EQ(dec.blocks[1].multiplicity, 2);
  EXPECT_EQ(dec.blocks[1].block_dim, 2);
  EXPECT_EQ(dec.covered_dim(), 8);
  EXPECT_LT(linalg::orthonormality_error(dec.full_basis()), 1e-10);
  const auto rep = verify_subsystem_condition(dec, collective_ops(3));
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.max_deviation, 1e-10);
}

TEST(Decompose, MultiplicitiesMatchPathCountingUpToSix) {
  for (int n = 1; n <= 6; ++n) {
    auto dec = decompose_algebra(collective_ops(static_cast<std::size_t>(n)));
    label_angular_momentum(dec);
    const auto paths = oracle::spin_paths(n);
    ASSERT_EQ(dec.blocks.size(), paths.size()) << "n=" << n;
    for (const auto& b : dec.blocks) {
      ASSERT_TRUE(b.two_j.has_value());
      EXPECT_EQ(static_cast<std::uint64_t>(b.multiplicity), paths.at(*b.two_j)) << "n=" << n;
      EXPECT_EQ(b.block_dim, *b.two_j + 1);
    }
  }
}

TEST(Decompose, ExplicitThreeQubitBlockSatisfiesSubsystemCondition) {
  const auto block = models::three_qubit_subsystem_block();
  EXPECT_LT(linalg::orthonormality_error(block.full_basis()), 1e-15);
  const auto rep = verify_subsystem_condition(block, collective_ops(3), 1e-10);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.max_deviation, 1e-10);
}

TEST(Decompose, SubsystemConditionFailsForUnalignedCopies) {
  auto block = models::three_qubit_subsystem_block();
  // Swap mu inside the second copy only.
  block.blocks[0].basis.col(2).swap(block.blocks[0].basis.col(3));
  EXPECT_FALSE(verify_subsystem_condition(block, collective_ops(3)).pass);
}

TEST(Decompose, OneDimensionalBlocksMatchFinder) {
  // Abelian algebra: every block is one-dimensional and must coincide with a
  // finder subspace.
  const auto m = models::multiple_qubit_error_model(4).error_model;
  const auto dec = decompose_algebra(m.ops);
  const auto found = find_df_subspaces(m);
  ASSERT_EQ(dec.blocks.size(), found.size());
  for (const auto& b : dec.blocks) {
    EXPECT_EQ(b.block_dim, 1);
    EXPECT_EQ(b.multiplicity, 4);
    EXPECT_LE(containment_residual(found, b.basis), 1e-8);
  }
  // Collective model: J=0 copies span the singlet subspace.
  auto dec6 = decompose_algebra(collective_ops(6));
  label_angular_momentum(dec6);
  const auto f6 = find_df_subspaces(models::strong_collective(6).error_model);
  for (const auto& b : dec6.blocks) {
    if (b.block_dim == 1) EXPECT_LE(containment_residual(f6, b.basis), 1e-8);
  }
}

TEST(Decompose, GeneralAlgebraLabelsAndSeeds) {
  // sigma_z on qubit 0 of two qubits: two blocks, d=1, n=2 each.
  const auto s = HilbertSpace::qubits(2);
  const auto dec = decompose_algebra({pauli_on(s, 0, Pauli::Z)});
  ASSERT_EQ(dec.blocks.size(), 2u);
  EXPECT_EQ(dec.blocks[0].label, "block0(d=1,n=2)");
  DecomposeOptions o;
  o.seed = 99;
  const auto other = decompose_algebra({pauli_on(s, 0, Pauli::Z)}, o);
  EXPECT_EQ(other.blocks.size(), 2u);
  // Full matrix algebra on one qubit: one block d=2, n=2 on two qubits.
  const auto full = decompose_algebra({pauli_on(s, 1, Pauli::X), pauli_on(s, 1, Pauli::Z)});
  ASSERT_EQ(full.blocks.size(), 1u);
  EXPECT_EQ(full.blocks[0].block_dim, 2);
  EXPECT_EQ(full.blocks[0].multiplicity, 2);
}

TEST(Decompose, InvalidInput) {
  EXPECT_THROW(decompose_algebra({}), ValidationError);
  const auto a = HilbertSpace::qubits(1);
  const auto b = HilbertSpace::qubits(2);
  EXPECT_THROW(decompose_algebra({pauli_on(a, 0, Pauli::X), pauli_on(b, 0, Pauli::X)}), ValidationError);
}
