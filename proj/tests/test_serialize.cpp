#include <gtest/gtest.h>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "dfskit/serialize.hpp"

using namespace dfskit;

TEST(Serialize, ShortestRoundTripFormatting) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(io::format_shortest(v)), v);
  }
  EXPECT_EQ(io::format_shortest(0.5), "0.5");
  EXPECT_EQ(io::dump(io::Json(std::nan(""))), "null\n");
}

TEST(Serialize, DumpUsesSeventeenSignificantDigits) {
  const std::string s = io::dump(io::Json{{"x", 0.1}});
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_EQ(std::stod(s.substr(s.find(':') + 1)), 0.1);
}

TEST(Serialize, MatrixAndOperatorRoundTripExactly) {
  linalg::Rng rng(4);
  const Matrix m = linalg::random_gaussian(3, 5, rng);
  const Matrix back = io::matrix_from_json(io::parse(io::dump(io::matrix_to_json(m))));
  EXPECT_EQ((m - back).norm(), 0.0);
  const HilbertSpace s({2, 3});
  const Operator op(s, linalg::random_gaussian(6, 6, rng));
  const Operator ob = io::operator_from_json(io::parse(io::dump(io::operator_to_json(op))));
  EXPECT_EQ(ob.space().dims(), s.dims());
  EXPECT_EQ((ob.matrix() - op.matrix()).norm(), 0.0);
}

TEST(Serialize, PauliShorthandAndStates) {
  const auto op = io::operator_from_json(io::parse(R"({"pauli":"ZX","coeff":{"re":0.5,"im":1}})"));
  EXPECT_LT((op.matrix() - pauli_string(HilbertSpace::qubits(2), "ZX", cplx(0.5, 1.0)).matrix()).norm(), 1e-15);
  const auto r = io::density_from_json(io::parse(R"({"bits":"01"})"));
  EXPECT_EQ(r.matrix()(1, 1), cplx(1.0));
  const auto a = io::density_from_json(io::parse(R"({"dims":[2],"amplitudes":{"re":[1,1]}})"));
  EXPECT_NEAR(a.matrix()(0, 1).real(), 0.5, 1e-15);
  const auto i = io::density_from_json(io::parse(R"({"dims":[3],"index":2})"));
  EXPECT_EQ(i.matrix()(2, 2), cplx(1.0));
}

TEST(Serialize, ErrorModelSubspaceAndDecompositionRoundTrip) {
  const auto b = models::eit_model({});
  const ErrorModel m = io::error_model_from_json(io::parse(io::dump(io::error_model_to_json(b.error_model))));
  ASSERT_EQ(m.ops.size(), b.error_model.ops.size());
  for (std::size_t a = 0; a < m.ops.size(); ++a) EXPECT_EQ((m.ops[a].matrix() - b.error_model.ops[a].matrix()).norm(), 0.0);
  ASSERT_TRUE(m.system_hamiltonian.has_value());

  const auto found = find_df_subspaces(m);
  const Subspace s = io::subspace_from_json(io::subspace_to_json(found[0]), m.space);
  EXPECT_EQ((s.frame - found[0].frame).norm(), 0.0);
  EXPECT_EQ(s.eigen_tuple->size(), m.ops.size());

  const auto dec = models::three_qubit_subsystem_block();
  const auto back = io::decomposition_from_json(io::decomposition_to_json(dec), dec.space);
  ASSERT_EQ(back.blocks.size(), 1u);
  EXPECT_EQ(back.blocks[0].label, "J=1/2");
  EXPECT_EQ((back.blocks[0].basis - dec.blocks[0].basis).norm(), 0.0);
}

TEST(Serialize, MalformedInputIsAValidationError) {
  EXPECT_THROW(io::parse("{ not json"), ValidationError);
  EXPECT_THROW(io::matrix_from_json(io::parse(R"({"re":[[1,2],[3]]})")), ValidationError);
  EXPECT_THROW(io::error_model_from_json(io::parse(R"({"dims":[2]})")), ValidationError);
  EXPECT_THROW(io::operator_from_json(io::parse(R"({"matrix":{"re":[[1]]}})")), ValidationError);
  EXPECT_THROW(io::read_file("/nonexistent/dfskit.json"), ValidationError);
}
