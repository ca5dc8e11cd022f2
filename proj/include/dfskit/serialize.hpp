#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dfskit/decompose.hpp"
#include "dfskit/dynamics.hpp"
#include "dfskit/finder.hpp"

namespace dfskit::io {

using Json = nlohmann::ordered_json;

/// Indented JSON with every float printed at 17 significant digits.
std::string dump(const Json& j);
/// Shortest round-trip representation, for CSV cells.
std::string format_shortest(double v);

Json parse(const std::string& text);
Json read_file(const std::string& path);

Json complex_to_json(cplx z);
cplx complex_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// {"dims", "matrix"}; input also accepts {"pauli": "XIZ", "coeff": {...}}.
Json operator_to_json(const Operator& op);
Operator operator_from_json(const Json& j, const std::vector<std::size_t>* default_dims = nullptr);

/// Pure states as {"dims", "amplitudes": {"re", "im"}} or {"bits": "0101"};
/// mixed states as {"dims", "matrix"}.
Json state_to_json(const StateVector& psi);
Json density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const Json& j);

/// {"dims", "ops", "labels", "coeff_matrix", "h_s"}.
Json error_model_to_json(const ErrorModel& m);
ErrorModel error_model_from_json(const Json& j);
/// Lindblad model from the same schema; a missing coefficient matrix means
/// the identity and a missing h_s means zero.
LindbladModel lindblad_from_json(const Json& j);

Json subspace_to_json(const Subspace& s, bool with_frame = true);
Subspace subspace_from_json(const Json& j, const HilbertSpace& space);
Json decomposition_to_json(const SubsystemDecomposition& d, bool with_basis = true);
SubsystemDecomposition decomposition_from_json(const Json& j, const HilbertSpace& space);

} // namespace dfskit::io
