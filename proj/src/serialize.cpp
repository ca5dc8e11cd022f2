#include "dfskit/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dfskit/errors.hpp"

namespace dfskit::io {

namespace {

template <class F>
auto translate(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": malformed JSON (" + e.what() + ")");
  }
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void write(std::ostringstream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  if (j.is_number_float()) {
    os << format_double(j.get<double>());
  } else if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ",\n";
      first = false;
      os << inner << Json(it.key()).dump() << ": ";
      write(os, it.value(), indent + 2);
    }
    os << "\n" << pad << "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    const bool flat = std::all_of(j.begin(), j.end(), is_scalar);
    if (flat) {
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ", ";
        write(os, j[i], indent);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) os << ",\n";
      os << inner;
      write(os, j[i], indent + 2);
    }
    os << "\n" << pad << "]";
  } else {
    os << j.dump();
  }
}

std::vector<std::size_t> dims_from(const Json& j, const std::vector<std::size_t>* fallback) {
  if (j.contains("dims")) return j.at("dims").get<std::vector<std::size_t>>();
  if (fallback) return *fallback;
  throw ValidationError("missing \"dims\"");
}

Json real_rows(const Matrix& m, bool imag) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(imag ? m(r, c).imag() : m(r, c).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

std::string dump(const Json& j) {
  std::ostringstream os;
  write(os, j, 0);
  os << "\n";
  return os.str();
}

std::string format_shortest(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Json complex_to_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from_json(const Json& j) {
  return translate("complex", [&] {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2) return cplx(j[0].get<double>(), j[1].get<double>());
    return cplx(j.at("re").get<double>(), j.value("im", 0.0));
  });
}

Json matrix_to_json(const Matrix& m) { return Json{{"re", real_rows(m, false)}, {"im", real_rows(m, true)}}; }

Matrix matrix_from_json(const Json& j) {
  return translate("matrix", [&] {
    const Json& re = j.at("re");
    const Json* im = j.contains("im") ? &j.at("im") : nullptr;
    if (!re.is_array()) throw ValidationError("matrix: \"re\" must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(re.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(re.at(0).size()) : Eigen::Index{0};
    if (im && (!im->is_array() || static_cast<Eigen::Index>(im->size()) != rows)) {
      throw ValidationError("matrix: \"re\" and \"im\" shapes differ");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Json& rr = re.at(static_cast<std::size_t>(r));
      if (static_cast<Eigen::Index>(rr.size()) != cols) throw ValidationError("matrix: ragged rows");
      if (im && static_cast<Eigen::Index>(im->at(static_cast<std::size_t>(r)).size()) != cols) {
        throw ValidationError("matrix: \"re\" and \"im\" shapes differ");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        const double a = rr.at(static_cast<std::size_t>(c)).get<double>();
        const double b = im ? im->at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>() : 0.0;
        if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("matrix: non-finite entry");
        m(r, c) = cplx(a, b);
      }
    }
    return m;
  });
}

Json operator_to_json(const Operator& op) {
  return Json{{"dims", op.space().dims()}, {"matrix", matrix_to_json(op.matrix())}};
}

Operator operator_from_json(const Json& j, const std::vector<std::size_t>* default_dims) {
  return translate("operator", [&] {
    if (!j.is_object()) throw ValidationError("operator: expected an object");
    if (j.contains("pauli")) {
      const auto letters = j.at("pauli").get<std::string>();
      const cplx coeff = j.contains("coeff") ? complex_from_json(j.at("coeff")) : cplx(1.0);
      std::vector<std::size_t> dims;
      if (j.contains("dims")) {
        dims = j.at("dims").get<std::vector<std::size_t>>();
      } else if (default_dims) {
        dims = *default_dims;
      } else {
        dims.assign(letters.size(), 2);
      }
      return pauli_string(HilbertSpace(dims), letters, coeff);
    }
    return Operator(HilbertSpace(dims_from(j, default_dims)), matrix_from_json(j.at("matrix")));
  });
}

Json state_to_json(const StateVector& psi) {
  const Vector& v = psi.amplitudes();
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return Json{{"dims", psi.space().dims()}, {"amplitudes", {{"re", re}, {"im", im}}}};
}

Json density_to_json(const DensityMatrix& rho) {
  return Json{{"dims", rho.space().dims()}, {"matrix", matrix_to_json(rho.matrix())}};
}

DensityMatrix density_from_json(const Json& j) {
  return translate("state", [&] {
    if (!j.is_object()) throw ValidationError("state: expected an object");
    if (j.contains("bits")) {
      const auto psi = StateVector::from_bits(j.at("bits").get<std::string>());
      return DensityMatrix::pure(psi);
    }
    const HilbertSpace space(dims_from(j, nullptr));
    if (j.contains("index")) return DensityMatrix::pure(StateVector::basis(space, j.at("index").get<std::size_t>()));
    if (j.contains("amplitudes")) {
      const Json& a = j.at("amplitudes");
      const auto re = a.at("re").get<std::vector<double>>();
      const auto im = a.contains("im") ? a.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
      if (re.size() != im.size()) throw ValidationError("state: \"re\" and \"im\" lengths differ");
      Vector v(static_cast<Eigen::Index>(re.size()));
      for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = cplx(re[i], im[i]);
      if (static_cast<std::size_t>(v.size()) != space.dim()) throw ValidationError("state: amplitude count does not match dims");
      return DensityMatrix::pure(StateVector::normalized(space, v));
    }
    return DensityMatrix(space, matrix_from_json(j.at("matrix")));
  });
}

Json error_model_to_json(const ErrorModel& m) {
  Json j;
  j["dims"] = m.space.dims();
  Json ops = Json::array();
  for (const auto& op : m.ops) ops.push_back(Json{{"matrix", matrix_to_json(op.matrix())}});
  j["ops"] = ops;
  j["labels"] = m.op_labels;
  if (m.coeff_matrix) j["coeff_matrix"] = matrix_to_json(*m.coeff_matrix);
  if (m.system_hamiltonian) j["h_s"] = Json{{"matrix", matrix_to_json(m.system_hamiltonian->matrix())}};
  j["hermitian_closed"] = m.hermitian_closed;
  return j;
}

ErrorModel error_model_from_json(const Json& j) {
  return translate("error model", [&] {
    if (!j.is_object()) throw ValidationError("error model: expected an object");
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    const HilbertSpace space(dims);
    std::vector<Operator> ops;
    for (const auto& o : j.at("ops")) ops.push_back(operator_from_json(o, &dims));
    ErrorModel m(space, std::move(ops));
    if (j.contains("labels")) m.op_labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("coeff_matrix") && !j.at("coeff_matrix").is_null()) m.coeff_matrix = matrix_from_json(j.at("coeff_matrix"));
    if (j.contains("h_s") && !j.at("h_s").is_null()) m.system_hamiltonian = operator_from_json(j.at("h_s"), &dims);
    m.hermitian_closed = j.value("hermitian_closed", false);
    m.validate();
    return m;
  });
}

LindbladModel lindblad_from_json(const Json& j) {
  const ErrorModel m = error_model_from_json(j);
  const auto n = static_cast<Eigen::Index>(m.ops.size());
  const Matrix a = m.coeff_matrix ? *m.coeff_matrix : Matrix(Matrix::Identity(n, n));
  const Operator h = m.system_hamiltonian ? *m.system_hamiltonian : Operator::zero(m.space);
  return LindbladModel(h, m.ops, a);
}

Json subspace_to_json(const Subspace& s, bool with_frame) {
  Json j;
  if (s.eigen_tuple) {
    Json t = Json::array();
    for (const auto& c : *s.eigen_tuple) t.push_back(complex_to_json(c));
    j["eigen_tuple"] = t;
  } else {
    j["eigen_tuple"] = nullptr;
  }
  j["dim"] = s.dim();
  j["residual"] = s.residual;
  if (with_frame) j["frame"] = matrix_to_json(s.frame);
  return j;
}

Subspace subspace_from_json(const Json& j, const HilbertSpace& space) {
  return translate("subspace", [&] {
    std::optional<std::vector<cplx>> tuple;
    if (j.contains("eigen_tuple") && !j.at("eigen_tuple").is_null()) {
      tuple.emplace();
      for (const auto& c : j.at("eigen_tuple")) tuple->push_back(complex_from_json(c));
    }
    Subspace s(space, matrix_from_json(j.at("frame")), tuple);
    return s;
  });
}

Json decomposition_to_json(const SubsystemDecomposition& d, bool with_basis) {
  Json blocks = Json::array();
  for (const auto& b : d.blocks) {
    Json jb;
    jb["J_label"] = b.label;
    jb["two_j"] = b.two_j ? Json(*b.two_j) : Json(nullptr);
    jb["n"] = b.multiplicity;
    jb["d"] = b.block_dim;
    jb["residual"] = b.residual;
    if (with_basis) jb["basis"] = matrix_to_json(b.basis);
    blocks.push_back(std::move(jb));
  }
  return Json{{"dims", d.space.dims()}, {"covered_dim", d.covered_dim()}, {"blocks", blocks}};
}

SubsystemDecomposition decomposition_from_json(const Json& j, const HilbertSpace& space) {
  return translate("decomposition", [&] {
    SubsystemDecomposition d{space, {}};
    for (const auto& jb : j.at("blocks")) {
      SubsystemBlock b;
      b.label = jb.value("J_label", std::string());
      if (jb.contains("two_j") && !jb.at("two_j").is_null()) b.two_j = jb.at("two_j").get<int>();
      b.multiplicity = jb.at("n").get<Eigen::Index>();
      b.block_dim = jb.at("d").get<Eigen::Index>();
      b.basis = matrix_from_json(jb.at("basis"));
      if (b.multiplicity < 1 || b.block_dim < 1 || b.basis.cols() != b.multiplicity * b.block_dim ||
          b.basis.rows() != static_cast<Eigen::Index>(space.dim())) {
        throw ValidationError("decomposition: block basis shape does not match n * d columns");
      }
      d.blocks.push_back(std::move(b));
    }
    return d;
  });
}

} // namespace dfskit::io
