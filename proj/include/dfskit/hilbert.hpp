#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dfskit {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Absolute cap on any Hilbert space the library will build.
inline constexpr std::size_t kHardDimLimit = std::size_t{1} << 20;

/// Ordered list of local dimensions. Basis states are ordered big-endian:
/// factor 0 is the most significant digit.
class HilbertSpace {
public:
  explicit HilbertSpace(std::vector<std::size_t> dims);

  static HilbertSpace qubits(std::size_t n);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t num_factors() const noexcept { return dims_.size(); }
  std::size_t local_dim(std::size_t factor) const;
  std::size_t dim() const noexcept { return total_; }
  bool all_qubits() const noexcept;

  /// Space built from the listed factors, in the order given.
  HilbertSpace restrict_to(const std::vector<std::size_t>& factors) const;

  std::string to_string() const;

  friend bool operator==(const HilbertSpace& a, const HilbertSpace& b) {
    return a.dims_ == b.dims_;
  }

private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

HilbertSpace tensor(const HilbertSpace& a, const HilbertSpace& b);

/// Working dimension guard for the dense finders. Defaults to 4096 and can be
/// overridden through the DFSKIT_MAX_DIM environment variable.
std::size_t max_working_dim();

/// Throws NumericalError if `dim` exceeds max_working_dim().
void require_working_dim(std::size_t dim, const char* what);

} // namespace dfskit
