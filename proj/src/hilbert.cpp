#include "dfskit/hilbert.hpp"

#include <cstdlib>
#include <sstream>

#include "dfskit/errors.hpp"

namespace dfskit {

HilbertSpace::HilbertSpace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw ValidationError("HilbertSpace: at least one factor is required");
  }
  for (std::size_t d : dims_) {
    if (d < 2) {
      throw ValidationError("HilbertSpace: every local dimension must be >= 2");
    }
    if (total_ > kHardDimLimit / d) {
      throw NumericalError("HilbertSpace: total dimension exceeds 2^20");
    }
    total_ *= d;
  }
}

HilbertSpace HilbertSpace::qubits(std::size_t n) {
  return HilbertSpace(std::vector<std::size_t>(n, 2));
}

std::size_t HilbertSpace::local_dim(std::size_t factor) const {
  if (factor >= dims_.size()) {
    throw ValidationError("HilbertSpace: factor index out of range");
  }
  return dims_[factor];
}

bool HilbertSpace::all_qubits() const noexcept {
  for (std::size_t d : dims_) {
    if (d != 2) return false;
  }
  return true;
}

HilbertSpace HilbertSpace::restrict_to(const std::vector<std::size_t>& factors) const {
  std::vector<std::size_t> out;
  out.reserve(factors.size());
  for (std::size_t f : factors) out.push_back(local_dim(f));
  return HilbertSpace(std::move(out));
}

std::string HilbertSpace::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ',';
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

HilbertSpace tensor(const HilbertSpace& a, const HilbertSpace& b) {
  std::vector<std::size_t> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return HilbertSpace(std::move(dims));
}

std::size_t max_working_dim() {
  if (const char* env = std::getenv("DFSKIT_MAX_DIM")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<std::size_t>(v);
    }
  }
  return 4096;
}

void require_working_dim(std::size_t dim, const char* what) {
  if (dim > max_working_dim()) {
    std::ostringstream os;
    os << what << ": dimension " << dim << " exceeds guard " << max_working_dim()
       << " (set DFSKIT_MAX_DIM to override)";
    throw NumericalError(os.str());
  }
}

} // namespace dfskit
