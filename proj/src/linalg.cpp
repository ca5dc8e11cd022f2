#include "dfskit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dfskit::linalg {

Matrix null_space(const Matrix& a, double threshold) {
  const Eigen::Index k = a.cols();
  if (k == 0) return Matrix(0, 0);
  Matrix reduced;
  if (a.rows() > k) {
    // Same right null space as R from a = QR, at k x k cost.
    Eigen::HouseholderQR<Matrix> qr(a);
    reduced = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  } else {
    reduced = a;
  }
  Eigen::BDCSVD<Matrix> svd(reduced, Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const Matrix& v = svd.matrixV();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k; ++i) {
    double sv = i < s.size() ? s(i) : 0.0;
    if (sv <= threshold) keep.push_back(i);
  }
  Matrix out(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = v.col(keep[j]);
  return out;
}

Matrix orthonormal_span(const Matrix& cols, double tol) {
  Matrix out(cols.rows(), cols.cols());
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    Vector v = cols.col(j);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < r; ++i) {
        v -= out.col(i) * out.col(i).dot(v);
      }
    }
    const double n = v.norm();
    if (n <= tol * std::max(1.0, original)) continue;
    out.col(r++) = v / n;
  }
  return out.leftCols(r);
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

void orient_columns(Matrix& frame) {
  for (Eigen::Index j = 0; j < frame.cols(); ++j) {
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index i = 0; i < frame.rows(); ++i) {
      // Ties resolved toward the lowest index so orientation is reproducible.
      double m = std::abs(frame(i, j));
      if (m > mag * (1.0 + 1e-9)) {
        mag = m;
        best = i;
      }
    }
    if (mag > 0.0) {
      cplx phase = std::conj(frame(best, j)) / mag;
      frame.col(j) *= phase;
      frame(best, j) = cplx(frame(best, j).real(), 0.0);
    }
  }
}

double min_eigenvalue_hermitian(const Matrix& h) {
  Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_diagonal(const Matrix& a, double tol) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && std::abs(a(i, j)) > tol) return false;
    }
  }
  return true;
}

std::vector<std::vector<Eigen::Index>> cluster_values(const Vector& values, double tol) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  // Sorting by real part lets the sweep stop early.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values(a).real() < values(b).real(); });
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      if (values(order[q]).real() - values(order[p]).real() > tol) break;
      if (std::abs(values(order[q]) - values(order[p])) <= tol) {
        parent[find(order[q])] = find(order[p]);
      }
    }
  }
  std::vector<std::vector<Eigen::Index>> clusters;
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return clusters;
}

Matrix canonical_frame(const Matrix& frame) {
  const Eigen::Index k = frame.cols();
  Matrix x = frame.adjoint();
  RealVector residual = x.colwise().squaredNorm().transpose();
  Matrix u(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      if (residual(i) > best * (1.0 + 1e-9) + 1e-300) {
        best = residual(i);
        pivot = i;
      }
    }
    Vector v = x.col(pivot);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) v -= u.col(i) * u.col(i).dot(v);
    }
    v.normalize();
    u.col(j) = v;
    residual -= (v.adjoint() * x).cwiseAbs2().transpose();
    residual(pivot) = 0.0;
  }
  Matrix out = frame * u;
  orient_columns(out);
  return out;
}

OpAction::OpAction(const Matrix& op) : dense_(&op) {
  const Eigen::Index d = op.rows();
  if (d >= 64) {
    Eigen::Index nnz = (op.array() != cplx(0.0)).count();
    if (nnz * 20 < d * op.cols()) {
      sparse_ = op.sparseView();
      use_sparse_ = true;
    }
  }
}

Matrix OpAction::apply(const Matrix& x) const {
  if (use_sparse_) return sparse_ * x;
  return (*dense_) * x;
}

double orthonormality_error(const Matrix& frame) {
  if (frame.cols() == 0) return 0.0;
  Matrix g = frame.adjoint() * frame;
  g -= Matrix::Identity(g.rows(), g.cols());
  return g.cwiseAbs().maxCoeff();
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double re = normal(rng);
      double im = normal(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

Vector random_state(Eigen::Index n, Rng& rng) {
  Vector v = random_gaussian(n, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_hermitian(Eigen::Index n, Rng& rng) {
  Matrix g = random_gaussian(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

Matrix random_unitary(Eigen::Index n, Rng& rng) {
  Matrix g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phases of R's diagonal so the distribution is Haar.
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx d = r(i, i);
    double m = std::abs(d);
    if (m > 0.0) q.col(i) *= d / m;
  }
  return q;
}

} // namespace dfskit::linalg
